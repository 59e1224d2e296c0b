"""Closed-form stability predicates versus eigenvalue classification.

Each published stability statement is evaluated literally at a parameter
point whenever its hypotheses hold, and the predicted type is compared with
the type read off the Jacobian.  Statements whose printed form is known to
disagree with the Jacobian are listed in ``KNOWN_DISCREPANCIES``; a
disagreement from any other statement is reported as unexplained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .equilibria import (
    DEFAULT_TOL,
    EquilibriumRecord,
    coarse,
    cubic_of,
    equilibria_all,
    real_roots,
    weak_case,
)
from .model import ScaledParams

__all__ = [
    "KNOWN_DISCREPANCIES",
    "CrosscheckEntry",
    "CrosscheckReport",
    "theorem_crosscheck",
]

KNOWN_DISCREPANCIES = {
    "P2-threshold": (
        "P2 stability threshold is built from J11 at u1 with a factor 1/4 and "
        "the inequality reversed; the trace at u2 vanishes at "
        "S = u2 g'(u2)/(A + u2)"
    ),
    "E-split": (
        "saddle-node attractor/repeller split at (E, E+C) has the inequality "
        "reversed; the trace vanishes at S = E Q/(A + E)"
    ),
    "W-saddle-condition": (
        "the saddle condition for (W, W+C) has its inequality reversed; the "
        "printed expression equals W f'(W), which is positive at a non-saddle"
    ),
    "weak-P2-threshold": (
        "P2 threshold in the three-root weak case carries a spurious factor 4"
    ),
    "L1-split": (
        "saddle-node attractor/repeller split at (L1, L1+C) carries a spurious "
        "factor 1/2; the trace vanishes at Q = S (A + L)/L"
    ),
    "W-lemma": (
        "the single weak equilibrium is claimed to be always a stable node; "
        "its trace is positive for small S"
    ),
}


@dataclass(frozen=True)
class CrosscheckEntry:
    theorem: str
    point: tuple[float, float]
    predicted: str
    observed: str
    status: str  # agree, discrepancy or boundary

    @property
    def known(self) -> bool:
        return self.theorem in KNOWN_DISCREPANCIES


@dataclass(frozen=True)
class CrosscheckReport:
    params: ScaledParams
    entries: tuple[CrosscheckEntry, ...]

    @property
    def discrepancies(self) -> list[CrosscheckEntry]:
        return [e for e in self.entries if e.status == "discrepancy"]

    @property
    def flagged(self) -> set[str]:
        """Known typos that produced a disagreement at this point."""
        return {e.theorem for e in self.discrepancies if e.known}

    @property
    def unexplained(self) -> list[CrosscheckEntry]:
        return [e for e in self.discrepancies if not e.known]

    @property
    def ok(self) -> bool:
        return not self.unexplained


def _observed(rec: EquilibriumRecord) -> str:
    c = coarse(rec.label)
    if c != "degenerate":
        return c
    if rec.label == "saddle-node":
        return "sn-attractor" if rec.trace < 0 else "sn-repeller"
    return "degenerate"


def _threshold(S: float, thr: float, below: str, above: str) -> str:
    if abs(S - thr) <= 1e-9 * max(1.0, abs(thr)):
        return "boundary"
    return below if S < thr else above


class _Collector:
    def __init__(self):
        self.entries: list[CrosscheckEntry] = []

    def add(self, theorem: str, rec: EquilibriumRecord, predicted: str):
        obs = _observed(rec)
        if predicted == "boundary" or obs in ("degenerate", "center"):
            status = "boundary"
        elif obs == predicted:
            status = "agree"
        else:
            status = "discrepancy"
        self.entries.append(
            CrosscheckEntry(theorem, (rec.location.u, rec.location.v), predicted, obs, status)
        )


def _j11_first(sp: ScaledParams, u: float) -> float:
    # the sign convention of the strong-case section
    A, M = sp.A, sp.M
    return M - A * (1 + M) - 2 * u + 2 * A * u - 2 * M * u + 3 * u * u


def theorem_crosscheck(sp: ScaledParams, tol: float = DEFAULT_TOL) -> CrosscheckReport:
    A, C, M, Q, S = sp.A, sp.C, sp.M, sp.Q, sp.S
    recs = equilibria_all(sp, tol)
    by_kind = {r.kind: r for r in recs if r.kind != "positive"}
    pos = [r for r in recs if r.kind == "positive"]
    out = _Collector()

    # boundary equilibria
    if M > 0:
        out.add("boundary-lemma", by_kind["origin"], "saddle")
        out.add("boundary-lemma", by_kind["prey-only-M"], "unstable")
        out.add("boundary-lemma", by_kind["predator-only"], "stable")
    else:
        out.add("boundary-lemma", by_kind["origin"], "unstable")
        x = C + A * M / Q
        pred = "boundary" if abs(x) <= tol else ("saddle" if x < 0 else "stable")
        out.add("theorem-0C", by_kind["predator-only"], pred)
    out.add("boundary-lemma", by_kind["prey-only-K"], "saddle")

    c = cubic_of(sp)
    roots = real_roots(c)
    double = [r for r in pos if r.multiplicity > 1]
    simple = [r for r in pos if r.multiplicity == 1]

    # cases with a nonpositive root -G and a pair P1 < P2
    if c.c0 >= 0 and roots[0][0] <= 0:
        G = -roots[0][0]
        s = 1 - A + G + M
        delta = s * s - 4 * (M + Q - A * (M + 1) + G * s)
        if len(simple) == 2 and delta > 0:
            p1, p2 = simple
            out.add("P1-saddle", p1, "saddle")
            sq = math.sqrt(delta)
            thr = _j11_first(sp, p1.location.u) * (1 - A + M + G + sq) / (4 * (1 + A + M + G + sq))
            out.add("P2-threshold", p2, _threshold(S, thr, "stable", "unstable"))
        if double and M > 0:
            xe = (1 - A + M + G) * (1 + A - M - G) * (1 - A + G - M) / (4 * (1 + A + M + G)) + (A - G) / 2
            out.add("E-split", double[0], _threshold(S, xe, "sn-attractor", "sn-repeller"))

    if M < 0 and c.c0 < 0:
        case = weak_case(sp)
        all_pos = sorted(r.location.u for r in pos)
        if case == "iii.a" and len(pos) == 1 and not double:
            out.add("W-lemma", pos[0], "stable")
        if case == "iii.b" and len(pos) == 3:
            W, u1, u2 = all_pos
            w_rec, p1, p2 = sorted(pos, key=lambda r: r.location.u)
            expr = W**3 - (Q + M - A * (M + 1)) * W - 2 * (A * M + C * Q)
            if expr > 0:
                out.add("W-saddle-condition", w_rec, "saddle")
            elif expr < 0:
                num = 3 * (A * M + C * Q) + W * ((A - M - 1) * W + 2 * (Q + M - A * (1 + M)) - Q)
                out.add("W-threshold", w_rec, _threshold(S, num / (W + A), "unstable", "stable"))
            sq = u2 - u1
            if W - u1 < 0:
                out.add("weak-P1", p1, "saddle")
            else:
                thr = 4 * u1 * (Q + (u1 - W) * sq) / (A + u1)
                out.add("weak-P1-threshold", p1, _threshold(S, thr, "unstable", "stable"))
            if u2 - W < 0:
                out.add("weak-P2", p2, "saddle")
            else:
                thr = 4 * u2 * (Q - (u2 - W) * sq) / (A + u2)
                out.add("weak-P2-threshold", p2, _threshold(S, thr, "unstable", "stable"))
        if case == "iii.b" and double and simple:
            W = simple[0].location.u
            L = double[0]
            if W < L.location.u:
                thr = S * (M - W + A + 1) / (2 * (M - W - A + 1))
                pred = "boundary" if abs(Q - thr) <= 1e-9 else ("sn-attractor" if Q > thr else "sn-repeller")
                out.add("L1-split", L, pred)

    return CrosscheckReport(params=sp, entries=tuple(out.entries))
