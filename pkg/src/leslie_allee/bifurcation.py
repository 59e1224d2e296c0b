"""Codimension-one curves and Bogdanov-Takens points in the (Q, S) plane.

The positive equilibria do not depend on S, so fold lines are vertical and
the Hopf value of each antisaddle is explicit.  Homoclinic loops are found
by shooting (see :func:`leslie_allee.dynamics.manifold_gap`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .dynamics import BracketError, NoReturn, SectionMiss, find_cycle, manifold_gap
from .equilibria import (
    coarse,
    cubic_of,
    equilibria_all,
    g_prime,
    hopf_value,
    positive_roots,
    strong_decomposition,
)
from .model import PhaseState, ScaledParams, jacobian_scaled

__all__ = [
    "BifurcationCurve",
    "BTPoint",
    "RegionLabel",
    "BifurcationDiagram",
    "fold_values",
    "saddle_node_locus",
    "transcritical_value",
    "hopf_locus",
    "bt_points",
    "sotomayor_transversality",
    "homoclinic_locus",
    "region_of",
    "diagram",
    "STRONG_REGIONS",
    "WEAK_REGIONS",
]

STRONG_REGIONS = {
    "I": "P2 stable, no cycle",
    "II": "P2 stable inside an unstable cycle",
    "III": "P2 unstable",
    "IV": "no positive equilibrium",
}

WEAK_REGIONS = {
    "I": "one positive equilibrium",
    "II": "two positive equilibria, P2 unstable",
    "III": "two positive equilibria, P2 stable, no cycle",
    "IV": "two positive equilibria, P2 stable inside an unstable cycle",
    "V": "three positive equilibria",
    "VI": "no positive equilibrium",
}


@dataclass(frozen=True)
class BifurcationCurve:
    kind: str  # saddle-node, transcritical, hopf, homoclinic or heteroclinic
    points: tuple[tuple[float, float], ...]
    meta: tuple[PhaseState, ...]
    residuals: tuple[float, ...] = ()
    gaps: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.points)

    def clipped(self, q_range, s_range) -> "BifurcationCurve":
        keep = [
            i
            for i, (q, s) in enumerate(self.points)
            if q_range[0] <= q <= q_range[1] and s_range[0] <= s <= s_range[1]
        ]
        return BifurcationCurve(
            self.kind,
            tuple(self.points[i] for i in keep),
            tuple(self.meta[i] for i in keep),
            tuple(self.residuals[i] for i in keep) if self.residuals else (),
            self.gaps,
        )


@dataclass(frozen=True)
class BTPoint:
    Q: float
    S: float
    equilibrium: PhaseState
    nilpotency_residual: float
    relation_residual: float
    printed_relation_residual: float
    case: str


@dataclass(frozen=True)
class RegionLabel:
    id: str
    signature: tuple[int, tuple[str, ...], bool]


@dataclass(frozen=True)
class BifurcationDiagram:
    M: float
    A: float
    C: float
    q_range: tuple[float, float]
    s_range: tuple[float, float]
    resolution: int
    curves: tuple[BifurcationCurve, ...]
    bt: tuple[BTPoint, ...]
    q_axis: np.ndarray
    s_axis: np.ndarray
    raster: np.ndarray  # shape (len(s_axis), len(q_axis)) of region ids
    metadata: dict = field(default_factory=dict)

    def of_kind(self, kind: str) -> list[BifurcationCurve]:
        return [c for c in self.curves if c.kind == kind and len(c)]

    @property
    def regions(self) -> set[str]:
        return {str(x) for x in np.unique(self.raster)} - {"boundary"}


def _sp(A, C, M, Q, S=1.0) -> ScaledParams:
    return ScaledParams(A=A, C=C, M=M, Q=Q, S=S)


def _g(A, M, u):
    return (u + A) * (1.0 - u) * (u - M)


def _g2(A, M, u):
    return 2.0 * (1.0 - A + M) - 6.0 * u


# ---------------------------------------------------------------------------
# folds


def _disc(A, C, M, Q) -> float:
    c = cubic_of(_sp(A, C, M, Q))
    return c.discriminant()


def _double_root(A, C, M, Q) -> float:
    """Critical point of the cubic where it (nearly) vanishes."""
    c = cubic_of(_sp(A, C, M, Q))
    a, b, cc = 3.0 * c.c3, 2.0 * c.c2, c.c1
    disc = b * b - 4 * a * cc
    if disc < 0:
        return math.nan
    r = math.sqrt(disc)
    cands = [(-b - r) / (2 * a), (-b + r) / (2 * a)]
    return min(cands, key=lambda u: abs(c(u)))


def fold_values(M: float, A: float, C: float, n_grid: int = 4000) -> list[tuple[float, float]]:
    """All ``(Q*, u*)`` with a double equilibrium ``u*`` in (0, 1).

    Sign changes of the cubic's discriminant over a Q grid are refined by
    Brent's method; only double roots inside (0, 1) are kept.
    """
    us = np.linspace(1e-6, 1.0 - 1e-6, 2001)
    phi = _g(A, M, us) / (us + C)
    q_hi = 1.05 * float(phi.max())
    if q_hi <= 0:
        return []
    qs = np.linspace(q_hi * 1e-7, q_hi, n_grid)
    ds = np.array([_disc(A, C, M, float(q)) for q in qs])
    out = []
    for i in range(len(qs) - 1):
        if ds[i] == 0.0:
            qf = float(qs[i])
        elif ds[i] * ds[i + 1] < 0:
            qf = brentq(lambda q: _disc(A, C, M, q), float(qs[i]), float(qs[i + 1]), xtol=1e-15, rtol=1e-15)
        else:
            continue
        u = _double_root(A, C, M, qf)
        if 0.0 < u < 1.0:
            out.append((qf, u))
    return out


def _fold_residual(A, C, M, Q, u) -> float:
    c = cubic_of(_sp(A, C, M, Q))
    return abs(c(u)) + abs(c.deriv(u))


def saddle_node_locus(
    M: float,
    A: float,
    C: float,
    s_range: tuple[float, float] = (1e-3, 1.0),
    n_points: int = 32,
    q_range: Optional[tuple[float, float]] = None,
) -> list[BifurcationCurve]:
    """One vertical line per fold value of Q (folds do not depend on S)."""
    ss = np.linspace(s_range[0], s_range[1], n_points)
    curves = []
    for qf, u in fold_values(M, A, C):
        if q_range is not None and not q_range[0] <= qf <= q_range[1]:
            continue
        res = _fold_residual(A, C, M, qf, u)
        pts = tuple((qf, float(s)) for s in ss)
        meta = tuple(PhaseState(u, u + C) for _ in ss)
        curves.append(BifurcationCurve("saddle-node", pts, meta, tuple(res for _ in ss)))
    return curves


def transcritical_value(M: float, A: float, C: float) -> Optional[float]:
    """Q at which a weak-case equilibrium passes through (0, C)."""
    if M >= 0:
        return None
    return -A * M / C


# ---------------------------------------------------------------------------
# Hopf


def hopf_locus(
    M: float,
    A: float,
    C: float,
    q_range: tuple[float, float],
    n_points: int = 64,
) -> list[BifurcationCurve]:
    """Trace-zero curves ``S = u g'(u)/(A + u)`` over the antisaddles.

    Points are grouped into branches by continuity of the equilibrium; a
    branch that ends at a fold inside the range is closed with the fold
    point itself, which is the Bogdanov-Takens point.
    """
    if n_points < 2:
        raise ValueError("need at least two Q samples")
    qs = np.linspace(q_range[0], q_range[1], n_points)
    step = qs[1] - qs[0]
    branches: list[list[tuple[float, float, float]]] = []
    open_: list[int] = []
    for q in qs:
        q = float(q)
        sp = _sp(A, C, M, q)
        c = cubic_of(sp)
        pts = []
        for r, m in positive_roots(sp):
            if m != 1 or c.deriv(r) <= 0:
                continue
            sh = hopf_value(sp, r)
            if sh > 0:
                pts.append((q, sh, r))
        nxt_open = []
        used = set()
        for p in pts:
            best = None
            for bi in open_:
                if bi in used:
                    continue
                du = abs(branches[bi][-1][2] - p[2])
                if du < 0.1 and (best is None or du < best[0]):
                    best = (du, bi)
            if best is None:
                branches.append([p])
                nxt_open.append(len(branches) - 1)
            else:
                branches[best[1]].append(p)
                used.add(best[1])
                nxt_open.append(best[1])
        open_ = nxt_open
    folds = fold_values(M, A, C)
    curves = []
    for br in branches:
        for end, sgn in ((0, -1), (-1, 1)):
            q_end, _, u_end = br[end]
            for qf, uf in folds:
                if 0 < sgn * (qf - q_end) <= step * (1 + 1e-9) and abs(uf - u_end) < 0.2:
                    sf = hopf_value(_sp(A, C, M, qf), uf)
                    if sf > 0:
                        if end == 0:
                            br.insert(0, (qf, sf, uf))
                        else:
                            br.append((qf, sf, uf))
                    break
        res = []
        for q, s, u in br:
            J = jacobian_scaled(_sp(A, C, M, q, s), (u, u + C))
            res.append(abs(J[0, 0] + J[1, 1]))
        curves.append(
            BifurcationCurve(
                "hopf",
                tuple((q, s) for q, s, _ in br),
                tuple(PhaseState(u, u + C) for _, _, u in br),
                tuple(res),
            )
        )
    return curves


# ---------------------------------------------------------------------------
# Bogdanov-Takens


def _bt_newton(A, C, M, u, Q, S, iters=50):
    for _ in range(iters):
        g = _g(A, M, u)
        gp = g_prime(_sp(A, C, M, Q), u)
        gpp = _g2(A, M, u)
        F = np.array([Q * (u + C) - g, Q - gp, u * gp - S * (A + u)])
        J = np.array(
            [
                [Q - gp, u + C, 0.0],
                [-gpp, 1.0, 0.0],
                [gp + u * gpp - S, 0.0, -(A + u)],
            ]
        )
        step = np.linalg.solve(J, F)
        u, Q, S = u - step[0], Q - step[1], S - step[2]
        if np.max(np.abs(step)) < 1e-16:
            break
    return float(u), float(Q), float(S)


def bt_points(M: float, A: float, C: float) -> list[BTPoint]:
    """Intersections of the fold lines with the trace-zero set.

    Newton is run on ``(f(u), f'(u), trace/(u + C))`` in ``(u, Q, S)``
    from each fold.  The strong-case relation ``Q = S(1+A+M+G)/(1-A+M+G)``
    and the weak-case relation ``Q = S(M+1+A-W)/(M+1-A-W)`` are checked;
    the residual of the weak relation with W's sign flipped is reported
    alongside.
    """
    out = []
    for qf, uf in fold_values(M, A, C):
        s0 = hopf_value(_sp(A, C, M, qf), uf)
        if s0 <= 0:
            continue
        u, Q, S = _bt_newton(A, C, M, uf, qf, s0)
        if not (0 < u < 1 and Q > 0 and S > 0):
            continue
        sp = _sp(A, C, M, Q, S)
        J = jacobian_scaled(sp, (u, u + C))
        nil = max(abs(np.linalg.det(J)), abs(J[0, 0] + J[1, 1]))
        r3 = (M + 1.0 - A) - 2.0 * u  # the simple root
        if M > 0:
            G = strong_decomposition(sp).G
            rel = S * (1 + A + M + G) / (1 - A + M + G)
            printed = rel
            case = "strong"
        else:
            W = r3
            rel = S * (M + 1 + A - W) / (M + 1 - A - W)
            printed = S * (A + W + M + 1) / (W - A + M + 1)
            case = "weak"
        out.append(
            BTPoint(
                Q=Q,
                S=S,
                equilibrium=PhaseState(u, u + C),
                nilpotency_residual=float(nil),
                relation_residual=abs(Q - rel),
                printed_relation_residual=abs(Q - printed),
                case=case,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Sotomayor


def _reduced(sp: ScaledParams, u: float, v: float, Q: Optional[float] = None) -> np.ndarray:
    # field divided by u(u + C) and by v, nonzero factors at a positive point
    Q = sp.Q if Q is None else Q
    return np.array([_g(sp.A, sp.M, u) - Q * v, sp.S * (u + sp.A) * (u - v + sp.C)])


def sotomayor_transversality(sp: ScaledParams, h: float = 1e-5, tol: float = 1e-8) -> tuple[float, float]:
    """``(w1, w2) = (U . F_Q, U . D^2F(V, V))`` at the fold point.

    ``F`` is the field with the axis factors removed; ``V`` and ``U`` are
    unit right and left null vectors of its Jacobian, oriented with positive
    first component.  Both derivatives are central differences.
    """
    A, C, M, Q = sp.A, sp.C, sp.M, sp.Q
    u = _double_root(A, C, M, Q)
    if not (0 < u < 1) or _fold_residual(A, C, M, Q, u) > tol:
        raise ValueError("parameters are not on a fold with a double root in (0, 1)")
    x = np.array([u, u + C])
    Jr = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        Jr[:, j] = (_reduced(sp, *(x + e)) - _reduced(sp, *(x - e))) / (2 * h)
    _, _, vt = np.linalg.svd(Jr)
    V = vt[-1]
    _, _, vt_t = np.linalg.svd(Jr.T)
    U = vt_t[-1]
    V = V if V[0] > 0 else -V
    U = U if U[0] > 0 else -U
    FQ = (_reduced(sp, *x, Q=Q + h) - _reduced(sp, *x, Q=Q - h)) / (2 * h)
    hh = 1e-4
    D2 = (_reduced(sp, *(x + hh * V)) - 2 * _reduced(sp, *x) + _reduced(sp, *(x - hh * V))) / (hh * hh)
    return float(U @ FQ), float(U @ D2)


# ---------------------------------------------------------------------------
# homoclinic


def _gap_or_none(sp):
    try:
        return manifold_gap(sp)
    except (SectionMiss, ValueError):
        return None


def _bisect_gap(sp, lo, hi, glo, ghi, gap_tol, s_tol):
    g_mid = None
    for _ in range(200):
        # secant step guarded by bisection
        mid = hi - ghi * (hi - lo) / (ghi - glo) if ghi != glo else 0.5 * (lo + hi)
        if not lo + 0.1 * (hi - lo) < mid < hi - 0.1 * (hi - lo):
            mid = 0.5 * (lo + hi)
        g_mid = _gap_or_none(sp.with_(S=mid))
        if g_mid is None:
            raise SectionMiss(f"gap undefined at S={mid:.6g}")
        if abs(g_mid) < gap_tol and hi - lo < s_tol:
            return mid, g_mid
        if (g_mid > 0) == (glo > 0):
            lo, glo = mid, g_mid
        else:
            hi, ghi = mid, g_mid
        if hi - lo < 1e-13:
            return mid, g_mid
    return mid, g_mid


def homoclinic_locus(
    M: float,
    A: float,
    C: float,
    q_range: tuple[float, float],
    n_points: int = 32,
    s_max: float = 1.0,
    gap_tol: float = 1e-5,
    s_tol: float = 1e-6,
) -> BifurcationCurve:
    """S at which the P1 loop closes, for each sampled Q with P1 and P2.

    The search starts just above the Hopf value of P2 (the small unstable
    cycle born there grows into the loop) and reuses the previous Q's
    value as a bracket guess.
    """
    pts, meta, res, gaps = [], [], [], []
    prev = None
    for q in np.linspace(q_range[0], q_range[1], n_points):
        q = float(q)
        sp = _sp(A, C, M, q)
        eqs = {e.name: e for e in equilibria_all(sp)}
        if "P1" not in eqs or "P2" not in eqs or eqs["P1"].label != "saddle":
            prev = None
            continue
        u2 = eqs["P2"].location.u
        s_lo = max(hopf_value(sp, u2), 0.0) * (1 + 1e-3) + 1e-9
        if s_lo >= s_max:
            gaps.append(f"Q={q:.6g}: Hopf value above S search range")
            prev = None
            continue
        bracket = None
        if prev is not None:
            lo, hi = max(s_lo, prev * 0.9), min(s_max, prev * 1.1)
            glo, ghi = _gap_or_none(sp.with_(S=lo)), _gap_or_none(sp.with_(S=hi))
            if glo is not None and ghi is not None and glo > 0 > ghi:
                bracket = (lo, hi, glo, ghi)
        if bracket is None:
            grid = s_lo + (s_max - s_lo) * np.geomspace(1e-4, 1.0, 24)
            last = None
            for s in grid:
                g = _gap_or_none(sp.with_(S=float(s)))
                if g is None:
                    last = None
                    continue
                if last is not None and last[1] > 0 > g:
                    bracket = (last[0], float(s), last[1], g)
                    break
                last = (float(s), g)
        if bracket is None:
            gaps.append(f"Q={q:.6g}: manifold gap keeps one sign")
            prev = None
            continue
        try:
            s_hom, g = _bisect_gap(sp, *bracket, gap_tol, s_tol)
        except SectionMiss as exc:
            gaps.append(f"Q={q:.6g}: {exc}")
            prev = None
            continue
        prev = s_hom
        pts.append((q, s_hom))
        meta.append(eqs["P1"].location)
        res.append(abs(g))
    return BifurcationCurve("homoclinic", tuple(pts), tuple(meta), tuple(res), tuple(gaps))


# ---------------------------------------------------------------------------
# regions


def _strong_id(count, p2_stable, cycle):
    if count == 0:
        return "IV"
    if not p2_stable:
        return "III"
    return "II" if cycle else "I"


def _weak_id(count, p2_stable, cycle):
    if count == 0:
        return "VI"
    if count == 1:
        return "I"
    if count == 3:
        return "V"
    if not p2_stable:
        return "II"
    return "IV" if cycle else "III"


def _signature_id(M, count, p2_stable, cycle):
    return (_strong_id if M > 0 else _weak_id)(count, p2_stable, cycle)


def region_of(Q: float, S: float, M: float, A: float, C: float) -> RegionLabel:
    """Region label from the equilibrium signature and a cycle probe."""
    sp = ScaledParams(A=A, C=C, M=M, Q=Q, S=S)
    eqs = equilibria_all(sp)
    pos = [e for e in eqs if e.kind == "positive"]
    labels = tuple(sorted(e.label for e in pos))
    if any(coarse(e.label) in ("degenerate", "center") or e.multiplicity > 1 for e in eqs):
        return RegionLabel("boundary", (len(pos), labels, False))
    cycle = False
    for e in pos:
        if e.det <= 0:
            continue
        try:
            find_cycle(sp, anchor=e)
            cycle = True
            break
        except (BracketError, NoReturn):
            pass
    named = {e.name: e for e in pos}
    p2 = named.get("P2")
    p2_stable = p2 is not None and coarse(p2.label) == "stable"
    return RegionLabel(_signature_id(M, len(pos), p2_stable, cycle), (len(pos), labels, cycle))


# ---------------------------------------------------------------------------
# diagram


def _interp(curve: BifurcationCurve, q: float) -> Optional[float]:
    pts = sorted(curve.points)
    if not pts or q < pts[0][0] or q > pts[-1][0]:
        return None
    qs = [p[0] for p in pts]
    ss = [p[1] for p in pts]
    return float(np.interp(q, qs, ss))


def diagram(
    M: float,
    A: float,
    C: float,
    q_range: tuple[float, float],
    s_range: tuple[float, float],
    resolution: int = 64,
    homoclinic: bool = True,
    n_homoclinic: Optional[int] = None,
) -> BifurcationDiagram:
    """Curves, BT points and a region raster over a rectangle of (Q, S).

    Raster cells take their equilibrium count and P2 stability from the
    equilibria at the cell centre and their cycle flag from the Hopf and
    homoclinic curves (a cycle exists between them).  Failures of the
    homoclinic shooting are kept as annotated gaps on that curve.
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    if not (0 < q_range[0] < q_range[1] and 0 < s_range[0] < s_range[1]):
        raise ValueError("ranges must be positive and ordered")
    curves: list[BifurcationCurve] = []
    curves += saddle_node_locus(M, A, C, s_range, resolution, q_range)
    qt = transcritical_value(M, A, C)
    if qt is not None and q_range[0] <= qt <= q_range[1]:
        ss = np.linspace(s_range[0], s_range[1], resolution)
        curves.append(
            BifurcationCurve("transcritical", tuple((qt, float(s)) for s in ss),
                             tuple(PhaseState(0.0, C) for _ in ss))
        )
    hopf = [h.clipped(q_range, s_range) for h in hopf_locus(M, A, C, q_range, resolution)]
    curves += [h for h in hopf if len(h)]
    bts = tuple(
        b for b in bt_points(M, A, C)
        if q_range[0] <= b.Q <= q_range[1] and s_range[0] <= b.S <= s_range[1]
    )
    hom = None
    if homoclinic:
        hom = homoclinic_locus(M, A, C, q_range, n_homoclinic or resolution, s_max=s_range[1])
        curves.append(hom.clipped(q_range, s_range))

    q_axis = q_range[0] + (q_range[1] - q_range[0]) * (np.arange(resolution) + 0.5) / resolution
    s_axis = s_range[0] + (s_range[1] - s_range[0]) * (np.arange(resolution) + 0.5) / resolution
    raster = np.empty((resolution, resolution), dtype=object)
    for j, q in enumerate(q_axis):
        sp = _sp(A, C, M, float(q))
        eqs = equilibria_all(sp)
        pos = [e for e in eqs if e.kind == "positive"]
        named = {e.name: e for e in pos}
        s_hom = _interp(hom, float(q)) if hom is not None and len(hom) else None
        for i, s in enumerate(s_axis):
            p2 = named.get("P2")
            s_h = hopf_value(sp, p2.location.u) if p2 is not None else None
            p2_stable = p2 is not None and s > s_h
            cycle = p2_stable and s_hom is not None and s < s_hom
            raster[i, j] = _signature_id(M, len(pos), p2_stable, cycle)
    meta = {
        "case": "strong" if M > 0 else "weak",
        "regions": STRONG_REGIONS if M > 0 else WEAK_REGIONS,
        "cycle_flag": "between the P2 Hopf curve and the homoclinic curve",
        "transcritical_Q": qt,
    }
    return BifurcationDiagram(
        M=M, A=A, C=C,
        q_range=tuple(q_range), s_range=tuple(s_range), resolution=resolution,
        curves=tuple(curves), bt=bts, q_axis=q_axis, s_axis=s_axis, raster=raster,
        metadata=meta,
    )
