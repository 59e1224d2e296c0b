"""Trajectories, limit cycles and invariant manifolds of the scaled system."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from matplotlib.path import Path
from scipy.optimize import brentq

from .equilibria import EquilibriumRecord, coarse, equilibria_all, positive_roots
from .integrate import Event, IntegrationError, Solution, hermite, solve
from .model import BoundsRecord, PhaseState, ScaledParams, f_scaled_fast, jacobian_scaled

__all__ = [
    "Trajectory",
    "LimitCycle",
    "ManifoldBranch",
    "BasinMap",
    "BoundsReport",
    "NoReturn",
    "BracketError",
    "SectionMiss",
    "integrate",
    "omega_limit",
    "poincare_return",
    "find_cycle",
    "cycle_anchor",
    "manifold",
    "manifold_gap",
    "heteroclinic_event",
    "basin_grid",
    "verify_bounds",
    "center_manifold_probe",
]

T_MAX = 5e4
BRANCHES = ("stable-left", "stable-right", "unstable-left", "unstable-right")


class NoReturn(RuntimeError):
    """The orbit did not come back to the section."""


class BracketError(RuntimeError):
    """No sign change of the displacement function was found."""


class SectionMiss(RuntimeError):
    """A manifold branch ended before reaching the measuring section."""


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    terminal: str
    stats: dict

    @property
    def samples(self) -> list[tuple[float, PhaseState]]:
        return [(float(a), PhaseState(float(b), float(c))) for a, b, c in zip(self.t, self.u, self.v)]

    @property
    def end(self) -> PhaseState:
        return PhaseState(float(self.u[-1]), float(self.v[-1]))


@dataclass(frozen=True)
class LimitCycle:
    points: np.ndarray
    period: float
    floquet: float
    stability: str
    anchor: str
    offset: float
    floquet_div: float
    enclosed: tuple[str, ...]


@dataclass(frozen=True)
class ManifoldBranch:
    saddle: EquilibriumRecord
    which: str
    polyline: np.ndarray
    arclength: float
    terminal: str


@dataclass(frozen=True)
class BasinMap:
    u_range: tuple[float, float]
    v_range: tuple[float, float]
    shape: tuple[int, int]
    labels: np.ndarray  # shape (nv, nu), row 0 at the lowest v

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        nu, nv = self.shape
        du = (self.u_range[1] - self.u_range[0]) / nu
        dv = (self.v_range[1] - self.v_range[0]) / nv
        uc = self.u_range[0] + du * (np.arange(nu) + 0.5)
        vc = self.v_range[0] + dv * (np.arange(nv) + 0.5)
        return uc, vc


@dataclass(frozen=True)
class BoundsReport:
    passed: bool
    max_u: float
    max_v: float
    max_w: float
    window_span: float
    checks: dict


def _stats(u, v) -> dict:
    u = np.asarray(u)
    v = np.asarray(v)
    return {"max_u": float(u.max()), "max_v": float(v.max()), "max_w": float((u + v).max())}


def _in_domain(u: float, v: float) -> bool:
    return u >= -1e-12 and v >= -1e-12 and u < 50.0 and v < 50.0


def integrate(
    sp: ScaledParams,
    s0: PhaseState,
    t_max: float = T_MAX,
    tol: float = 1e-9,
    capture: float = 1e-8,
    cycle_check: bool = True,
    eqs: Optional[Sequence[EquilibriumRecord]] = None,
) -> Trajectory:
    """Adaptive integration with early termination.

    Ends on convergence (``|f| < 1e-10`` within ``capture`` of an
    equilibrium), on leaving the quadrant, on three near-equal returns to a
    nullcline section around a focus, or at ``t_max``.
    """
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError(f"tol must lie in [1e-12, 1e-4], got {tol!r}")
    u0, v0 = float(s0[0]), float(s0[1])
    if u0 < 0 or v0 < 0:
        raise ValueError("initial state must lie in the first quadrant")
    if eqs is None:
        eqs = equilibria_all(sp)
    locs = [(e.location.u, e.location.v, e.name) for e in eqs]
    rhs = f_scaled_fast(sp)
    C = sp.C

    events = []
    returns: list[list[float]] = []
    if cycle_check:
        roots = [r for r, _ in positive_roots(sp)]
        for k, e in enumerate(eqs):
            if e.kind != "positive" or e.det <= 0:
                continue
            ue = e.location.u
            nxt = min([r for r in roots if r > ue + 1e-12] + [1.0])
            bucket: list[float] = []
            returns.append(bucket)

            def accept(u, v, ue=ue, nxt=nxt, bucket=bucket):
                if ue < u < nxt:
                    bucket.append(u - ue)
                    return True
                return False

            events.append(Event(lambda u, v: v - u - C, direction=1, accept=accept))

    def stop(t, u, v, du, dv):
        if not _in_domain(u, v):
            return "left-domain"
        if du * du + dv * dv < 1e-20:
            for eu, ev, name in locs:
                if abs(u - eu) < capture and abs(v - ev) < capture:
                    return f"converged-to:{name}"
        for b in returns:
            if len(b) >= 4:
                d1, d2, d3, d4 = b[-4:]
                if d4 > 1e-4 and abs(d2 - d1) < 1e-6 and abs(d3 - d2) < 1e-6 and abs(d4 - d3) < 1e-6:
                    return "cycle-suspected"
        return None

    try:
        sol = solve(rhs, (u0, v0), t_max, rtol=tol, events=events, stop=stop)
        status = sol.status
    except IntegrationError as exc:
        sol = exc.solution
        status = "integration-failure"
    terminal = status if status not in ("done", "max-steps") else "time-exhausted"
    return Trajectory(
        t=np.asarray(sol.t),
        u=np.asarray(sol.u),
        v=np.asarray(sol.v),
        terminal=terminal,
        stats=_stats(sol.u, sol.v),
    )


def omega_limit(
    sp: ScaledParams,
    s0: PhaseState,
    t_max: float = T_MAX,
    tol: float = 1e-8,
    capture: float = 1e-6,
    eqs: Optional[Sequence[EquilibriumRecord]] = None,
) -> str:
    """Name of the attracting equilibrium, ``"cycle"`` or ``"undetermined"``.

    Near a hyperbolic sink the run stops once within ``capture`` of it;
    any other equilibrium must be reached to within 1e-8.
    """
    if eqs is None:
        eqs = equilibria_all(sp)
    sinks = [(e.location.u, e.location.v, e.name) for e in eqs if coarse(e.label) == "stable"]
    others = [(e.location.u, e.location.v, e.name) for e in eqs]
    for eu, ev, name in others:
        if s0[0] == eu and s0[1] == ev:
            return name
    rhs = f_scaled_fast(sp)
    C = sp.C
    roots = [r for r, _ in positive_roots(sp)]
    returns: list[list[float]] = []
    events = []
    for e in eqs:
        if e.kind != "positive" or e.det <= 0:
            continue
        ue = e.location.u
        nxt = min([r for r in roots if r > ue + 1e-12] + [1.0])
        bucket: list[float] = []
        returns.append(bucket)

        def accept(u, v, ue=ue, nxt=nxt, bucket=bucket):
            if ue < u < nxt:
                bucket.append(u - ue)
                return True
            return False

        events.append(Event(lambda u, v: v - u - C, direction=1, accept=accept))

    def stop(t, u, v, du, dv):
        if not _in_domain(u, v):
            return "left-domain"
        for eu, ev, name in sinks:
            if (u - eu) ** 2 + (v - ev) ** 2 < capture * capture:
                return name
        if du * du + dv * dv < 1e-20:
            for eu, ev, name in others:
                if abs(u - eu) < 1e-8 and abs(v - ev) < 1e-8:
                    return name
        for b in returns:
            if len(b) >= 4:
                d = b[-4:]
                if d[-1] > 1e-4 and max(abs(d[i + 1] - d[i]) for i in range(3)) < 1e-6:
                    return "cycle"
        return None

    try:
        sol = solve(rhs, (float(s0[0]), float(s0[1])), t_max, rtol=tol, events=events, stop=stop, record=False)
    except IntegrationError:
        return "undetermined"
    if sol.status in ("done", "max-steps", "left-domain"):
        return "undetermined"
    return sol.status


# ---------------------------------------------------------------------------
# return map on the predator nullcline


def cycle_anchor(sp: ScaledParams, eqs: Optional[Sequence[EquilibriumRecord]] = None) -> EquilibriumRecord:
    """The antisaddle a cycle would surround: P2 if present, else W."""
    if eqs is None:
        eqs = equilibria_all(sp)
    cands = [e for e in eqs if e.kind == "positive" and e.det > 0 and e.multiplicity == 1]
    if not cands:
        raise BracketError("no positive antisaddle to anchor a cycle")
    named = {e.name: e for e in cands}
    return named.get("P2") or named.get("W") or cands[-1]


def _return(sp, u0, d, time_dir=1, tol=1e-11, t_max=2e4, record=False):
    """Next crossing of the ray ``v = u + C, u > u0`` from offset ``d``."""
    C = sp.C
    rhs = f_scaled_fast(sp)
    roots = [r for r, _ in positive_roots(sp)]
    u_right = min([r for r in roots if r > u0 + 1e-12] + [1.0])
    others = [(e.location.u, e.location.v) for e in equilibria_all(sp)
              if abs(e.location.u - u0) > 1e-12 or abs(e.location.v - u0 - C) > 1e-12]
    if not 0 < d < u_right - u0:
        raise ValueError(f"offset {d!r} outside the section ({0}, {u_right - u0})")
    away = [False]  # ignore the start point, which lies on the section
    ev = Event(lambda u, v: v - u - C, direction=1 if time_dir > 0 else -1, terminal=True,
               accept=lambda u, v: away[0] and u0 < u < u_right)

    def stop(t, u, v, du, dv):
        if not away[0] and abs(v - u - C) > 1e-3 * d:
            away[0] = True
        if u < 0 or u > 1.0 + 1e-9 or v < 0 or v > 10.0:
            return "escaped"
        for eu, ev_ in others:
            if abs(u - eu) < 1e-6 and abs(v - ev_) < 1e-6:
                return "escaped"
        if abs(u - u0) < 1e-12 and abs(v - u0 - C) < 1e-12:
            return "converged"
        return None

    s0 = (u0 + d, u0 + d + C)
    sol = solve(rhs, s0, time_dir * t_max, rtol=tol, atol=1e-15, events=[ev], stop=stop, record=record)
    if sol.status != "event":
        raise NoReturn(f"no return from offset {d:.6g} ({sol.status})")
    hit = sol.events[-1]
    return hit.u - u0, abs(hit.t), sol


def poincare_return(
    sp: ScaledParams,
    u0: float,
    d: float,
    time_dir: int = 1,
    tol: float = 1e-12,
    eps: float = 1e-7,
) -> tuple[float, float]:
    """Return offset and central-difference slope of the return map.

    The section is the predator nullcline to the right of the antisaddle at
    ``u0``, where ``du/dtau < 0`` so every crossing is transversal.
    """
    d_next, _, _ = _return(sp, u0, d, time_dir, tol)
    h = min(eps, 0.5 * d)
    dp, _, _ = _return(sp, u0, d + h, time_dir, tol)
    dm, _, _ = _return(sp, u0, d - h, time_dir, tol)
    return d_next, (dp - dm) / (2 * h)


def _divergence(sp: ScaledParams):
    A, C, M, Q, S = sp.A, sp.C, sp.M, sp.Q, sp.S

    def div(u, v):
        J = jacobian_scaled(sp, (u, v))
        return J[0, 0] + J[1, 1]

    return div


def _floquet_div(sp: ScaledParams, sol: Solution) -> float:
    """``exp`` of the divergence integral over one period (Simpson per step)."""
    div = _divergence(sp)
    total = 0.0
    for i in range(len(sol.t) - 1):
        t0, t1 = sol.t[i], sol.t[i + 1]
        y0 = (sol.u[i], sol.v[i])
        y1 = (sol.u[i + 1], sol.v[i + 1])
        f0 = (sol.du[i], sol.dv[i])
        f1 = (sol.du[i + 1], sol.dv[i + 1])
        ym = hermite(t0, t1, y0, y1, f0, f1, 0.5 * (t0 + t1))
        total += (t1 - t0) / 6.0 * (div(*y0) + 4 * div(*ym) + div(*y1))
    return math.exp(total)


def _scan(disp, grid, depth):
    """First sign change of ``disp`` along ``grid``.

    When a valid value is followed by a missing return the interval is
    subdivided, since the returning set can end just past a cycle.
    """
    prev = None
    for d in grid:
        d = float(d)
        try:
            val = disp(d)
        except NoReturn:
            if prev is not None and depth > 0:
                sub = _scan(disp, list(np.linspace(prev[0], d, 12)[:-1]), depth - 1)
                if sub is not None:
                    return sub
            prev = None
            continue
        if prev is not None and (prev[1] > 0) != (val > 0):
            return (prev[0], d)
        prev = (d, val)
    return None


def find_cycle(
    sp: ScaledParams,
    bracket: Optional[tuple[float, float]] = None,
    anchor: Optional[EquilibriumRecord] = None,
    time_dir: Optional[int] = None,
    xtol: float = 1e-12,
    n_scan: int = 40,
) -> LimitCycle:
    """Locate a limit cycle around ``anchor`` as a fixed point of the return map.

    Without a bracket the displacement ``R(d) - d`` is scanned on a
    geometric grid of offsets.  The scan runs in backward time around a
    stable antisaddle (where a surrounding cycle must be repelling) and in
    forward time around an unstable one.
    """
    eqs = equilibria_all(sp)
    if anchor is None:
        anchor = cycle_anchor(sp, eqs)
    u0 = anchor.location.u
    if time_dir is None:
        time_dir = -1 if anchor.trace < 0 else 1
    roots = [r for r, _ in positive_roots(sp)]
    u_right = min([r for r in roots if r > u0 + 1e-12] + [1.0])

    def disp(d):
        return _return(sp, u0, d, time_dir)[0] - d

    if bracket is None:
        span = u_right - u0
        bracket = _scan(disp, list(np.geomspace(1e-5 * span, 0.999 * span, n_scan)), depth=3)
        if bracket is None:
            raise BracketError("return-map displacement keeps one sign; no cycle found")
    lo, hi = bracket
    try:
        flo, fhi = disp(lo), disp(hi)
    except NoReturn as exc:
        raise BracketError(str(exc)) from exc
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on bracket {bracket}")
    d_star = brentq(disp, lo, hi, xtol=xtol, rtol=1e-15, maxiter=200)

    # one forward period from the fixed point
    _, period, sol = _return(sp, u0, d_star, 1, tol=1e-12, record=True)
    pts = np.column_stack([sol.u, sol.v])
    pts[-1] = pts[0]
    # differentiate the map in the search direction, where neighbours still return
    # (forward orbits just outside a cycle near a homoclinic loop escape)
    eps = min(1e-7, 0.25 * d_star, 0.25 * (u_right - u0 - d_star))
    dp, _, _ = _return(sp, u0, d_star + eps, time_dir, tol=1e-12)
    dm, _, _ = _return(sp, u0, d_star - eps, time_dir, tol=1e-12)
    slope = (dp - dm) / (2 * eps)
    floquet = slope if time_dir > 0 else 1.0 / slope
    fdiv = _floquet_div(sp, sol)
    path = Path(pts)
    enclosed = tuple(e.name for e in eqs if path.contains_point((e.location.u, e.location.v)))
    return LimitCycle(
        points=pts,
        period=float(period),
        floquet=float(floquet),
        stability="stable" if abs(floquet) < 1 else "unstable",
        anchor=anchor.name,
        offset=float(d_star),
        floquet_div=float(fdiv),
        enclosed=enclosed,
    )


# ---------------------------------------------------------------------------
# invariant manifolds


def _eig_dirs(sp: ScaledParams, saddle: EquilibriumRecord):
    J = jacobian_scaled(sp, saddle.location)
    w, V = np.linalg.eig(J)
    if np.iscomplexobj(w) and np.any(np.abs(np.imag(w)) > 0):
        raise ValueError("not a saddle: complex eigenvalues")
    w = np.real(w)
    V = np.real(V)
    if not (w.min() < 0 < w.max()):
        raise ValueError(f"not a saddle: eigenvalues {w}")
    s = V[:, int(np.argmin(w))]
    u = V[:, int(np.argmax(w))]
    return s / np.linalg.norm(s), u / np.linalg.norm(u), float(w.min()), float(w.max())


def _branch_seed(sp, saddle, which, seed):
    if which not in BRANCHES:
        raise ValueError(f"unknown branch {which!r}")
    if saddle.label != "saddle":
        raise ValueError(f"{saddle.name or saddle.location} is not a saddle ({saddle.label})")
    vs, vu, _, _ = _eig_dirs(sp, saddle)
    vec = vs if which.startswith("stable") else vu
    if vec[0] == 0:
        vec = vec if vec[1] > 0 else -vec
    want_right = which.endswith("right")
    if (vec[0] > 0) != want_right:
        vec = -vec
    time_dir = -1 if which.startswith("stable") else 1
    p = saddle.location
    return (p.u + seed * vec[0], p.v + seed * vec[1]), vec, time_dir


def _trace_branch(sp, saddle, which, arc_max, seed, tol, events=(), t_max=T_MAX, record=True):
    start, vec, time_dir = _branch_seed(sp, saddle, which, seed)
    rhs = f_scaled_fast(sp)
    eqs = equilibria_all(sp)
    locs = [(e.location.u, e.location.v, e.name) for e in eqs]
    state = {"arc": 0.0, "prev": start}

    def stop(t, u, v, du, dv):
        pu, pv = state["prev"]
        state["arc"] += math.hypot(u - pu, v - pv)
        state["prev"] = (u, v)
        if u < -1e-12 or v < -1e-12 or u > 1.5 or v > 5.0 * (1 + sp.C):
            return "left-domain"
        if state["arc"] >= arc_max:
            return "arc-max"
        if du * du + dv * dv < 1e-22:
            for eu, ev, name in locs:
                if abs(u - eu) < 1e-7 and abs(v - ev) < 1e-7:
                    return f"converged-to:{name}"
        return None

    # trial stages of rejected steps may overflow far outside the quadrant
    with np.errstate(over="ignore", invalid="ignore"):
        sol = solve(rhs, start, time_dir * t_max, rtol=tol, atol=1e-15, events=events, stop=stop,
                    record=record, h_max=0.5 if record else None)
    return sol, state["arc"]


def _resample(sol: Solution, ds: float) -> np.ndarray:
    pts = [(sol.u[0], sol.v[0])]
    for i in range(len(sol.t) - 1):
        y0 = (sol.u[i], sol.v[i])
        y1 = (sol.u[i + 1], sol.v[i + 1])
        seg = math.hypot(y1[0] - y0[0], y1[1] - y0[1])
        n = int(seg / ds)
        for k in range(1, n + 1):
            t = sol.t[i] + (sol.t[i + 1] - sol.t[i]) * k / (n + 1)
            pts.append(hermite(sol.t[i], sol.t[i + 1], y0, y1, (sol.du[i], sol.dv[i]),
                               (sol.du[i + 1], sol.dv[i + 1]), t))
        last = pts[-1]
        if math.hypot(y1[0] - last[0], y1[1] - last[1]) >= 0.25 * ds or i == len(sol.t) - 2:
            pts.append(y1)
    return np.asarray(pts)


def manifold(
    sp: ScaledParams,
    saddle: EquilibriumRecord,
    which: str,
    arc_max: float = 3.0,
    seed: float = 1e-6,
    tol: float = 1e-10,
    ds: float = 2e-3,
) -> ManifoldBranch:
    """Trace one branch of a saddle's stable or unstable manifold.

    Branches: ``stable-left`` and ``stable-right`` are traced backward in
    time, ``unstable-left`` and ``unstable-right`` forward; left/right is
    the sign of the u-component of the seeding eigenvector.
    """
    sol, arc = _trace_branch(sp, saddle, which, arc_max, seed, tol)
    poly = np.vstack([[saddle.location.u, saddle.location.v], _resample(sol, ds)])
    status = sol.status if sol.status not in ("done", "max-steps") else "time-exhausted"
    return ManifoldBranch(saddle=saddle, which=which, polyline=poly, arclength=float(arc), terminal=status)


def _first_crossing(sp, saddle, which, ev: Event, seed, tol, arc_max=20.0):
    sol, _ = _trace_branch(sp, saddle, which, arc_max, seed, tol, events=[ev], record=False)
    if sol.status != "event":
        raise SectionMiss(f"{which} branch of {saddle.name} ended ({sol.status}) before the section")
    return sol.events[-1]


def manifold_gap(sp: ScaledParams, seed: float = 1e-6, tol: float = 1e-11) -> float:
    """Signed splitting of the P1 loop on the nullcline ray right of P2.

    The unstable branch leaving P1 to the right and the stable branch
    arriving at P1 from the right are followed (forward and backward) to
    their first crossing of ``v = u + C`` with ``u > u2``.  The result is
    the difference of the two crossing abscissae, positive when the
    unstable branch lands farther from P2.
    """
    eqs = {e.name: e for e in equilibria_all(sp)}
    if "P1" not in eqs or "P2" not in eqs:
        raise ValueError("manifold gap needs both P1 and P2")
    p1, p2 = eqs["P1"], eqs["P2"]
    u2 = p2.location.u
    C = sp.C
    ev = Event(lambda u, v: v - u - C, direction=0, terminal=True, accept=lambda u, v: u2 < u < 1.0)
    hu = _first_crossing(sp, p1, "unstable-right", ev, seed, tol)
    hs = _first_crossing(sp, p1, "stable-right", ev, seed, tol)
    return hu.u - hs.u


def heteroclinic_event(
    sp: ScaledParams,
    seed: float = 1e-6,
    tol: float = 1e-11,
    u_section: Optional[float] = None,
) -> float:
    """Signed gap between the left unstable branch of (1,0) and the separatrix Σ.

    Σ is the stable branch of P1 whose α-limit switches between the
    interior of the invariant region and its exterior; it reaches P1 from
    the right, passing over P2.  Both curves are cut by the vertical line
    ``u = u_section`` (default a tenth of the way from P2 to 1, close
    enough to P2 that Σ reaches it before turning back) and the value is
    ``v_unstable - v_separatrix``: negative when Σ lies above.
    """
    eqs = {e.name: e for e in equilibria_all(sp)}
    if "P1" not in eqs:
        raise ValueError("heteroclinic gap needs P1")
    p1, k = eqs["P1"], eqs["(1,0)"]
    if u_section is None:
        ref = eqs["P2"].location.u if "P2" in eqs else p1.location.u
        u_section = ref + 0.1 * (1.0 - ref)
    if not p1.location.u < u_section < 1.0:
        raise ValueError("section must lie between P1 and the carrying capacity")
    ev = Event(lambda u, v: u - u_section, direction=0, terminal=True)
    hu = _first_crossing(sp, k, "unstable-left", ev, seed, tol)
    hs = _first_crossing(sp, p1, "stable-right", ev, seed, tol)
    return hu.v - hs.v


# ---------------------------------------------------------------------------
# basins and bounds


def _basin_row(args):
    sp, uc, v, t_max, eqs = args
    return [omega_limit(sp, PhaseState(float(u), float(v)), t_max=t_max, eqs=eqs) for u in uc]


def basin_grid(
    sp: ScaledParams,
    u_range: tuple[float, float] = (0.0, 1.2),
    v_range: Optional[tuple[float, float]] = None,
    shape: tuple[int, int] = (50, 50),
    t_max: float = 1e4,
    workers: Optional[int] = None,
) -> BasinMap:
    """ω-limit label of every cell centre of a regular grid."""
    if v_range is None:
        v_range = (0.0, 1.5 * (1 + sp.C))
    if not (0 <= u_range[0] < u_range[1] <= 1.2 and 0 <= v_range[0] < v_range[1] <= 1.5 * (1 + sp.C) + 1e-12):
        raise ValueError("grid must lie within [0, 1.2] x [0, 1.5 (1 + C)]")
    nu, nv = shape
    eqs = equilibria_all(sp)
    bm = BasinMap(tuple(u_range), tuple(v_range), (nu, nv), np.empty((nv, nu), dtype=object))
    uc, vc = bm.centers()
    jobs = [(sp, uc, float(v), t_max, eqs) for v in vc]
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_basin_row, jobs))
    else:
        rows = [_basin_row(j) for j in jobs]
    labels = np.array(rows, dtype=object)
    return BasinMap(tuple(u_range), tuple(v_range), (nu, nv), labels)


def verify_bounds(tr: Trajectory, b: BoundsRecord, slack: float = 1e-6) -> BoundsReport:
    """Check the eventual caps on u, v and u + v over the last 20% of samples."""
    n = len(tr.t)
    k = int(math.floor(0.8 * n)) if n > 1 else 0
    u = tr.u[k:]
    v = tr.v[k:]
    span = float(tr.t[-1] - tr.t[k]) if n > 1 else 0.0
    mu, mv, mw = float(u.max()), float(v.max()), float((u + v).max())
    checks = {
        "u": mu <= b.u_cap + slack,
        "v": mv <= b.v_cap + slack,
        "w": mw <= b.theta + slack,
    }
    return BoundsReport(all(checks.values()), mu, mv, mw, span, checks)


# ---------------------------------------------------------------------------
# slow approach to a non-hyperbolic (0, C)


def center_manifold_probe(
    sp: ScaledParams,
    flow: Sequence[float],
    x0: float = 1e-3,
    t_end: float = 2e4,
    tol: float = 1e-12,
) -> dict:
    """Compare the full flow near ``(0, C)`` with a reduced 1-d flow.

    ``flow`` holds the coefficients of ``dX/dtau = sum flow[k-2] X**k``.
    The full system is started on the center direction at ``u = x0`` and
    the reduced equation from the same ``X``; both are integrated to
    ``t_end`` and the final prey densities returned with their ratio.
    """
    rhs = f_scaled_fast(sp)
    full = solve(rhs, (x0, sp.C + x0), t_end, rtol=tol, record=True)
    coeffs = list(flow)

    def red(x, _):
        return sum(c * x ** (k + 2) for k, c in enumerate(coeffs)), 0.0

    reduced = solve(red, (x0, 0.0), t_end, rtol=tol, atol=1e-300, record=False)
    uf = full.y_last[0]
    ur = reduced.y_last[0]
    monotone = bool(np.all(np.diff(np.asarray(full.u)[len(full.u) // 10:]) <= 1e-15))
    return {"u_full": uf, "u_reduced": ur, "ratio": uf / ur, "monotone": monotone}
