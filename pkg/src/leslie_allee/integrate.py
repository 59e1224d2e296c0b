"""Dormand-Prince 5(4) integrator for autonomous planar fields.

The integrator works on plain floats: the state is always ``(u, v)`` and the
right-hand side is a callable ``rhs(u, v) -> (du, dv)``.  For a 2-component
system this is several times faster than array-based general solvers.

Step control is the PI controller of Hairer & Wanner (beta = 0.04) on an
RMS error norm with per-component weights ``max(rtol * |y|, atol)``.
Dense output uses cubic Hermite interpolation between accepted steps;
section crossings are bracketed on the interpolant and then refined with
genuine Runge-Kutta steps from the left end of the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

__all__ = ["Event", "EventHit", "Solution", "IntegrationError", "solve", "rk_step", "hermite"]

# Dormand-Prince tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth minus fourth order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


class IntegrationError(RuntimeError):
    """Raised for step-size underflow; carries the partial solution."""

    def __init__(self, message: str, solution: "Solution"):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class Event:
    """Zero of ``fn(u, v)``.

    ``direction`` +1 counts crossings where ``fn`` rises along the integration
    (in the order steps are taken, so in backward runs this is decreasing
    time), -1 falling ones, 0 both.
    """

    fn: Callable[[float, float], float]
    direction: int = 0
    terminal: bool = False
    accept: Optional[Callable[[float, float], bool]] = None


@dataclass(frozen=True)
class EventHit:
    index: int
    t: float
    u: float
    v: float


@dataclass
class Solution:
    t: list = field(default_factory=list)
    u: list = field(default_factory=list)
    v: list = field(default_factory=list)
    du: list = field(default_factory=list)
    dv: list = field(default_factory=list)
    events: list = field(default_factory=list)
    status: str = "running"
    nfev: int = 0
    nsteps: int = 0
    t_last: float = 0.0
    y_last: tuple = (0.0, 0.0)

    def interpolate(self, t: float) -> tuple[float, float]:
        """Hermite interpolant of the recorded path at time ``t``."""
        ts = self.t
        if len(ts) == 1:
            return self.u[0], self.v[0]
        sgn = 1.0 if ts[-1] >= ts[0] else -1.0
        lo, hi = 0, len(ts) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if sgn * (ts[mid] - t) <= 0:
                lo = mid
            else:
                hi = mid
        return hermite(
            ts[lo], ts[hi], (self.u[lo], self.v[lo]), (self.u[hi], self.v[hi]),
            (self.du[lo], self.dv[lo]), (self.du[hi], self.dv[hi]), t,
        )


def rk_step(rhs, u, v, k1u, k1v, h):
    """One Dormand-Prince step; returns new state, error estimate and f(new)."""
    k2u, k2v = rhs(u + h * _A21 * k1u, v + h * _A21 * k1v)
    k3u, k3v = rhs(u + h * (_A31 * k1u + _A32 * k2u), v + h * (_A31 * k1v + _A32 * k2v))
    k4u, k4v = rhs(
        u + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u),
        v + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v),
    )
    k5u, k5v = rhs(
        u + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u),
        v + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v),
    )
    k6u, k6v = rhs(
        u + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u),
        v + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v),
    )
    un = u + h * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
    vn = v + h * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
    k7u, k7v = rhs(un, vn)
    eu = h * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
    ev = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
    return un, vn, eu, ev, k7u, k7v


def hermite(t0, t1, y0, y1, f0, f1, t):
    h = t1 - t0
    if h == 0:
        return y0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return (
        h00 * y0[0] + h10 * h * f0[0] + h01 * y1[0] + h11 * h * f1[0],
        h00 * y0[1] + h10 * h * f0[1] + h01 * y1[1] + h11 * h * f1[1],
    )


def _locate(rhs, ev: Event, t0, y0, f0, t1, y1, f1, g0, g1):
    """Crossing time and state of ``ev`` inside an accepted step."""
    fn = ev.fn
    a, b = 0.0, 1.0
    ga, gb = g0, g1
    h = t1 - t0
    # bisection with a secant guess on the Hermite interpolant
    for _ in range(60):
        s = a - ga * (b - a) / (gb - ga) if gb != ga else 0.5 * (a + b)
        if not (a < s < b) or (b - a) > 0.25:
            s = 0.5 * (a + b)
        y = hermite(0.0, 1.0, y0, y1, (f0[0] * h, f0[1] * h), (f1[0] * h, f1[1] * h), s)
        gs = fn(*y)
        if gs == 0.0:
            a = b = s
            break
        if (gs > 0) == (ga > 0):
            a, ga = s, gs
        else:
            b, gb = s, gs
        if b - a < 1e-15:
            break
    s = 0.5 * (a + b)
    # polish with true RK steps from the left end (secant on the step length)
    def g_of(sv):
        un, vn, _, _, _, _ = rk_step(rhs, y0[0], y0[1], f0[0], f0[1], sv * h)
        return fn(un, vn), un, vn

    s_prev, g_prev = s, None
    gcur, uc, vc = g_of(s)
    for _ in range(6):
        if gcur == 0.0:
            break
        # derivative of the event function along the flow
        du, dv = rhs(uc, vc)
        eps = 1e-7
        gn = fn(uc + eps * du, vc + eps * dv)
        dg = (gn - gcur) / eps
        if dg == 0.0:
            break
        s_new = s - gcur / (dg * h)
        if not (0.0 <= s_new <= 1.0):
            break
        s_prev, g_prev = s, gcur
        s = s_new
        gcur, uc, vc = g_of(s)
        if abs(s - s_prev) < 1e-15:
            break
    return t0 + s * h, uc, vc


def solve(
    rhs: Callable[[float, float], tuple[float, float]],
    y0: Sequence[float],
    t_end: float,
    rtol: float = 1e-9,
    atol: float = 1e-14,
    events: Sequence[Event] = (),
    stop: Optional[Callable[[float, float, float, float, float], Optional[str]]] = None,
    h0: Optional[float] = None,
    h_max: Optional[float] = None,
    max_steps: int = 2_000_000,
    record: bool = True,
    clamp: bool = True,
) -> Solution:
    """Integrate from ``t = 0`` to ``t_end`` (negative for backward time).

    ``stop(t, u, v, du, dv)`` may return a status string to end early.
    Terminal events end the run with status ``"event"``.
    """
    direction = 1.0 if t_end >= 0 else -1.0
    t_end = float(t_end)
    u, v = float(y0[0]), float(y0[1])
    fu, fv = rhs(u, v)
    sol = Solution(nfev=1, y_last=(u, v))
    if record:
        sol.t.append(0.0)
        sol.u.append(u)
        sol.v.append(v)
        sol.du.append(fu)
        sol.dv.append(fv)
    if stop is not None:
        st = stop(0.0, u, v, fu, fv)
        if st:
            sol.status = st
            return sol
    if t_end == 0.0:
        sol.status = "done"
        return sol
    h_max = abs(t_end) if h_max is None else h_max
    if h0 is None:
        sc0 = max(math.hypot(u, v) * rtol, atol)
        d0 = math.hypot(u, v) / max(sc0, 1e-300)
        d1 = math.hypot(fu, fv) / max(sc0, 1e-300)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, h_max, abs(t_end))
    h = direction * abs(h0)
    t = 0.0
    err_old = 1e-4
    gvals = [e.fn(u, v) for e in events]
    rejected = False
    while True:
        if sol.nsteps >= max_steps:
            sol.status = "max-steps"
            return sol
        if direction * (t + h - t_end) > 0:
            h = t_end - t
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            sol.status = "step-underflow"
            raise IntegrationError(f"step size underflow at t={t:.6g}", sol)
        un, vn, eu, ev_, k7u, k7v = rk_step(rhs, u, v, fu, fv, h)
        sol.nfev += 6
        wu = max(rtol * max(abs(u), abs(un)), atol)
        wv = max(rtol * max(abs(v), abs(vn)), atol)
        try:
            err = math.sqrt(0.5 * ((eu / wu) ** 2 + (ev_ / wv) ** 2))
        except OverflowError:
            err = math.inf
        if not math.isfinite(err):
            h *= 0.1
            rejected = True
            continue
        if err <= 1.0:
            err = max(err, 1e-10)
            fac = 0.9 * err ** -0.17 * err_old**0.04
            fac = min(5.0, max(0.2, fac))
            if rejected:
                fac = min(1.0, fac)
            err_old = err
            rejected = False
            if clamp:
                if -1e-12 < un < 0.0:
                    un = 0.0
                if -1e-12 < vn < 0.0:
                    vn = 0.0
            t_new = t + h
            sol.nsteps += 1
            # events
            hit_terminal = None
            for i, e in enumerate(events):
                g1 = e.fn(un, vn)
                g0 = gvals[i]
                crossed = (g0 < 0 <= g1) if e.direction > 0 else (
                    (g0 > 0 >= g1) if e.direction < 0 else (g0 < 0 <= g1 or g0 > 0 >= g1)
                )
                gvals[i] = g1
                if crossed and g0 != 0.0:
                    tc, uc, vc = _locate(rhs, e, t, (u, v), (fu, fv), t_new, (un, vn), (k7u, k7v), g0, g1)
                    if e.accept is None or e.accept(uc, vc):
                        hit = EventHit(i, tc, uc, vc)
                        sol.events.append(hit)
                        if e.terminal and hit_terminal is None:
                            hit_terminal = hit
            if hit_terminal is not None:
                if record:
                    du_, dv_ = rhs(hit_terminal.u, hit_terminal.v)
                    sol.t.append(hit_terminal.t)
                    sol.u.append(hit_terminal.u)
                    sol.v.append(hit_terminal.v)
                    sol.du.append(du_)
                    sol.dv.append(dv_)
                sol.status = "event"
                sol.t_last, sol.y_last = hit_terminal.t, (hit_terminal.u, hit_terminal.v)
                return sol
            t, u, v, fu, fv = t_new, un, vn, k7u, k7v
            sol.t_last, sol.y_last = t, (u, v)
            if record:
                sol.t.append(t)
                sol.u.append(u)
                sol.v.append(v)
                sol.du.append(fu)
                sol.dv.append(fv)
            if stop is not None:
                st = stop(t, u, v, fu, fv)
                if st:
                    sol.status = st
                    return sol
            if direction * (t - t_end) >= 0:
                sol.status = "done"
                return sol
            h = direction * min(abs(h) * fac, h_max)
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
            h *= fac
            rejected = True
