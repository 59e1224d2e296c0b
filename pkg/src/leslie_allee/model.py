"""Vector fields, parameter rescaling and a-priori bounds.

Two parametrisations of the same predator-prey system are supported:

* the biological one, ``OriginalParams`` (r, K, q, a, s, n, m, c), with
  vector field :func:`f_original` in (x, y);
* the rescaled one, ``ScaledParams`` (A, C, M, Q, S), with polynomial
  vector field :func:`f_scaled` in (u, v).

The two are orbitally equivalent on the first quadrant through
``x = K u``, ``y = n K v`` and a positive change of time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "OriginalParams",
    "ScaledParams",
    "PhaseState",
    "BoundsRecord",
    "rescale",
    "map_to_original",
    "time_scale_factor",
    "f_scaled",
    "f_scaled_fast",
    "f_original",
    "jacobian_scaled",
    "du_coefficients",
    "theta_bound",
    "orbit_hausdorff",
]


@dataclass(frozen=True)
class OriginalParams:
    """Biological parameters of the Allee/generalist-predator model."""

    r: float
    K: float
    q: float
    a: float
    s: float
    n: float
    m: float
    c: float

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if not math.isfinite(val):
                raise ValueError(f"{f.name} must be finite, got {val!r}")
        for name in ("r", "K", "q", "a", "s", "n", "c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.a >= self.K:
            raise ValueError(f"need a < K, got a={self.a!r}, K={self.K!r}")
        if self.m == 0:
            raise ValueError("m = 0 is not supported")
        if self.m >= self.K:
            raise ValueError(f"need m < K, got m={self.m!r}, K={self.K!r}")


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless parameters ``A=a/K, C=c/(Kn), M=m/K, Q=nq/(rK), S=s/(rK)``."""

    A: float
    C: float
    M: float
    Q: float
    S: float

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if not math.isfinite(val):
                raise ValueError(f"{f.name} must be finite, got {val!r}")
        if not 0 < self.A < 1:
            raise ValueError(f"need 0 < A < 1, got {self.A!r}")
        for name in ("C", "Q", "S"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not -1 < self.M < 1 or self.M == 0:
            raise ValueError(f"need -1 < M < 1 and M != 0, got {self.M!r}")

    @property
    def strong(self) -> bool:
        """True for a strong Allee effect (M > 0)."""
        return self.M > 0

    def with_(self, **changes) -> "ScaledParams":
        return replace(self, **changes)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.A, self.C, self.M, self.Q, self.S)


class PhaseState(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class BoundsRecord:
    theta: float
    u_cap: float
    v_cap: float


def rescale(p: OriginalParams) -> ScaledParams:
    K, n, r = p.K, p.n, p.r
    return ScaledParams(
        A=p.a / K,
        C=p.c / (K * n),
        M=p.m / K,
        Q=n * p.q / (r * K),
        S=p.s / (r * K),
    )


def map_to_original(p: OriginalParams, s: PhaseState) -> tuple[float, float]:
    """Image of a scaled state in (x, y) coordinates."""
    return (p.K * s[0], p.n * p.K * s[1])


def time_scale_factor(p: OriginalParams, s: PhaseState) -> float:
    """``dtau/dt`` along the orbit through ``s``.

    Dividing the biological field (in u, v coordinates) by
    ``(u + A)(u + C) / (r K)`` yields the polynomial field, so
    ``dtau/dt = r K / ((u + A)(u + C))``, positive on the closed quadrant.
    """
    u = s[0]
    A = p.a / p.K
    C = p.c / (p.K * p.n)
    return p.r * p.K / ((u + A) * (u + C))


# ---------------------------------------------------------------------------
# polynomial form of the scaled field
#
#   du = P(u) - Q v (u^2 + C u),     P(u) = (u^2 + C u) g(u)
#   g(u) = (u + A)(1 - u)(u - M) = -u^3 + g2 u^2 + g1 u + g0
#   dv = S (u + A)(u - v + C) v


def _g_coeffs(A: float, M: float) -> tuple[float, float, float]:
    return (1.0 - A + M, A - M + A * M, -A * M)


def du_coefficients(sp: ScaledParams) -> tuple[float, ...]:
    """Coefficients of ``P(u)`` from u^5 down to u^0 (constant term is 0)."""
    g2, g1, g0 = _g_coeffs(sp.A, sp.M)
    C = sp.C
    return (-1.0, g2 - C, g1 + C * g2, g0 + C * g1, C * g0, 0.0)


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


_SPLITTER = 134217729.0  # 2**27 + 1


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def _comp_horner(coeffs: tuple[float, ...], x: float) -> float:
    """Compensated Horner evaluation (error-free transformations)."""
    s = coeffs[0]
    corr = 0.0
    for a in coeffs[1:]:
        p, pe = _two_prod(s, x)
        s, se = _two_sum(p, a)
        corr = corr * x + (pe + se)
    return s + corr


def f_scaled(sp: ScaledParams, s: PhaseState) -> tuple[float, float]:
    """Scaled vector field; the prey component uses compensated Horner."""
    u, v = float(s[0]), float(s[1])
    A, C, Q, S = sp.A, sp.C, sp.Q, sp.S
    du = _comp_horner(du_coefficients(sp), u) - Q * v * (u * u + C * u)
    dv = S * (u + A) * (u - v + C) * v
    return (du, dv)


def f_scaled_fast(sp: ScaledParams):
    """Return a plain ``rhs(u, v)`` closure in factored form for integration."""
    A, C, M, Q, S = sp.A, sp.C, sp.M, sp.Q, sp.S

    def rhs(u: float, v: float) -> tuple[float, float]:
        ua = u + A
        return (
            u * (u + C) * (ua * (1.0 - u) * (u - M) - Q * v),
            S * ua * (u - v + C) * v,
        )

    return rhs


def f_original(p: OriginalParams, x: float, y: float) -> tuple[float, float]:
    dx = p.r * x * (1.0 - x / p.K) * (x - p.m) - p.q * x * y / (x + p.a)
    dy = p.s * y * (1.0 - y / (p.n * x + p.c))
    return (dx, dy)


def jacobian_scaled(sp: ScaledParams, s: PhaseState) -> np.ndarray:
    """Analytic Jacobian of :func:`f_scaled` from the expanded polynomials."""
    u, v = float(s[0]), float(s[1])
    A, C, Q, S = sp.A, sp.C, sp.Q, sp.S
    c5, c4, c3, c2, c1, _ = du_coefficients(sp)
    dP = (((5.0 * c5 * u + 4.0 * c4) * u + 3.0 * c3) * u + 2.0 * c2) * u + c1
    j11 = dP - Q * v * (2.0 * u + C)
    j12 = -Q * (u * u + C * u)
    j21 = S * v * (2.0 * u + A + C - v)
    j22 = S * (u + A) * (u + C - 2.0 * v)
    return np.array([[j11, j12], [j21, j22]])


def theta_bound(sp: ScaledParams) -> BoundsRecord:
    """Eventual bound on ``u + v`` together with the caps on u and v."""
    A, C, M, S = sp.A, sp.C, sp.M, sp.S
    num = (
        S * (1 + A) ** 2 * (1 - M) ** 2 * (1 + C)
        + 4 * S * (1 + A)
        + (S + A * S + C * S + A * C * S + 1) ** 2
    )
    return BoundsRecord(theta=num / (4 * S * (A + 1)), u_cap=1.0, v_cap=1.0 + C)


# ---------------------------------------------------------------------------
# orbital equivalence of the two parametrisations


def _dense_path(sol, per_step: int = 8) -> np.ndarray:
    from .integrate import hermite

    pts = [(sol.u[0], sol.v[0])]
    for i in range(len(sol.t) - 1):
        t0, t1 = sol.t[i], sol.t[i + 1]
        y0, y1 = (sol.u[i], sol.v[i]), (sol.u[i + 1], sol.v[i + 1])
        f0, f1 = (sol.du[i], sol.dv[i]), (sol.du[i + 1], sol.dv[i + 1])
        for k in range(1, per_step + 1):
            pts.append(hermite(t0, t1, y0, y1, f0, f1, t0 + (t1 - t0) * k / per_step))
    return np.asarray(pts)


def _by_arclength(pts: np.ndarray, ds: float) -> np.ndarray:
    seg = np.hypot(*np.diff(pts, axis=0).T)
    s = np.concatenate(([0.0], np.cumsum(seg)))
    grid = np.arange(0.0, s[-1], ds)
    grid = np.append(grid, s[-1])
    return np.column_stack((np.interp(grid, s, pts[:, 0]), np.interp(grid, s, pts[:, 1])))


def orbit_hausdorff(
    p: OriginalParams,
    s0: PhaseState,
    tau_end: float,
    ds: float = 2e-5,
    tol: float = 1e-11,
) -> float:
    """Hausdorff distance between matched orbits of the two fields.

    The scaled field is integrated from ``s0`` for ``tau_end`` units of
    rescaled time and mapped into (x, y).  The biological field is
    integrated from the image of ``s0`` for the corresponding original
    time, obtained by Simpson quadrature of ``dt/dtau`` along the scaled
    path.  Both orbits are resampled by arc length (step ``ds``) and the
    symmetric Hausdorff distance is returned in population units.
    """
    from scipy.spatial import cKDTree

    from .integrate import hermite, solve

    sp = rescale(p)
    sol = solve(f_scaled_fast(sp), s0, tau_end, rtol=tol, atol=1e-15)
    rate = lambda u: (u + sp.A) * (u + sp.C) / (p.r * p.K)  # noqa: E731
    t_end = 0.0
    for i in range(len(sol.t) - 1):
        t0, t1 = sol.t[i], sol.t[i + 1]
        um = hermite(
            t0, t1, (sol.u[i], sol.v[i]), (sol.u[i + 1], sol.v[i + 1]),
            (sol.du[i], sol.dv[i]), (sol.du[i + 1], sol.dv[i + 1]), 0.5 * (t0 + t1),
        )[0]
        t_end += (t1 - t0) * (rate(sol.u[i]) + 4 * rate(um) + rate(sol.u[i + 1])) / 6
    scaled = _dense_path(sol) * np.array([p.K, p.n * p.K])
    orig = solve(
        lambda x, y: f_original(p, x, y), map_to_original(p, s0), t_end,
        rtol=tol, atol=1e-15 * p.n * p.K,
    )
    a = _by_arclength(scaled, ds)
    b = _by_arclength(_dense_path(orig), ds)
    return float(max(cKDTree(b).query(a)[0].max(), cKDTree(a).query(b)[0].max()))
