"""Equilibria of the scaled system and their local classification.

Positive equilibria lie on the predator nullcline ``v = u + C`` with u a
root in (0, 1) of the cubic

    f(u) = u^3 - (M + 1 - A) u^2 - (A (M + 1) - Q - M) u + A M + C Q.

Two identities are used throughout.  With ``g(u) = (u + A)(1 - u)(u - M)``,

    f(u) = Q (u + C) - g(u)      and      f'(u) = Q - g'(u),

and at a point ``(u, u + C)`` of the nullcline

    det J = S u (u + A)(u + C)^2 f'(u),
    tr J  = (u + C) (u g'(u) - S (u + A)).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import PhaseState, ScaledParams, f_scaled, jacobian_scaled

__all__ = [
    "EquilibriumCubic",
    "EquilibriumRecord",
    "StrongDecomposition",
    "WeakConfiguration",
    "CenterManifoldCoeffs",
    "LABELS",
    "cubic_of",
    "real_roots",
    "positive_roots",
    "equilibria_all",
    "classify_point",
    "strong_decomposition",
    "weak_configuration",
    "center_manifold_coeffs",
    "g_prime",
    "hopf_value",
    "coarse",
]

LABELS = (
    "saddle",
    "stable-node",
    "stable-focus",
    "unstable-node",
    "unstable-focus",
    "hopf-candidate",
    "saddle-node",
    "cusp-candidate",
    "degenerate",
)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class EquilibriumCubic:
    c3: float
    c2: float
    c1: float
    c0: float

    def __call__(self, u: float) -> float:
        return ((self.c3 * u + self.c2) * u + self.c1) * u + self.c0

    def deriv(self, u: float) -> float:
        return (3.0 * self.c3 * u + 2.0 * self.c2) * u + self.c1

    def discriminant(self) -> float:
        a, b, c, d = self.c3, self.c2, self.c1, self.c0
        return (
            18 * a * b * c * d
            - 4 * b**3 * d
            + b * b * c * c
            - 4 * a * c**3
            - 27 * a * a * d * d
        )


@dataclass(frozen=True)
class EquilibriumRecord:
    location: PhaseState
    kind: str
    eigenvalues: tuple[complex, complex]
    label: str
    det: float
    trace: float
    theorem_tag: Optional[str] = None
    multiplicity: int = 1
    name: str = ""

    @property
    def stable(self) -> bool:
        return self.label.startswith("stable")


@dataclass(frozen=True)
class StrongDecomposition:
    G: float
    delta: float
    roots: Optional[tuple[float, float]]
    E: float


@dataclass(frozen=True)
class WeakConfiguration:
    case_id: str
    W: Optional[float]
    delta: Optional[float]
    count: int
    roots: tuple[float, ...] = ()


@dataclass(frozen=True)
class CenterManifoldCoeffs:
    """Center manifold of ``(0, C)`` on the collapse set ``C = -AM/Q``.

    ``a``, ``b``, ``c`` and ``flow5`` are the closed forms of the published
    analysis, kept for comparison.  ``h_series`` and ``reduced_flow`` are
    computed here by order-by-order matching and drive ``verdict``:
    ``v - C = sum h_series[k-1] X**k`` and
    ``dX/dtau = sum reduced_flow[k-2] X**k`` with ``X = u``.
    """

    a: float
    b: float
    c: float
    flow5: tuple[float, float, float, float, float]
    h_series: tuple[float, ...] = field(default=())
    reduced_flow: tuple[float, ...] = field(default=())
    verdict: str = "saddle-node"


def cubic_of(sp: ScaledParams) -> EquilibriumCubic:
    A, C, M, Q = sp.A, sp.C, sp.M, sp.Q
    return EquilibriumCubic(1.0, -(M + 1.0 - A), -(A * (M + 1.0) - Q - M), A * M + C * Q)


def g_prime(sp: ScaledParams, u: float) -> float:
    """Derivative of ``(u + A)(1 - u)(u - M)``."""
    A, M = sp.A, sp.M
    return (-3.0 * u + 2.0 * (1.0 - A + M)) * u + (A - M + A * M)


def hopf_value(sp: ScaledParams, u: float) -> float:
    """S at which the trace at ``(u, u + C)`` vanishes."""
    return u * g_prime(sp, u) / (sp.A + u)


# ---------------------------------------------------------------------------
# root finding


def _newton(c: EquilibriumCubic, x: float, deriv: bool = False) -> float:
    f = c.deriv if deriv else c
    if deriv:
        df = lambda t: 6.0 * c.c3 * t + 2.0 * c.c2  # noqa: E731
    else:
        df = c.deriv
    for _ in range(60):
        fx = f(x)
        if fx == 0.0:
            break
        d = df(x)
        if d == 0.0:
            break
        step = fx / d
        x_new = x - step
        if abs(f(x_new)) >= abs(fx) and abs(step) < 1e-15 * max(1.0, abs(x)):
            break
        x = x_new
        if abs(step) <= 4e-16 * max(1.0, abs(x)):
            break
    return x


def _closed_form(c: EquilibriumCubic) -> list[complex]:
    a = c.c2 / c.c3
    b = c.c1 / c.c3
    d = c.c0 / c.c3
    shift = a / 3.0
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if p < 0 and disc <= 0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m) if m > 0 else 0.0
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        return [complex(m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift) for k in range(3)]
    sq = math.sqrt(max(disc, 0.0))
    t1 = math.copysign(abs(-q / 2.0 + sq) ** (1.0 / 3.0), -q / 2.0 + sq)
    t2 = math.copysign(abs(-q / 2.0 - sq) ** (1.0 / 3.0), -q / 2.0 - sq)
    r = t1 + t2 - shift
    re = -(t1 + t2) / 2.0 - shift
    im = math.sqrt(3.0) / 2.0 * (t1 - t2)
    return [complex(r), complex(re, im), complex(re, -im)]


def real_roots(c: EquilibriumCubic, tol: float = 1e-12) -> list[tuple[float, int]]:
    """Real roots of a cubic with multiplicities, ascending.

    A double root is reported when the normalised discriminant is within
    ``tol`` of zero, or when two polished roots lie within 1e-7 of each
    other with ``|f'|`` below 1e-7 at their midpoint.
    """
    if not 0 < tol <= 1e-4:
        raise ValueError(f"tol must lie in (0, 1e-4], got {tol!r}")
    if c.c3 == 0:
        raise ValueError("leading coefficient must be nonzero")
    mon = EquilibriumCubic(1.0, c.c2 / c.c3, c.c1 / c.c3, c.c0 / c.c3)
    a = mon.c2
    # critical points of the cubic; a double root is one of them
    crit_disc = a * a - 3.0 * mon.c1
    if abs(mon.discriminant()) <= tol:
        if crit_disc <= tol:
            return [(-a / 3.0, 3)]
        sq = math.sqrt(crit_disc)
        cands = [(-a - sq) / 3.0, (-a + sq) / 3.0]
        r = min(cands, key=lambda x: abs(mon(x)))
        r = _newton(mon, r, deriv=True)
        simple = _newton(mon, -a - 2.0 * r)
        return sorted([(r, 2), (simple, 1)])

    zs = _closed_form(mon)
    reals = sorted(_newton(mon, z.real) for z in zs if z.imag == 0.0)
    if not reals:
        reals = [_newton(mon, zs[0].real)]
    out: list[tuple[float, int]] = []
    i = 0
    while i < len(reals):
        if i + 1 < len(reals):
            x, y = reals[i], reals[i + 1]
            mid = 0.5 * (x + y)
            if abs(y - x) < 1e-7 and abs(mon.deriv(mid)) < 1e-7:
                out.append((mid, 2))
                i += 2
                continue
        out.append((reals[i], 1))
        i += 1
    return out


def positive_roots(sp: ScaledParams, tol: float = 1e-12) -> list[tuple[float, int]]:
    """Roots of the equilibrium cubic in the open interval (0, 1)."""
    return [(r, m) for r, m in real_roots(cubic_of(sp), tol) if 1e-12 < r < 1.0]


# ---------------------------------------------------------------------------
# classification


def classify_point(
    sp: ScaledParams,
    pt: PhaseState,
    tol: float = DEFAULT_TOL,
    kind: str = "positive",
    theorem_tag: Optional[str] = None,
    multiplicity: int = 1,
    name: str = "",
) -> EquilibriumRecord:
    """Classify an equilibrium from the eigen-structure of the Jacobian.

    The bands are relative: ``|det| <= tol * |J|_F**2`` and
    ``|trace| <= tol * |J|_F``.
    """
    pt = PhaseState(float(pt[0]), float(pt[1]))
    du, dv = f_scaled(sp, pt)
    if math.hypot(du, dv) >= 1e-8:
        raise ValueError(f"not an equilibrium: |f| = {math.hypot(du, dv):.3e} at {tuple(pt)}")
    J = jacobian_scaled(sp, pt)
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    tr = float(J[0, 0] + J[1, 1])
    disc = tr * tr - 4.0 * det
    sq = cmath.sqrt(disc)
    ev = ((tr - sq) / 2.0, (tr + sq) / 2.0)
    scale = float(np.linalg.norm(J))
    if scale < 1e-14:
        label = "degenerate"
    else:
        dband = tol * scale * scale
        tband = tol * scale
        if det < -dband:
            label = "saddle"
        elif abs(det) <= dband:
            label = "cusp-candidate" if abs(tr) <= tband else "saddle-node"
        elif abs(tr) <= tband:
            label = "hopf-candidate"
        else:
            sub = "node" if disc >= -dband else "focus"
            label = ("stable-" if tr < 0 else "unstable-") + sub
    return EquilibriumRecord(
        location=pt,
        kind=kind,
        eigenvalues=ev,
        label=label,
        det=det,
        trace=tr,
        theorem_tag=theorem_tag,
        multiplicity=multiplicity,
        name=name,
    )


def coarse(label: str) -> str:
    """Collapse a label to saddle / stable / unstable / center / degenerate."""
    if label == "saddle":
        return "saddle"
    if label.startswith("stable"):
        return "stable"
    if label.startswith("unstable"):
        return "unstable"
    if label == "hopf-candidate":
        return "center"
    return "degenerate"


def equilibria_all(sp: ScaledParams, tol: float = DEFAULT_TOL) -> list[EquilibriumRecord]:
    """All equilibria in the closed first quadrant, axes first, then by u."""
    C = sp.C
    out = [
        classify_point(sp, PhaseState(0.0, 0.0), tol, "origin", "boundary-lemma", name="(0,0)"),
        classify_point(sp, PhaseState(1.0, 0.0), tol, "prey-only-K", "boundary-lemma", name="(1,0)"),
    ]
    if sp.M > 0:
        out.append(
            classify_point(sp, PhaseState(sp.M, 0.0), tol, "prey-only-M", "boundary-lemma", name="(M,0)")
        )
    tag = "boundary-lemma" if sp.M > 0 else "theorem-0C"
    out.append(classify_point(sp, PhaseState(0.0, C), tol, "predator-only", tag, name="(0,C)"))
    roots = positive_roots(sp)
    for (u, mult), (tag, name) in zip(roots, _positive_names(sp, roots)):
        out.append(classify_point(sp, PhaseState(u, u + C), tol, "positive", tag, mult, name))
    return out


def _positive_names(sp: ScaledParams, roots) -> list[tuple[str, str]]:
    """Theorem tags and names for the positive roots, in ascending order.

    With the cubic positive at 0 the roots are P1 < P2 (one of them may be
    missing); with it negative at 0 the smallest root is W.  A double root
    is E in the strong case and L in the weak case.
    """
    out = []
    simple = [r for r, m in roots if m == 1]
    w_first = sp.M < 0 and cubic_of(sp).c0 < 0
    for i, (u, mult) in enumerate(roots):
        if mult > 1:
            out.append(("theorem-E", "E") if sp.M > 0 else ("theorem-L", "L"))
        elif w_first and u == simple[0]:
            out.append(("lemma-W" if len(roots) == 1 else "theorem-W", "W"))
        else:
            rest = [r for r in simple if not (w_first and r == simple[0])]
            if len(rest) == 2:
                k = rest.index(u) + 1
            else:
                k = 2 if not w_first else (1 if any(r > u for r, _ in roots) else 2)
            prefix = "theorem-weak-" if w_first else "theorem-"
            out.append((f"{prefix}P{k}", f"P{k}"))
    return out


# ---------------------------------------------------------------------------
# decompositions


def strong_decomposition(sp: ScaledParams) -> StrongDecomposition:
    """Negative root ``-G`` and the quadratic left after dividing it out."""
    if sp.M <= 0:
        raise ValueError("strong decomposition needs M > 0")
    c = cubic_of(sp)
    neg = [r for r, _ in real_roots(c) if r < 0]
    if not neg:
        # c0 > 0 forces a sign change on [-1e6, 0]
        lo, hi = -1e6, 0.0
        if c(lo) > 0 or c(hi) < 0:
            raise RuntimeError("no negative root of the equilibrium cubic")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if c(mid) < 0:
                lo = mid
            else:
                hi = mid
        neg = [0.5 * (lo + hi)]
    G = -neg[0]
    A, M, Q = sp.A, sp.M, sp.Q
    s = 1.0 - A + G + M
    delta = s * s - 4.0 * (M + Q - A * (M + 1.0) + G * s)
    E = s / 2.0
    roots = None
    if delta >= 0:
        sq = math.sqrt(delta)
        u1 = _newton(c, (s - sq) / 2.0) if delta > 1e-14 else E
        u2 = _newton(c, (s + sq) / 2.0) if delta > 1e-14 else E
        roots = (min(u1, u2), max(u1, u2))
    return StrongDecomposition(G=G, delta=delta, roots=roots, E=E)


def _sign(x: float, tol: float) -> int:
    return 0 if abs(x) <= tol else (1 if x > 0 else -1)


def weak_case(sp: ScaledParams, tol: float = 1e-9) -> str:
    """Case label from the signs of ``C + AM/Q``, ``M + 1 - A`` and ``A(M+1) - Q - M``."""
    A, C, M, Q = sp.A, sp.C, sp.M, sp.Q
    x = _sign(C + A * M / Q, tol)
    p = _sign(M + 1.0 - A, 0.0)
    r = _sign(A * (M + 1.0) - Q - M, 0.0)
    if x > 0:
        if p > 0 or (p < 0 and r < 0) or (p == 0 and r > 0):
            return "i.a"
        return "i.b"
    if x == 0:
        if p > 0 and r < 0:
            return "ii.a"
        if (p > 0 and r >= 0) or (p <= 0 and r > 0):
            return "ii.b"
        return "ii.c"
    if p > 0 and r < 0:
        return "iii.b"
    return "iii.a"


def weak_configuration(sp: ScaledParams, tol: float = 1e-9) -> WeakConfiguration:
    """Weak-effect case, positive-root count and the distinguished root W.

    In case iii the cubic is negative at 0 and positive at 1, so there is
    always a root in (0, 1); W is taken to be the smallest one.  The other
    two roots, when present, are those of the quadratic left after dividing
    out ``u - W``, with discriminant ``delta``.
    """
    if sp.M >= 0:
        raise ValueError("weak configuration needs M < 0")
    case = weak_case(sp, tol)
    roots = tuple(r for r, m in positive_roots(sp) for _ in range(m))
    W = delta = None
    if case.startswith("iii") and roots:
        W = roots[0]
        A, M, Q = sp.A, sp.M, sp.Q
        b = A + W - M - 1.0
        delta = b * b - 4.0 * (M + Q - A * (M + 1.0) + W * b)
    return WeakConfiguration(case_id=case, W=W, delta=delta, count=len(roots), roots=roots)


# ---------------------------------------------------------------------------
# center manifold at (0, C)


def _trunc_mul(p: np.ndarray, q: np.ndarray, n: int) -> np.ndarray:
    return np.convolve(p, q)[:n]


def _series(sp: ScaledParams, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Center-manifold graph and reduced flow as coefficient arrays in X."""
    A, M, Q, S = sp.A, sp.M, sp.Q, sp.S
    C = -A * M / Q
    n = order + 2
    g1 = A - M + A * M
    g2 = 1.0 - A + M
    gt = np.zeros(n)
    gt[1:4] = [g1, g2, -1.0]
    xc = np.zeros(n)
    xc[1:3] = [C, 1.0]  # X (X + C)
    xa = np.zeros(n)
    xa[:2] = [A, 1.0]
    h = np.zeros(n)
    for k in range(1, order + 1):
        h[k] = 0.0
        flow = _trunc_mul(xc, gt - Q * h, n)
        dh = np.zeros(n)
        dh[: n - 1] = h[1:] * np.arange(1, n)
        lhs = _trunc_mul(dh, flow, n)
        x_minus_h = -h.copy()
        x_minus_h[1] += 1.0
        c_plus_h = h.copy()
        c_plus_h[0] += C
        rhs = S * _trunc_mul(_trunc_mul(xa, x_minus_h, n), c_plus_h, n)
        h[k] = (rhs[k] - lhs[k]) / (A * C * S)
    flow = _trunc_mul(xc, gt - Q * h, n)
    return h[1 : order + 1], flow[2 : order + 1]


def center_manifold_coeffs(sp: ScaledParams, tol: float = 1e-10, order: int = 6) -> CenterManifoldCoeffs:
    """Center-manifold data at ``(0, C)``; C is snapped onto ``-AM/Q``."""
    A, M, Q, S = sp.A, sp.M, sp.Q, sp.S
    if M >= 0:
        raise ValueError("center manifold at (0, C) needs M < 0")
    if abs(sp.C + A * M / Q) >= tol:
        raise ValueError(f"C + AM/Q = {sp.C + A * M / Q:.3e} is off the collapse set")
    C = -A * M / Q
    a = 1.0 / A
    b = -(2 * A * C - 2 * C * M - A * S + C * S + 2 * A * C * M) / (A * A * C * S)
    zeta = 12 * A * A * C - 5 * C * S - 12 * A * C + 3 * A * C * S - 7 * A * A * S + 5 * A * S
    c = (
        6 * C * C * M * M * (A * A - 2 * A + 1)
        + C * M * zeta
        + A * A * (2 * C * C * S + 6 * C * C - 7 * C * S + S * S)
        + C * S * (3 * A * C - 2 * A * S + C * S)
    ) / (A**3 * C * C * S * S)
    theta = A * A * C**4 * S * S * (1 - A)
    iota = A * A * C**3 * S * S * (2 - A - C)
    kappa = A * C * C * S * (2 * A * C - 2 * C * M - A * S + C * S + 2 * A * C * M + A * C * S - A * M * S)
    nu = C * (
        6 * A**2 * C**2 + 6 * C**2 * M**2 + A**2 * S**2 + C**2 * S**2 + 6 * A**2 * C**2 * M**2
        - 12 * A * C**2 * M - 2 * A * C * S**2 + 3 * A * C**2 * S - 7 * A**2 * C * S - 5 * C**2 * M * S
        - 12 * A * C**2 * M**2 + 12 * A**2 * C**2 * M + 2 * A**2 * C**2 * S + A**2 * M * S**2
        - A * C * M * S**2 + 2 * A * C * M**2 * S + 3 * A * C**2 * M * S - 9 * A**2 * C * M * S
        - 2 * A**2 * C * M**2 * S + 5 * A * C * M * S
    )
    xi = M * (
        6 * A**2 * C**2 * M**2 + 12 * A**2 * C**2 * M + 2 * A**2 * C**2 * S + 6 * A**2 * C**2
        - 7 * A**2 * C * M * S - 7 * A**2 * C * S + A**2 * S**2 - 12 * A * C**2 * M**2
        + 3 * A * C**2 * M * S - 12 * A * C**2 * M + 3 * A * C**2 * S + 5 * A * C * M * S
        - 2 * A * C * S**2 + 6 * C**2 * M**2 - 5 * C**2 * M * S + C**2 * S**2
    )
    h, flow = _series(sp, order)
    scale = max(1.0, float(np.max(np.abs(flow))))
    verdict = "degenerate"
    for k, coef in enumerate(flow, start=2):
        if abs(coef) > 1e-13 * scale:
            if k % 2 == 0:
                verdict = "saddle-node"
            else:
                verdict = "stable" if coef < 0 else "unstable"
            break
    return CenterManifoldCoeffs(
        a=a,
        b=b,
        c=c,
        flow5=(theta, iota, kappa, nu, xi),
        h_series=tuple(float(x) for x in h),
        reduced_flow=tuple(float(x) for x in flow),
        verdict=verdict,
    )
