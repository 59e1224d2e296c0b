import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import FIG2, FIG10, FIG11, scaled_params, unit
from leslie_allee.equilibria import (
    EquilibriumCubic,
    center_manifold_coeffs,
    classify_point,
    coarse,
    cubic_of,
    equilibria_all,
    positive_roots,
    real_roots,
    strong_decomposition,
    weak_configuration,
)
from leslie_allee.integrate import solve
from leslie_allee.model import PhaseState, ScaledParams, f_scaled, f_scaled_fast


def bisect(f, lo, hi, n=200):
    flo = f(lo)
    for _ in range(n):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_roots(f, lo=-2.0, hi=2.0, n=10_000):
    """Sign-scan bisection oracle."""
    xs = np.linspace(lo, hi, n + 1)
    ys = [f(float(x)) for x in xs]
    out = []
    for i in range(n):
        if ys[i] == 0:
            out.append(float(xs[i]))
        elif ys[i] * ys[i + 1] < 0:
            out.append(bisect(f, float(xs[i]), float(xs[i + 1])))
    return out


def sp_of(**kw):
    return ScaledParams(**kw)


# cubic_of


def test_cubic_coefficients_exact():
    c = cubic_of(sp_of(**FIG2, S=0.2))
    A, C, M, Q = (F(x) for x in (FIG2["A"], FIG2["C"], FIG2["M"], FIG2["Q"]))
    assert F(c.c3) == 1
    assert c.c2 == float(-(M + 1 - A))
    assert c.c1 == pytest.approx(float(-(A * (M + 1) - Q - M)), abs=1e-16)
    assert c.c0 == pytest.approx(float(A * M + C * Q), abs=1e-16)
    assert (c.c2, c.c1, c.c0) == pytest.approx((-1.02, 0.202, 0.027), abs=1e-15)


@given(scaled_params(), st.lists(unit(-1, 2), min_size=10, max_size=10))
def test_cubic_identity(sp, us):
    c = cubic_of(sp)
    for u in us:
        g = (u + sp.A) * (1 - u) * (u - sp.M)
        assert c(u) == pytest.approx(sp.Q * (u + sp.C) - g, abs=1e-13)


def test_cubic_constant_vanishes_on_collapse():
    A, M, Q = 0.5, -0.1, 0.5
    c = cubic_of(sp_of(A=A, C=-A * M / Q, M=M, Q=Q, S=0.1))
    assert c.c0 == 0.0
    assert any(abs(r) < 1e-15 for r, _ in real_roots(c))


@given(scaled_params(sign=1))
def test_negative_root_by_bisection(sp):
    c = cubic_of(sp)
    # c(0) = AM + CQ > 0 and c(-10) < 0 in the strong case
    root = bisect(c, -10.0, 0.0)
    d = strong_decomposition(sp)
    assert -d.G == pytest.approx(root, abs=1e-9)
    assert abs(c(-d.G)) < 1e-10


# real_roots


def test_real_roots_examples():
    r = real_roots(EquilibriumCubic(1.0, 0.0, -1.0, 0.0))
    assert [m for _, m in r] == [1, 1, 1]
    assert [x for x, _ in r] == pytest.approx([-1, 0, 1], abs=1e-15)
    # (u - 0.3)^2 (u + 0.5) = u^3 - 0.1 u^2 - 0.21 u + 0.045
    r = real_roots(EquilibriumCubic(1.0, -0.1, -0.21, 0.045), tol=1e-9)
    assert [m for _, m in r] == [1, 2]
    assert [x for x, _ in r] == pytest.approx([-0.5, 0.3], abs=1e-8)


def test_real_roots_fig2():
    r = real_roots(cubic_of(sp_of(**FIG2, S=0.2)))
    assert sum(x < 0 for x, _ in r) == 1
    assert sum(0 < x < 1 for x, _ in r) == 2


def test_real_roots_rejects_bad_tol():
    with pytest.raises(ValueError):
        real_roots(EquilibriumCubic(1, 0, -1, 0), tol=1e-3)


@settings(max_examples=300)
@given(scaled_params())
def test_roots_match_sign_scan_oracle(sp):
    c = cubic_of(sp)
    ref = np.roots([c.c3, c.c2, c.c1, c.c0])
    real = np.sort(ref[np.abs(ref.imag) < 1e-7].real)
    # the scan oracle cannot see tangencies or roots at the window edge
    assume(len(real) < 2 or np.min(np.diff(real)) > 1e-3)
    assume(np.all(np.abs(np.abs(real) - 2) > 1e-3))
    assume(np.all(np.abs(ref.imag[np.abs(ref.imag) >= 1e-7]) > 1e-3))
    got = [x for x, _ in real_roots(c) if -2 < x < 2]
    want = scan_roots(c)
    assert len(got) == len(want)
    assert got == pytest.approx(want, abs=1e-8)


@given(scaled_params())
def test_vieta(sp):
    c = cubic_of(sp)
    r = [x for x, m in real_roots(c) for _ in range(m)]
    assume(len(r) == 3)
    assert sum(r) == pytest.approx(sp.M + 1 - sp.A, abs=1e-9)
    assert r[0] * r[1] * r[2] == pytest.approx(-(sp.A * sp.M + sp.C * sp.Q), abs=1e-9)


# equilibria_all


@given(scaled_params())
def test_equilibria_are_zeros_on_the_nullcline(sp):
    for e in equilibria_all(sp):
        assert math.hypot(*f_scaled(sp, e.location)) < 1e-10
        if e.kind == "positive":
            assert abs(e.location.v - e.location.u - sp.C) < 1e-12
            assert 0 < e.location.u < 1


@given(scaled_params())
def test_equilibria_inventory(sp):
    recs = equilibria_all(sp)
    kinds = [e.kind for e in recs]
    assert kinds.count("origin") == kinds.count("prey-only-K") == kinds.count("predator-only") == 1
    assert kinds.count("prey-only-M") == (1 if sp.M > 0 else 0)
    assert kinds.count("positive") == len(positive_roots(sp))


def labels(sp, tol=1e-9):
    return {e.name: e.label for e in equilibria_all(sp, tol)}


def test_fig2_top_left_inventory():
    lab = labels(sp_of(**FIG2, S=0.2))
    assert list(lab) == ["(0,0)", "(1,0)", "(M,0)", "(0,C)", "P1", "P2"]
    assert lab["(0,0)"] == "saddle" and lab["(1,0)"] == "saddle" and lab["P1"] == "saddle"
    assert lab["(M,0)"] == "unstable-node"
    assert coarse(lab["(0,C)"]) == "stable" and coarse(lab["P2"]) == "stable"


def test_fig10_inventory():
    recs = equilibria_all(sp_of(**FIG10, S=0.25))
    lab = {e.name: e.label for e in recs}
    assert "(M,0)" not in lab
    assert coarse(lab["(0,0)"]) == "unstable"
    assert lab["(1,0)"] == "saddle" and lab["(0,C)"] == "saddle"
    assert coarse(lab["W"]) == "stable"
    assert sum(e.kind == "positive" for e in recs) == 1


def test_fig10_w_changes_stability_between_the_panels():
    # trace at W is (W + C)(W g'(W) - S (A + W)); its root in S is independent of the Jacobian code
    lo = {e.name: e for e in equilibria_all(sp_of(**FIG10, S=0.15))}["W"]
    W = F(lo.location.u)
    A, M = F(FIG10["A"]), F(FIG10["M"])
    gp = (1 - W) * (W - M) - (W + A) * (W - M) + (W + A) * (1 - W)
    s_h = float(W * gp / (A + W))
    assert 0.15 < s_h < 0.25
    assert lo.label == "unstable-focus"


def test_strong_without_positive_equilibria():
    sp = sp_of(**{**FIG2, "Q": 0.5}, S=0.2)
    recs = equilibria_all(sp)
    assert not [e for e in recs if e.kind == "positive"]
    assert coarse(labels(sp)["(0,C)"]) == "stable"


# classify_point


def test_prey_only_m_repeller():
    sp = sp_of(**FIG2, S=0.2)
    e = classify_point(sp, PhaseState(sp.M, 0.0))
    A, C, M, S = sp.A, sp.C, sp.M, sp.S
    assert e.label == "unstable-node"
    assert e.det == pytest.approx(M * S * (1 - M) * (C + M) ** 2 * (A + M) ** 2, rel=1e-12)


def test_predator_only_saddle_when_c_small():
    sp = sp_of(A=0.5, C=0.05, M=-0.1, Q=0.5555556, S=0.15)
    assert sp.C < -sp.A * sp.M / sp.Q
    assert classify_point(sp, PhaseState(0, sp.C)).label == "saddle"


def test_predator_only_saddle_node_fig11():
    sp = sp_of(**FIG11)
    assert abs(sp.C + sp.A * sp.M / sp.Q) < 1e-7
    assert classify_point(sp, PhaseState(0, sp.C), tol=1e-7).label == "saddle-node"


def test_classify_rejects_non_equilibrium():
    with pytest.raises(ValueError):
        classify_point(sp_of(**FIG2, S=0.2), PhaseState(0.5, 0.5))


@given(scaled_params(), unit(0.05, 0.95))
def test_label_matches_eigenvalues(sp, _):
    for e in equilibria_all(sp):
        lam = np.array(e.eigenvalues)
        if e.label == "saddle":
            assert lam.real.min() < 0 < lam.real.max()
        elif e.label.startswith("stable"):
            assert np.all(lam.real < 0)
        elif e.label.startswith("unstable"):
            assert np.all(lam.real > 0)
        if e.label.endswith("focus"):
            assert np.all(np.abs(lam.imag) > 0)


def test_zero_c_trichotomy():
    # C* = -AM/Q = 0.1 lands exactly on the scan grid
    A, M, Q = 0.5, -0.1, 0.5
    seq = []
    for k in range(50, 151):
        full = classify_point(sp_of(A=A, C=k / 1000, M=M, Q=Q, S=0.15), PhaseState(0, k / 1000)).label
        lab = full if coarse(full) == "degenerate" else coarse(full)
        if not seq or seq[-1] != lab:
            seq.append(lab)
    assert seq == ["saddle", "saddle-node", "stable"]


# strong decomposition


def test_strong_decomposition_fig2():
    sp = sp_of(**FIG2, S=0.2)
    d = strong_decomposition(sp)
    assert d.delta > 0
    c = cubic_of(sp)
    for r in d.roots:
        assert abs(c(r)) < 1e-10
    G = d.G
    assert sp.Q == pytest.approx((G + 1) * (G + sp.M) * (G - sp.A) / (sp.C - G), abs=1e-9)


@given(scaled_params(sign=1))
def test_strong_identity(sp):
    d = strong_decomposition(sp)
    G = d.G
    assume(abs(sp.C - G) > 1e-6)
    assert sp.Q == pytest.approx((G + 1) * (G + sp.M) * (G - sp.A) / (sp.C - G), rel=1e-9)
    assert sp.A < G < sp.C or sp.C < G < sp.A


def test_strong_decomposition_on_fold():
    from leslie_allee.bifurcation import fold_values

    (Q, u), = fold_values(0.1, 0.08, 0.19)
    d = strong_decomposition(sp_of(A=0.08, C=0.19, M=0.1, Q=Q, S=0.1))
    assert abs(d.delta) < 1e-8
    assert d.E == pytest.approx((1 - 0.08 + d.G + 0.1) / 2)
    assert d.E == pytest.approx(u, abs=1e-6)


def test_strong_decomposition_no_positive_roots():
    sp = sp_of(**{**FIG2, "Q": 0.5}, S=0.2)
    d = strong_decomposition(sp)
    assert d.delta < 0 and d.roots is None
    assert len([r for r in scan_roots(cubic_of(sp), 0.0, 1.0)]) == 0


def test_strong_decomposition_rejects_weak():
    with pytest.raises(ValueError):
        strong_decomposition(sp_of(**FIG10, S=0.15))


# weak configuration


def test_weak_configuration_fig10():
    sp = sp_of(**FIG10, S=0.15)
    # M + 1 - A > 0 and A(M + 1) - Q - M < 0 with C < -AM/Q: the up-to-three case, here with one root
    assert sp.M + 1 - sp.A > 0 and sp.A * (sp.M + 1) - sp.Q - sp.M < 0 and sp.C < -sp.A * sp.M / sp.Q
    w = weak_configuration(sp)
    assert w.case_id == "iii.b" and w.count == 1


def test_weak_configuration_fig11():
    w = weak_configuration(sp_of(**FIG11), tol=1e-7)
    assert w.case_id == "ii.a"
    # P1 and P2 survive beside the collapse of the smallest root onto (0, C)
    assert w.count == 2


def test_three_positive_equilibria():
    # three positive equilibria need the smaller C of the two weak diagrams
    w = weak_configuration(sp_of(A=0.08, C=0.019, M=-0.1, Q=0.3, S=0.1))
    assert w.case_id == "iii.b" and w.count == 3
    A, M, Q, C = 0.08, -0.1, 0.3, 0.019
    W = w.W
    assert Q == pytest.approx((1 - W) * (W - M) * (A + W) / (W + C), rel=1e-9)
    b = A + W - M - 1
    for r in w.roots[1:]:
        assert r * r + b * r + (M + Q - A * (M + 1) + W * b) == pytest.approx(0, abs=1e-9)


def test_three_positive_equilibria_absent_at_c_019():
    counts = {weak_configuration(sp_of(A=0.08, C=0.19, M=-0.1, Q=q, S=0.1)).count
              for q in np.linspace(0.005, 0.6, 400)}
    assert max(counts) == 2


def test_weak_configuration_rejects_strong():
    with pytest.raises(ValueError):
        weak_configuration(sp_of(**FIG2, S=0.2))


@st.composite
def three_root_weak(draw):
    r = sorted(draw(st.lists(unit(0.02, 0.98), min_size=3, max_size=3, unique=True)))
    assume(min(np.diff(r)) > 1e-2)
    M = -draw(unit(0.01, 0.9))
    A = M + 1 - sum(r)
    e2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2]
    assume(0.01 < A < 0.99)
    Q = e2 + A * (M + 1) - M
    assume(Q > 1e-3)
    C = (-r[0] * r[1] * r[2] - A * M) / Q
    assume(C > 1e-3)
    return ScaledParams(A=A, C=C, M=M, Q=Q, S=draw(unit(0.01, 1)))


@settings(max_examples=100)
@given(three_root_weak())
def test_weak_middle_root_is_saddle(sp):
    w = weak_configuration(sp)
    assert w.case_id == "iii.b" and w.count == 3
    mid = w.roots[1]
    e = classify_point(sp, PhaseState(mid, mid + sp.C))
    assert e.det < 0


@given(scaled_params(sign=1))
def test_strong_p1_is_saddle(sp):
    d = strong_decomposition(sp)
    assume(d.delta > 1e-6 and d.roots is not None)
    pos = [e for e in equilibria_all(sp) if e.name == "P1"]
    for e in pos:
        assert e.det < 0 and e.label == "saddle"


# center manifold


def collapse(**kw):
    sp = sp_of(**{**FIG11, **kw})
    return sp.with_(C=-sp.A * sp.M / sp.Q)


def test_center_manifold_fig11():
    cm = center_manifold_coeffs(sp_of(**FIG11), tol=1e-7)
    assert cm.a == 2.0
    assert cm.verdict == "saddle-node"
    assert cm.reduced_flow[0] < 0


@given(unit(0.05, 0.95), unit(0.01, 0.9), unit(0.05, 1.0), unit(0.01, 1.0))
def test_center_manifold_theta_positive(A, m, Q, S):
    sp = ScaledParams(A=A, C=A * m / Q, M=-m, Q=Q, S=S)
    cm = center_manifold_coeffs(sp)
    A, C = sp.A, sp.C
    assert cm.flow5[0] == pytest.approx(A * A * C**4 * S * S * (1 - A), rel=1e-12)
    assert cm.flow5[0] > 0
    assert cm.a == 1 / A
    assert all(math.isfinite(x) for x in (cm.b, cm.c, *cm.flow5, *cm.h_series, *cm.reduced_flow))


def test_center_manifold_against_slow_manifold_fit():
    sp = collapse()
    cm = center_manifold_coeffs(sp)
    rhs = f_scaled_fast(sp)
    X, Y = [], []
    for x0 in np.linspace(-5e-3, 5e-3, 41):
        sol = solve(rhs, (x0, sp.C + x0), 4000.0, rtol=1e-13, atol=1e-17, record=False)
        X.append(sol.y_last[0])
        Y.append(sol.y_last[1] - sp.C)
    X, Y = np.array(X), np.array(Y)
    fit = np.linalg.lstsq(np.column_stack([X**k for k in range(1, 5)]), Y, rcond=None)[0]
    h = np.array(cm.h_series[:4])
    assert np.all(np.abs(fit - h) <= 1e-3 * np.abs(h))


def test_center_manifold_rejects_off_set():
    with pytest.raises(ValueError):
        center_manifold_coeffs(sp_of(**{**FIG11, "C": 0.1}))
    with pytest.raises(ValueError):
        center_manifold_coeffs(sp_of(**FIG2, S=0.2))
