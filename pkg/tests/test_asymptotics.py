import math

import mpmath as mp
import numpy as np
import pytest
import sympy as sp
from scipy import integrate as sint

from seplab import asymptotics as a
from seplab.core import SystemParams, energy
from seplab.errors import IllConditionedFit, WrongBranch
from seplab.linearized import dv1, dv2, potential, v1, v2, v2_printed, wronskian
from seplab.melnikov import delta_b1_quadrature

FD8 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
FD8_2 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])


def second_derivative(f, t, h=1e-2):
    offs = np.arange(-4, 5) * h
    return sum(c * f(t + o) for c, o in zip(FD8_2, offs)) / h**2


def test_basis_examples():
    assert v1(0.0) == 1.0
    assert v2(0.0) == 0.0
    assert wronskian(1.7) == pytest.approx(1.0, abs=1e-10)
    assert a.LinearizedBasis.wronskian(-3.0) == pytest.approx(1.0, abs=1e-12)


def test_v2_matches_printed_form():
    t = np.linspace(-12, 12, 241)
    assert np.allclose(v2(t), v2_printed(t), rtol=1e-13, atol=1e-14)


def test_v2_symbolic_asymptotics():
    # independent oracle: series of the printed form as t -> +inf
    t = sp.symbols("t", positive=True)
    expr = sp.sinh(4 * t) / (32 * sp.cosh(t) ** 2) + sp.sinh(2 * t) / (4 * sp.cosh(t) ** 2) + 3 * t / (8 * sp.cosh(t) ** 2)
    lead = sp.limit(expr * sp.exp(-2 * t), t, sp.oo)
    assert lead == sp.Rational(1, 16)
    const = sp.limit(expr - sp.exp(2 * t) / 16, t, sp.oo)
    assert const == sp.Rational(3, 8)


def test_basis_residual_multiprecision():
    mp.mp.dps = 40
    V1 = lambda t: mp.sech(t) ** 2
    V2 = lambda t: mp.sinh(4 * t) / (32 * mp.cosh(t) ** 2) + mp.sinh(2 * t) / (4 * mp.cosh(t) ** 2) + 3 * t / (8 * mp.cosh(t) ** 2)
    for t in np.linspace(-10, 10, 21):
        t = mp.mpf(t)
        for V in (V1, V2):
            r = mp.diff(V, t, 2) + 2 * V(t) - 6 * mp.tanh(t) ** 2 * V(t)
            assert abs(r) < mp.mpf("1e-25")


def test_derivatives_match_finite_differences():
    t = np.linspace(-5, 5, 51)
    h = 1e-3
    offs = np.arange(-4, 5) * h
    for f, df in ((v1, dv1), (v2, dv2)):
        fd = sum(c * f(t + o) for c, o in zip(FD8, offs)) / h
        assert np.allclose(fd, df(t), rtol=1e-10, atol=1e-10)


def test_solve_correction_homogeneous():
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    U = a.solve_correction(2, zero, A=1.0, B=0.0, extract=False)
    t = np.linspace(-5.9, 5.9, 37)
    assert np.allclose(U(t), v1(t), atol=1e-14)
    assert np.allclose(U.values, v1(U.t), atol=1e-14)
    U = a.solve_correction(2, zero, A=0.0, B=1.0, extract=False)
    assert np.allclose(U(t), v2(t), rtol=1e-14, atol=1e-14)


def test_solve_correction_forced_residual():
    f1 = a.build_fn(1, [], 1.0, 0.0)
    U = a.solve_correction(1, f1, omega=1.0)
    t = np.linspace(-5, 5, 201)
    res = second_derivative(U, t) + potential(t) * U(t) - f1(t)
    assert np.max(np.abs(res)) < 1e-6
    # analytic derivative agrees with finite differences
    h = 1e-3
    offs = np.arange(-4, 5) * h
    fd = sum(c * U(t + o) for c, o in zip(FD8, offs)) / h
    assert np.allclose(fd, U.derivative(t), atol=1e-8)


def test_solve_correction_anchor():
    f1 = a.build_fn(1, [], 1.3, 0.7)
    U = a.solve_correction(1, f1, t0=0.5, A=0.2, B=-0.3, omega=1.3, extract=False)
    # at the anchor the coordinates are exactly (A, B)
    ca, cb = U.coordinates(np.array([0.5]))
    assert ca[0] == pytest.approx(0.2, abs=1e-14) and cb[0] == pytest.approx(-0.3, abs=1e-14)


def test_solve_correction_against_scipy_ode():
    # independent oracle: integrate the linear ODE from the anchor with solve_ivp
    w, phi = 1.0, 0.4
    f1 = a.build_fn(1, [], w, phi)
    U = a.solve_correction(1, f1, omega=w, extract=False, A=0.1, B=0.2)
    rhs = lambda t, y: [y[1], -potential(t) * y[0] + math.cos(w * t + phi)]
    sol = sint.solve_ivp(rhs, (0, 3), [0.1, 0.2], method="DOP853", rtol=1e-12, atol=1e-13, dense_output=True)
    t = np.linspace(0, 3, 31)
    assert np.allclose(U(t), sol.sol(t)[0], atol=1e-9)


def test_build_fn_first_order():
    f1 = a.build_fn(1, [], 1.0, 0.3)
    t = np.linspace(-2, 2, 9)
    assert np.allclose(f1(t), np.cos(t + 0.3))


def _symbolic_fn(n, exprs, t):
    eps = sp.symbols("eps")
    u = sp.tanh(t) + sum(eps**k * e for k, e in enumerate(exprs, start=1))
    full = sp.expand(2 * u**3)
    coeff = full.coeff(eps, n)
    # move the part linear in U_n to the left-hand side (absent here: U_n not in exprs)
    return coeff


def test_build_fn_matches_symbolic_expansion():
    t = sp.symbols("t")
    U1e, U2e = sp.sin(t) / 3 + t / 5, sp.cos(2 * t) * sp.exp(-t * t / 4)
    U1 = sp.lambdify(t, U1e, "numpy")
    U2 = sp.lambdify(t, U2e, "numpy")
    pts = np.array([-1.7, -0.4, 0.0, 0.9, 2.2])
    for n, exprs, terms in ((2, [U1e], [U1]), (3, [U1e, U2e], [U1, U2])):
        f = a.build_fn(n, terms, 1.0, 0.0)
        ref = sp.lambdify(t, _symbolic_fn(n, exprs, t), "numpy")
        assert np.allclose(f(pts), ref(pts), rtol=1e-13, atol=1e-13)


def test_build_fn_second_order_sign_and_zero():
    U1 = lambda t: 0.5 + 0 * np.asarray(t)
    f2 = a.build_fn(2, [U1])
    t = np.array([0.3, 1.0])
    assert np.allclose(f2(t), 6 * np.tanh(t) * 0.25)
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    assert np.all(a.build_fn(2, [zero])(t) == 0.0)
    with pytest.raises(ValueError):
        a.build_fn(3, [zero])


def test_extract_coefficients_exact_terms():
    A, B = a.extract_coefficients(v1, (2.5, 6.0))
    assert A == pytest.approx(1.0, abs=1e-5) and abs(B) < 1e-8
    A, B = a.extract_coefficients(v2, (2.5, 6.0))
    # v2 ~ e^{2t}/16 + 3/8 - (13/16) e^{-2t} + ...
    assert B == pytest.approx(1.0, abs=1e-10)
    assert A == pytest.approx(-13 / 64, abs=1e-5)
    A, B = a.extract_coefficients(v2, (2.5, 6.0), side=-1)
    assert B == pytest.approx(1.0, abs=1e-10)
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    assert a.extract_coefficients(zero, (2.5, 6.0)) == (0.0, 0.0)


def test_extract_b_against_wronskian_projection():
    for phi in (0.0, 0.8):
        U = a.solve_correction(1, a.build_fn(1, [], 1.0, phi), omega=1.0)
        # oracle: v2-coordinate W(v1, U) at the grid end plus the analytic tail
        tail = sint.quad(lambda s: math.cos(s + phi) / math.cosh(s) ** 2, 6, 40, epsabs=1e-15)[0]
        head = sint.quad(lambda s: math.cos(s + phi) / math.cosh(s) ** 2, -40, -6, epsabs=1e-15)[0]
        b_hi = float(v1(6.0) * U.derivative(6.0) - dv1(6.0) * U(6.0)) + tail
        b_lo = float(v1(-6.0) * U.derivative(-6.0) - dv1(-6.0) * U(-6.0)) - head
        assert U.B_plus == pytest.approx(b_hi, abs=1e-8)
        assert U.B_minus == pytest.approx(b_lo, abs=1e-8)
        assert U.B_plus - U.B_minus == pytest.approx(delta_b1_quadrature(1.0, phi), abs=1e-8)


def test_extract_ill_conditioned():
    U = a.solve_correction(1, a.build_fn(1, [], 1.0, 0.0), omega=1.0, extract=False)
    with pytest.raises(IllConditionedFit):
        a.extract_coefficients(U, (5.7, 6.0))


def test_correction_term_rows():
    U = a.solve_correction(1, a.build_fn(1, [], 1.0, 0.0), omega=1.0, extract=False, grid=(-1, 1), h=0.5)
    rows = list(U.rows())
    assert len(rows) == 5 and rows[0][0] == -1.0


# --- saddle ---------------------------------------------------------------

P0 = SystemParams(0.01, 1.0, 0.0)


def coeffs(a1, b1, tau0=0.0, side=a.Side.PLUS):
    return a.SaddleCoeffs(side, (a1, 0.0), (b1, 0.0), tau0)


def test_saddle_examples():
    assert a.saddle_correction(a.Side.PLUS, 1, 0.3, coeffs(0.0, 0.0), P0) == 0.0
    assert a.saddle_correction(a.Side.PLUS, 2, 0.0, coeffs(0.0, 0.0), P0) == pytest.approx(-0.2)
    printed = a.saddle_correction(a.Side.PLUS, 2, 0.0, coeffs(-2.0, -0.1), P0, form="printed")
    assert printed == pytest.approx(4 / 12 + 0.01 / 12 - 0.5 * (-2) * (-0.1) - 1 / 5)
    consistent = a.saddle_correction(a.Side.PLUS, 2, 0.0, coeffs(-2.0, -0.1), P0)
    assert consistent == pytest.approx(4 / 2 + 0.01 / 2 - 3 * (-2) * (-0.1) - 1 / 5)
    with pytest.raises(ValueError):
        a.saddle_correction(a.Side.PLUS, 3, 0.0, coeffs(0, 0), P0)


@pytest.mark.parametrize("side, sign", [(a.Side.PLUS, 1.0), (a.Side.MINUS, -1.0)])
def test_saddle_second_order_solves_equation(side, sign):
    c = coeffs(-2.0, -0.1, tau0=-1.1, side=side)
    p = SystemParams(0.01, 1.3, 0.4)
    u1 = lambda tau: a.saddle_correction(side, 1, tau, c, p)
    u2 = lambda tau: a.saddle_correction(side, 2, tau, c, p)
    tau = np.linspace(-0.8, 0.8, 17)
    forcing = np.cos(p.omega * tau + p.phi0 - p.omega * c.tau0)
    res = second_derivative(u2, tau) - 4 * u2(tau) - forcing - sign * 6 * u1(tau) ** 2
    assert np.max(np.abs(res)) < 1e-7
    # the printed coefficients leave a residual of order alpha^2
    up = lambda tau: a.saddle_correction(side, 2, tau, c, p, form="printed")
    res_p = second_derivative(up, tau) - 4 * up(tau) - forcing - sign * 6 * u1(tau) ** 2
    assert np.max(np.abs(res_p)) > 1.0


def test_saddle_expansion_tracks_ode():
    # one step beyond the leading term: u = 1 + eps^(1/2) u1 + eps u2 near (1, 0)
    eps, phi0 = 1e-4, 0.3
    p = SystemParams(eps, 1.0, phi0)
    c = a.match_upper_to_saddle(-0.5, 0.0, eps)
    tau0 = c.tau0
    u1 = lambda tau: a.saddle_correction(a.Side.PLUS, 1, tau, c, p)
    u2 = lambda tau: a.saddle_correction(a.Side.PLUS, 2, tau, c, p)
    du = lambda tau, f: (f(tau + 1e-6) - f(tau - 1e-6)) / 2e-6
    y0 = [1 + eps**0.5 * u1(0.0) + eps * u2(0.0), eps**0.5 * du(0.0, u1) + eps * du(0.0, u2)]
    rhs = lambda tau, y: [y[1], -2 * y[0] + 2 * y[0] ** 3 + eps * math.cos(tau + phi0 - tau0)]
    sol = sint.solve_ivp(rhs, (0, 0.5), y0, rtol=1e-12, atol=1e-14, dense_output=True)
    for tau in (0.25, 0.5):
        approx = 1 + eps**0.5 * u1(tau) + eps * u2(tau)
        assert abs(sol.sol(tau)[0] - approx) < 5 * eps**1.5


# --- matching --------------------------------------------------------------


def test_match_upper_examples():
    c = a.match_upper_to_saddle(-1.0, 0.0, 0.01)
    assert c.beta_n(1) == -1 / 16 and c.alpha_n(1) == -2.0
    assert c.tau0 == pytest.approx(0.25 * math.log(0.01))
    assert c.tau0 == pytest.approx(-1.15129, abs=1e-5)
    c = a.match_upper_to_saddle(-1.0, 0.3, 0.01, A_plus=(0.0, 0.0), B_plus=(0.0, 0.0))
    assert c.alpha_n(3) == 0 and c.beta_n(3) == 0 and c.alpha_n(5) == 0
    c = a.match_upper_to_saddle(-1.0, 0.3, 0.01, A_plus=(0.5,), B_plus=(3.2,))
    assert c.alpha_n(3) == 2.0 and c.beta_n(3) == pytest.approx(0.2)
    assert c.alpha_n(2) == 0 and c.beta_n(2) == 0
    assert c.beta_n(1) == pytest.approx(-0.7 / 16)


def test_escape_predicate_examples():
    assert a.escape_predicate(0.0, math.pi, 1.0).outcome is a.Outcome.TURNS_TO_LOWER_BRANCH
    assert a.escape_predicate(0.0, 0.0, 1.0).outcome is a.Outcome.ESCAPES
    v = a.escape_predicate(-0.05, math.pi / 3, 1.0)
    assert 0.5 + 16 * (-0.05) * math.cosh(math.pi / 2) < 0
    assert v.outcome is a.Outcome.TURNS_TO_LOWER_BRANCH
    d = a.escape_predicate(0.0, math.pi / 2, 1.0)
    assert d.outcome is a.Outcome.ESCAPES and d.degenerate
    # the oracle mode moves the boundary: B + M cos(phi) > 0
    M = delta_b1_quadrature(1.0, 0.0)
    B = -0.9 * M * math.cos(0.2)
    assert a.escape_predicate(B, 0.2, 1.0, mode="oracle").outcome is a.Outcome.ESCAPES
    assert a.escape_predicate(B, 0.2, 1.0, mode="paper").outcome is a.Outcome.TURNS_TO_LOWER_BRANCH


def test_match_saddle_to_lower_examples():
    c = a.SaddleCoeffs(a.Side.PLUS, (-2.0, 0.0, 0.0), (-1 / 16, 0.0, 0.0), 0.25 * math.log(0.01))
    frag = a.match_saddle_to_lower(c, 0.01, 0.0)
    assert frag.a[0] == pytest.approx(-1 / 64)
    assert frag.b[0] == 0.0
    assert frag.theta_shift == pytest.approx(0.25 * math.log(0.01) + 0.5 * math.log(1 / 16) - 0.5 * math.log(2))
    with pytest.raises(WrongBranch):
        a.match_saddle_to_lower(a.SaddleCoeffs(a.Side.PLUS, (-2.0,), (0.0,), 0.0), 0.01, 0.0)


def test_composite_shift_identity():
    rng = np.random.default_rng(7)
    for _ in range(10):
        eps = 10 ** rng.uniform(-4, -1)
        B1m, dB = rng.uniform(-2, -0.1), rng.uniform(-0.05, 0.05)
        c = a.match_upper_to_saddle(B1m, dB, eps)
        frag = a.match_saddle_to_lower(c, eps, 0.0)
        # tau = t + tau0 and theta = tau + shift
        composite = c.tau0 + frag.theta_shift
        ref = 0.5 * math.log(eps) + 0.5 * math.log(-(B1m + dB) / 16) - 0.5 * math.log(2)
        assert composite == pytest.approx(ref, abs=1e-12)


def test_lower_branch_matching_against_separatrix():
    # -tanh(theta) near theta -> -inf is 1 - 2 e^{2 theta}; with the shift this
    # must equal eps^(1/2) beta_1 e^{2 tau}
    eps, beta1 = 1e-3, -0.07
    c = a.SaddleCoeffs(a.Side.PLUS, (-2.0,), (beta1,), 0.25 * math.log(eps))
    frag = a.match_saddle_to_lower(c, eps, 0.0)
    tau = np.linspace(-0.5, 0.5, 5)
    lhs = -2 * np.exp(2 * (tau + frag.theta_shift))
    assert np.allclose(lhs, eps**0.5 * beta1 * np.exp(2 * tau), rtol=1e-13)


def test_match_lower_to_left_saddle_examples():
    c = a.match_lower_to_left_saddle((0.25,), (0.0,), 0.01)
    assert c.side is a.Side.MINUS
    assert c.alpha_n(1) == 2.0 and c.alpha_n(3) == 1.0
    assert c.beta_n(1) == 0.0
    c = a.match_lower_to_left_saddle((0.0,), (1.6, 3.2), 0.01)
    assert c.beta_n(1) == pytest.approx(0.1) and c.beta_n(3) == pytest.approx(0.2)


def test_lower_jump():
    eps, b1, w = 0.01, -0.05, 1.0
    shift = 0.5 * w * (math.log(eps) + math.log(-b1) - math.log(2))
    assert abs(a.lower_jump(eps, b1, math.pi / 2 + shift, w)) < 1e-12
    assert a.lower_jump(eps, b1, shift, w) == pytest.approx(delta_b1_quadrature(w, 0.0))
    assert a.lower_jump(eps, b1, shift, w, "paper") == pytest.approx(math.pi / math.cosh(math.pi / 2))
    with pytest.raises(WrongBranch):
        a.lower_jump(eps, 0.1, 0.0)


def test_first_order_ic_energy():
    # E - 1/2 at the lobe centre equals eps * v2-coordinate there, to O(eps^2)
    for phi in (0.0, 1.0, math.pi):
        p = SystemParams(1e-3, 1.0, phi)
        ic = a.first_order_ic(-0.2, p)
        half = sint.quad(lambda s: math.cos(s + phi) / math.cosh(s) ** 2, -40, 0, epsabs=1e-15)[0]
        assert ic.u == 0.0
        assert (energy(ic) - 0.5) / p.epsilon == pytest.approx(-0.2 + half, abs=2e-3)


def test_ledger_chain_and_json():
    import json

    led = a.build_ledger(-2.0, 0.01, 1.0, 0.3, A_plus=(0.1,))
    d = json.loads(led.to_json())
    assert set(d) == {"A", "B", "a", "b", "alpha", "beta", "Phi", "phi", "theta_shift"}
    assert d["B"][0] == pytest.approx(-2.0 + delta_b1_quadrature(1.0, 0.3))
    assert d["a"][0] == pytest.approx(-2 * (-d["beta"][0]) / 8)
    # escaping passage: no lower part
    led = a.build_ledger(0.5, 0.01, 1.0, 0.0)
    assert led.a == [] and math.isnan(led.phi)
