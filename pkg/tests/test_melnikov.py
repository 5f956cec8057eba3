import math

import numpy as np
import pytest
from scipy import integrate as sint

from seplab import melnikov as m
from seplab.errors import RegularizationDiverges
from seplab.linearized import sech2

# independent reference: contour integration of cos(w t) sech^2 t
residue = lambda w: math.pi * w / math.sinh(0.5 * math.pi * w)


def scipy_melnikov(w, phi0):
    f = lambda t: math.cos(w * t + phi0) / math.cosh(t) ** 2
    return sint.quad(f, -40, 40, limit=400, epsabs=1e-14, epsrel=1e-13)[0]


def test_closed_form_examples():
    assert m.delta_b1_closed(1.0, math.pi / 2) == 0.0
    assert m.delta_b1_closed(0.7, math.pi / 2) == 0.0
    assert m.delta_b1_closed(1.0, 0.0) == pytest.approx(math.pi / math.cosh(math.pi / 2), rel=1e-15)
    assert m.delta_b1_closed(2.0, math.pi) == pytest.approx(-math.pi / math.cosh(math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        m.delta_b1_closed(0.0, 0.0)


@pytest.mark.parametrize("w", [0.5, 1.0, 2.0, 3.0])
def test_quadrature_matches_residue_and_scipy(w):
    q = m.delta_b1_quadrature(w, 0.0)
    assert q == pytest.approx(residue(w), abs=1e-10)
    assert q == pytest.approx(scipy_melnikov(w, 0.0), abs=1e-10)


def test_quadrature_examples():
    assert abs(m.delta_b1_quadrature(1.0, math.pi / 2)) < 1e-10
    assert m.delta_b1_quadrature(1e-9, 0.0) == pytest.approx(2.0, abs=1e-8)
    # fixture for omega = 1, phi0 = 0
    assert m.delta_b1_quadrature(1.0, 0.0) == pytest.approx(1.3651389006617, abs=1e-10)


def test_quadrature_even_in_omega():
    for w in (0.3, 1.0, 2.5):
        assert m.delta_b1_quadrature(w, 0.4) == pytest.approx(m.delta_b1_quadrature(-w, 0.4), abs=1e-12)


def test_jump_report_discrepancy():
    reps = m.discrepancy_report()
    assert [r.omega for r in reps] == [0.5, 1.0, 2.0]
    for r in reps:
        assert r.rel_discrepancy == pytest.approx(abs(r.closed_form - r.quadrature) / abs(r.quadrature))
        assert set(r.to_dict()) == {"omega", "phi0", "closed_form", "quadrature", "rel_discrepancy"}
    # the printed form is noticeably off at omega = 1
    assert reps[1].rel_discrepancy > 0.05


# dA1 oracle: the regularised limit in closed form (derived by residues):
# -sin(phi0) * 3 pi^2 w cosh(pi w/2) / (16 sinh^2(pi w/2)).
def delta_a1_exact(w, phi0):
    return -math.sin(phi0) * 3 * math.pi**2 * w * math.cosh(math.pi * w / 2) / (16 * math.sinh(math.pi * w / 2) ** 2)


@pytest.mark.parametrize("w", [0.5, 1.0, 2.0])
def test_delta_a1_against_closed_form(w):
    assert m.delta_a1(w, math.pi / 2) == pytest.approx(delta_a1_exact(w, math.pi / 2), abs=1e-9)


def test_delta_a1_examples():
    assert m.delta_a1(1.0, 0.0) == 0.0
    assert m.delta_a1(1.0, math.pi) == 0.0
    val = m.delta_a1(1.0, math.pi / 2, (6, 8, 10, 12))
    assert val == pytest.approx(-0.87677167438, abs=1e-9)
    # two quadrature tolerances give the same limit
    loose = m.delta_a1(1.0, math.pi / 2, (6, 8, 10, 12), quad_tol=1e-11)
    assert loose == pytest.approx(val, abs=1e-9)


def test_delta_a1_factorises():
    unit = m.delta_a1(1.0, math.pi / 2)
    for phi in np.linspace(0.1, 6.0, 7):
        assert m.delta_a1(1.0, phi) == pytest.approx(math.sin(phi) * unit, abs=1e-8)


def test_delta_a1_bracket_oscillates_without_counterterm():
    # the printed bracket alone does not settle; the plateau counterterm fixes it
    terms = [m.delta_a1_terms(1.0, s) for s in (6, 8, 10, 12)]
    raw = np.array([t["bracket"] for t in terms])
    assert np.max(np.abs(np.diff(raw))) > 0.1
    reg = np.array([t["regularized"] for t in terms])
    assert abs(reg[-1] - reg[-2]) < 1e-7


def test_delta_a1_errors():
    with pytest.raises(RegularizationDiverges):
        m.delta_a1(1.0, 1.0, (1.0, 1.5, 2.0))
    with pytest.raises(ValueError):
        m.delta_a1(1.0, 1.0, (6, 8))
    with pytest.raises(ValueError):
        m.delta_a1(1.0, 1.0, (8, 6, 10))


def test_delta_b_generic():
    assert m.GENERIC_NORMALIZATION == 1.0
    assert m.delta_b_generic(lambda t: np.zeros_like(t)) == 0.0
    for w, phi in ((1.0, 0.0), (0.7, 1.1)):
        f1 = lambda t: np.cos(w * t + phi)
        assert m.delta_b_generic(f1) == pytest.approx(m.delta_b1_quadrature(w, phi), abs=1e-9)
    g = lambda t: np.exp(-np.asarray(t) ** 2)
    full = m.delta_b_generic(g)
    half = sint.quad(lambda t: math.exp(-t * t) * sech2(t), 0, 20, epsabs=1e-14)[0]
    assert full == pytest.approx(2 * half, abs=1e-11)


def test_delta_b_generic_on_grid():
    t = np.linspace(-16, 16, 6401)
    vals = np.cos(t)
    assert m.delta_b_generic((t, vals)) == pytest.approx(residue(1.0), abs=1e-9)
    with pytest.raises(ValueError):
        m.delta_b_generic((t[800:-800], vals[800:-800]))
