import numpy as np
import pytest

from rmf.curves import (
    ReferenceHelix as P,
    builtin,
    chen_rectifying_curve,
    great_circle,
    helix,
    random_trig_curve,
    sphere_circle,
    twisted_cubic,
)
from rmf.core import derivatives


@pytest.mark.parametrize("name", ["line", "circle:2", "helix", "great-circle:3", "twisted-cubic"])
def test_builtin_exact_derivatives_match_fd(name):
    c = builtin(name)
    a, b = c.domain
    s = np.linspace(a + 0.2 * (b - a), b - 0.2 * (b - a), 7)
    fd = c.without_derivatives()
    for order, tol in ((1, 1e-8), (2, 1e-6), (3, 1e-4)):
        assert np.abs(derivatives(fd, s, order) - c.exact_derivative(order)(s)).max() < tol


def test_builtin_unknown_name():
    with pytest.raises(KeyError):
        builtin("spiral")


def test_reference_helix_closed_forms_consistent():
    s = np.linspace(0, 120, 241)
    h = helix()
    assert np.allclose(P.T(s), h.exact_derivative(1)(s), atol=1e-15)
    F = np.stack([P.T(s), P.N(s), P.B(s)], axis=1)
    assert np.allclose(np.einsum("mij,mkj->mik", F, F), np.eye(3), atol=1e-14)
    assert np.allclose(np.linalg.det(F), 1.0)
    # Bishop normals are the rotation of N, B through theta = 7s/625
    th = P.theta(s)[:, None]
    assert np.allclose(P.N1(s), np.cos(th) * P.N(s) - np.sin(th) * P.B(s), atol=1e-15)
    assert np.allclose(P.N2(s), np.sin(th) * P.N(s) + np.cos(th) * P.B(s), atol=1e-15)
    assert P.first_k1_zero == pytest.approx(140.2496720, abs=1e-6)


def test_sphere_circle_lies_on_sphere():
    c = sphere_circle(2.0, 1.2, [1, 0, 0], [0, 1, 0], [0, 0, 1])
    s = np.linspace(*c.domain, 50)
    assert np.allclose(np.linalg.norm(c.position(s), axis=1), 2.0)
    g = great_circle(3.0)
    assert np.allclose(np.linalg.norm(g.position(s), axis=1), 3.0)


def test_random_trig_curve_is_regular():
    rng = np.random.default_rng(0)
    for dim in (3, 4, 6):
        c = random_trig_curve(rng, dim)
        s = np.linspace(*c.domain, 101)
        assert np.linalg.norm(c.exact_derivative(1)(s), axis=1).min() >= 1.0 - 1e-12


def test_chen_curve_unit_speed():
    c = chen_rectifying_curve(step=1e-2)
    speed = np.linalg.norm(c.sample_derivatives(1), axis=1)
    assert np.abs(speed - 1).max() < 1e-3
    assert twisted_cubic().dim == 3
