"""Builtin curves and the closed-form data of the worked helix example.

Every builtin carries exact derivative evaluators, so framing and curvature
computations on them run at analytic precision.
"""

from __future__ import annotations

import numpy as np

from .core import AnalyticCurve, SampledCurve


def _stack(*cols):
    return np.column_stack([np.broadcast_to(c, np.shape(cols[0])) for c in cols])


def line(domain=(0.0, 1.0), direction=(1.0, 0.0, 0.0), origin=None) -> AnalyticCurve:
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    o = np.zeros_like(d) if origin is None else np.asarray(origin, dtype=float)
    zero = np.zeros_like(d)
    return AnalyticCurve(
        lambda s: o + np.outer(s, d),
        domain,
        [
            lambda s: np.tile(d, (np.size(s), 1)),
            lambda s: np.tile(zero, (np.size(s), 1)),
            lambda s: np.tile(zero, (np.size(s), 1)),
        ],
        name="line",
    )


def planar_circle(radius=1.0, domain=None, center=None, e1=None, e2=None) -> AnalyticCurve:
    """Unit-speed circle ``c + r cos(s/r) e1 + r sin(s/r) e2``; xy-plane by default."""
    r = float(radius)
    e1 = np.array([1.0, 0.0, 0.0]) if e1 is None else np.asarray(e1, dtype=float)
    e2 = np.array([0.0, 1.0, 0.0]) if e2 is None else np.asarray(e2, dtype=float)
    c = np.zeros_like(e1) if center is None else np.asarray(center, dtype=float)
    if domain is None:
        domain = (0.0, 2 * np.pi * r)

    def pos(s):
        u = np.asarray(s) / r
        return c + r * (np.outer(np.cos(u), e1) + np.outer(np.sin(u), e2))

    def d1(s):
        u = np.asarray(s) / r
        return np.outer(-np.sin(u), e1) + np.outer(np.cos(u), e2)

    def d2(s):
        u = np.asarray(s) / r
        return (np.outer(-np.cos(u), e1) + np.outer(-np.sin(u), e2)) / r

    def d3(s):
        u = np.asarray(s) / r
        return (np.outer(np.sin(u), e1) + np.outer(-np.cos(u), e2)) / r**2

    return AnalyticCurve(pos, domain, [d1, d2, d3], name="circle")


def great_circle(radius=1.0, domain=None, tilt=np.pi / 5) -> AnalyticCurve:
    """Unit-speed great circle of the origin-centred sphere, tilted out of the xy-plane."""
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, np.cos(tilt), np.sin(tilt)])
    return _renamed(planar_circle(radius, domain, e1=e1, e2=e2), "great-circle")


def sphere_circle(sphere_radius, center_offset, e1, e2, normal, domain=None) -> AnalyticCurve:
    """Small circle on the origin-centred sphere: centre ``center_offset * normal``."""
    rho = float(np.sqrt(sphere_radius**2 - center_offset**2))
    c = center_offset * np.asarray(normal, dtype=float)
    return _renamed(planar_circle(rho, domain, center=c, e1=e1, e2=e2), "sphere-circle")


def helix(a=24.0, b=7.0, c=25.0, domain=(0.0, 120.0)) -> AnalyticCurve:
    """Circular helix ``(a cos(s/c), a sin(s/c), b s / c)``; unit speed when a^2+b^2=c^2."""
    a, b, c = float(a), float(b), float(c)

    def pos(s):
        u = np.asarray(s) / c
        return _stack(a * np.cos(u), a * np.sin(u), b * u)

    def d1(s):
        u = np.asarray(s) / c
        return _stack(-a / c * np.sin(u), a / c * np.cos(u), np.full_like(u, b / c))

    def d2(s):
        u = np.asarray(s) / c
        return _stack(-a / c**2 * np.cos(u), -a / c**2 * np.sin(u), np.zeros_like(u))

    def d3(s):
        u = np.asarray(s) / c
        return _stack(a / c**3 * np.sin(u), -a / c**3 * np.cos(u), np.zeros_like(u))

    return AnalyticCurve(pos, domain, [d1, d2, d3], name="helix")


def twisted_cubic(domain=(-1.0, 1.0)) -> AnalyticCurve:
    def pos(t):
        t = np.asarray(t)
        return _stack(t, t**2, t**3)

    def d1(t):
        t = np.asarray(t)
        return _stack(np.ones_like(t), 2 * t, 3 * t**2)

    def d2(t):
        t = np.asarray(t)
        return _stack(np.zeros_like(t), np.full_like(t, 2.0), 6 * t)

    def d3(t):
        t = np.asarray(t)
        return _stack(np.zeros_like(t), np.zeros_like(t), np.full_like(t, 6.0))

    return AnalyticCurve(pos, domain, [d1, d2, d3], name="twisted-cubic")


def trig_polynomial(coeffs_cos, coeffs_sin, drift, domain=(0.0, 1.0)) -> AnalyticCurve:
    """``drift * t + sum_m a_m cos(m t) + b_m sin(m t)`` with vector coefficients.

    ``coeffs_cos`` and ``coeffs_sin`` have shape ``(M, n)``.
    """
    A = np.asarray(coeffs_cos, dtype=float)
    B = np.asarray(coeffs_sin, dtype=float)
    v = np.asarray(drift, dtype=float)
    m = np.arange(1, A.shape[0] + 1, dtype=float)

    def make(order):
        def ev(t):
            mt = np.outer(np.asarray(t, dtype=float), m)
            c, s = np.cos(mt), np.sin(mt)
            # d^k/dt^k of cos/sin cycles through -sin, -cos, sin, ...
            if order == 0:
                cc, ss = c, s
            elif order == 1:
                cc, ss = -s, c
            elif order == 2:
                cc, ss = -c, -s
            else:
                cc, ss = s, -c
            mk = m**order
            out = (cc * mk) @ A + (ss * mk) @ B
            if order == 0:
                out = out + np.outer(t, v)
            elif order == 1:
                out = out + v
            return out

        return ev

    return AnalyticCurve(make(0), domain, [make(1), make(2), make(3)], name="trig-polynomial")


def random_trig_curve(rng: np.random.Generator, dim: int, n_modes: int = 3, domain=(0.0, 0.5)):
    """Random regular trigonometric-polynomial curve.

    The drift has norm 2 and the oscillating part has speed at most 1, so the
    speed never drops below 1.
    """
    v = rng.normal(size=dim)
    v *= 2.0 / np.linalg.norm(v)
    A = rng.normal(size=(n_modes, dim))
    B = rng.normal(size=(n_modes, dim))
    m = np.arange(1, n_modes + 1)[:, None]
    bound = np.sum(m * (np.linalg.norm(A, axis=1, keepdims=True) + np.linalg.norm(B, axis=1, keepdims=True)))
    A /= bound
    B /= bound
    return trig_polynomial(A, B, v, domain)


def _renamed(curve: AnalyticCurve, name: str) -> AnalyticCurve:
    curve.name = name
    return curve


BUILTINS = {
    "line": lambda p, domain: line(domain=domain),
    "circle": lambda p, domain: planar_circle(p if p is not None else 1.0, domain),
    "helix": lambda p, domain: helix(domain=domain),
    "great-circle": lambda p, domain: great_circle(p if p is not None else 1.0, domain),
    "twisted-cubic": lambda p, domain: twisted_cubic(domain),
}

DEFAULT_RANGES = {
    "line": (0.0, 1.0),
    "circle": None,
    "helix": (0.0, 120.0),
    "great-circle": None,
    "twisted-cubic": (-1.0, 1.0),
}


def builtin(spec: str, domain=None) -> AnalyticCurve:
    """Build a named curve; ``"circle:2"`` passes a radius."""
    name, _, param = spec.partition(":")
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin curve {name!r}; choose from {sorted(BUILTINS)}")
    p = float(param) if param else None
    if domain is None:
        domain = DEFAULT_RANGES[name]
        if domain is None:
            domain = (0.0, 2 * np.pi * (p if p is not None else 1.0))
    return BUILTINS[name](p, domain)


# ---------------------------------------------------------------------------
# worked helix example: mu(s) = (24 cos(s/25), 24 sin(s/25), 7s/25)


class ReferenceHelix:
    """Closed forms for the unit-speed helix with a=24, b=7, c=25."""

    kappa = 24.0 / 625.0
    tau = 7.0 / 625.0

    @staticmethod
    def theta(s):
        return 7.0 * np.asarray(s, dtype=float) / 625.0

    @staticmethod
    def T(s):
        u = np.asarray(s, dtype=float) / 25.0
        return _stack(-24 / 25 * np.sin(u), 24 / 25 * np.cos(u), np.full_like(u, 7 / 25))

    @staticmethod
    def N(s):
        u = np.asarray(s, dtype=float) / 25.0
        return _stack(-np.cos(u), -np.sin(u), np.zeros_like(u))

    @staticmethod
    def B(s):
        u = np.asarray(s, dtype=float) / 25.0
        return _stack(7 / 25 * np.sin(u), -7 / 25 * np.cos(u), np.full_like(u, 24 / 25))

    @staticmethod
    def N1(s):
        u = np.asarray(s, dtype=float) / 25.0
        v = ReferenceHelix.theta(s)
        return _stack(
            -np.cos(v) * np.cos(u) - 7 / 25 * np.sin(v) * np.sin(u),
            -np.cos(v) * np.sin(u) + 7 / 25 * np.cos(u) * np.sin(v),
            -24 / 25 * np.sin(v),
        )

    @staticmethod
    def N2(s):
        u = np.asarray(s, dtype=float) / 25.0
        v = ReferenceHelix.theta(s)
        return _stack(
            -np.sin(v) * np.cos(u) + 7 / 25 * np.cos(v) * np.sin(u),
            -np.sin(v) * np.sin(u) - 7 / 25 * np.cos(v) * np.cos(u),
            24 / 25 * np.cos(v),
        )

    @staticmethod
    def k1(s):
        return ReferenceHelix.kappa * np.cos(ReferenceHelix.theta(s))

    @staticmethod
    def k2(s):
        return ReferenceHelix.kappa * np.sin(ReferenceHelix.theta(s))

    @staticmethod
    def bishop_curvatures(s):
        return np.column_stack([ReferenceHelix.k1(s), ReferenceHelix.k2(s)])

    @staticmethod
    def beta1(s):
        """Printed type-1 closed form ``-(k2/k1) N1 + N2``."""
        v = ReferenceHelix.theta(s)
        return -np.tan(v)[:, None] * ReferenceHelix.N1(s) + ReferenceHelix.N2(s)

    # first singularity of k1 = kappa cos(7s/625)
    first_k1_zero = 625.0 * np.pi / 14.0


def chen_rectifying_curve(domain=(0.5, 2.5), step=1e-2) -> SampledCurve:
    """Unit-speed sampled curve with kappa = 1 and tau = s, so tau/kappa = s.

    Built by integrating the Bishop system with k_1 = cos(s^2/2),
    k_2 = sin(s^2/2) and integrating the tangent for positions.
    """
    from .framing import CurvatureField, Frame, default_initial_frame, rmf_ode

    a, b = map(float, domain)
    s = np.linspace(a, b, int(round((b - a) / step)) + 1)
    cf = CurvatureField.from_function(lambda t: np.column_stack([np.cos(t**2 / 2), np.sin(t**2 / 2)]), s)
    init = Frame(a, default_initial_frame([1.0, 0.0, 0.0]).vectors)
    out = rmf_ode(cf, init, origin=np.zeros(3)).base_curve
    out.name = "chen-rectifying"
    return out
