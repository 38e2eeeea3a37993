"""Vector algebra, curve representations, differentiation and arclength.

Vectors are plain 1-D ``numpy`` float arrays; the dimension is carried by the
array itself. Curves come in two flavours:

* :class:`AnalyticCurve` wraps a vectorised position evaluator and, optionally,
  exact evaluators for the first three derivatives.
* :class:`SampledCurve` holds an ordered table of ``(s, point)`` rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import (
    DimensionMismatchError,
    DomainError,
    SingularCurveError,
    UnsupportedOrderError,
)

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical knobs shared by every module.

    ``fd_step`` is the first-derivative step, ``fd_step_high`` the
    second-derivative step and ``fd_step_third`` the third-derivative step.
    """

    fd_step: float = 1e-5
    fd_step_high: float = 1e-4
    fd_step_third: float = 1e-2
    ortho_tol: float = 1e-9
    residual_tol: float = 1e-5
    singular_guard: float = 1e-8

    def __post_init__(self):
        for name in (
            "fd_step",
            "fd_step_high",
            "fd_step_third",
            "ortho_tol",
            "residual_tol",
            "singular_guard",
        ):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")

    def step_for(self, order: int) -> float:
        if order == 1:
            return self.fd_step
        if order == 2:
            return self.fd_step_high
        if order == 3:
            return self.fd_step_third
        raise UnsupportedOrderError(f"derivative order {order} not supported (1..3)")


DEFAULT_TOL = ToleranceConfig()


# ---------------------------------------------------------------------------
# vectors


def as_vector(u) -> np.ndarray:
    v = np.asarray(u, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size < 2:
        raise ValueError("vectors must have dimension >= 2")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector components must be finite")
    return v


def inner(u, v) -> float:
    """Standard inner product ``sum(u_i * v_i)``."""
    u = as_vector(u)
    v = as_vector(v)
    if u.size != v.size:
        raise DimensionMismatchError(u.size, v.size)
    return float(np.dot(u, v))


def norm(u) -> float:
    u = as_vector(u)
    return math.sqrt(max(inner(u, u), 0.0))


def unit(u, guard: float = 0.0) -> np.ndarray:
    u = as_vector(u)
    n = norm(u)
    if n <= guard or n == 0.0:
        raise ValueError("cannot normalise a (near) zero vector")
    return u / n


# ---------------------------------------------------------------------------
# curves


class Curve:
    dim: int
    domain: tuple[float, float]

    def position(self, s):
        raise NotImplementedError

    @property
    def s_min(self) -> float:
        return self.domain[0]

    @property
    def s_max(self) -> float:
        return self.domain[1]


class AnalyticCurve(Curve):
    """Curve given by a position evaluator.

    Evaluators take a 1-D array of parameters and return an ``(m, dim)`` array.
    ``derivatives`` is an optional sequence of up to three such evaluators for
    orders 1, 2, 3.
    """

    def __init__(
        self,
        position: Evaluator,
        domain: tuple[float, float],
        derivatives: Optional[Sequence[Optional[Evaluator]]] = None,
        name: str = "analytic",
    ):
        a, b = float(domain[0]), float(domain[1])
        if not a < b:
            raise DomainError(f"empty domain [{a}, {b}]")
        self.domain = (a, b)
        self._position = position
        derivs = list(derivatives or [])
        if len(derivs) > 3:
            raise UnsupportedOrderError("at most three exact derivative evaluators")
        self._derivatives = tuple(derivs) + (None,) * (3 - len(derivs))
        self.name = name
        probe = np.asarray(position(np.array([a])), dtype=float)
        if probe.ndim != 2 or probe.shape[0] != 1:
            raise ValueError("position evaluator must map (m,) -> (m, dim)")
        self.dim = probe.shape[1]
        if self.dim < 2:
            raise ValueError("curves must live in R^n with n >= 2")

    def position(self, s):
        arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.asarray(self._position(arr), dtype=float)
        return out[0] if np.ndim(s) == 0 else out

    def exact_derivative(self, order: int) -> Optional[Evaluator]:
        if not 1 <= order <= 3:
            raise UnsupportedOrderError(f"derivative order {order} not supported (1..3)")
        return self._derivatives[order - 1]

    def with_domain(self, domain) -> "AnalyticCurve":
        return AnalyticCurve(self._position, domain, self._derivatives, self.name)

    def without_derivatives(self) -> "AnalyticCurve":
        return AnalyticCurve(self._position, self.domain, None, self.name)

    def embedded(self, dim: int) -> "AnalyticCurve":
        """The same curve in R^dim, extra coordinates zero."""
        extra = dim - self.dim
        if extra < 0:
            raise DimensionMismatchError(self.dim, dim)
        if extra == 0:
            return self

        def pad(f):
            if f is None:
                return None
            return lambda s: np.hstack([f(s), np.zeros((np.size(s), extra))])

        return AnalyticCurve(pad(self._position), self.domain, [pad(d) for d in self._derivatives], self.name)


class SampledCurve(Curve):
    def __init__(self, s, points, name: str = "sampled"):
        s = np.asarray(s, dtype=float)
        pts = np.asarray(points, dtype=float)
        if s.ndim != 1 or pts.ndim != 2 or pts.shape[0] != s.size:
            raise ValueError("sampled curve needs s of shape (m,) and points of shape (m, dim)")
        if s.size < 2:
            raise ValueError("sampled curve needs at least two samples")
        if pts.shape[1] < 2:
            raise ValueError("curves must live in R^n with n >= 2")
        if np.any(np.diff(s) <= 0):
            raise ValueError("sample parameters must be strictly increasing")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(pts))):
            raise ValueError("sampled curve contains non-finite values")
        self.s = s
        self.points = pts
        self.dim = pts.shape[1]
        self.domain = (float(s[0]), float(s[-1]))
        self.name = name
        self._deriv_cache: dict[int, np.ndarray] = {}

    def __len__(self):
        return self.s.size

    def position(self, s):
        arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.column_stack([np.interp(arr, self.s, self.points[:, k]) for k in range(self.dim)])
        return out[0] if np.ndim(s) == 0 else out

    def sample_derivatives(self, order: int) -> np.ndarray:
        """Derivatives at the sample points.

        Finite-difference weights on a window of ``2 * ((order + 2) // 2) + 1``
        samples, centred in the interior and shifted inwards at the ends; at
        least 2nd-order accurate on any grid.
        """
        if not 1 <= order <= 3:
            raise UnsupportedOrderError(f"derivative order {order} not supported (1..3)")
        if order not in self._deriv_cache:
            self._deriv_cache[order] = _sampled_derivative(self.s, self.points, order)
        return self._deriv_cache[order]


def fd_weights(nodes, x0: float, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``x0`` (Fornberg)."""
    x = np.asarray(nodes, dtype=float)
    n = x.size
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _sampled_derivative(s: np.ndarray, pts: np.ndarray, order: int) -> np.ndarray:
    m = s.size
    width = min(2 * ((order + 4) // 2) + 1, m)
    if width <= order:
        raise ValueError(f"need more than {order} samples for an order-{order} derivative")
    half = width // 2
    starts = np.clip(np.arange(m) - half, 0, m - width)
    steps = np.diff(s)
    uniform = np.allclose(steps, steps[0], rtol=1e-10, atol=0.0)
    out = np.empty_like(pts)
    cache = {}
    for i in range(m):
        lo = starts[i]
        offset = i - lo
        if uniform:
            key = offset
            if key not in cache:
                cache[key] = fd_weights(np.arange(width) * steps[0], offset * steps[0], order)
            w = cache[key]
        else:
            w = fd_weights(s[lo:lo + width], s[i], order)
        out[i] = w @ pts[lo:lo + width]
    return out


# ---------------------------------------------------------------------------
# differentiation

# Central 2nd-order stencils: offsets (in units of h) and weights; divide by h**order.
_CENTRAL = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
}
# Forward 2nd-order stencils; a negative step turns them into backward ones.
_FORWARD = {
    1: ((0, 1, 2), (-1.5, 2.0, -0.5)),
    2: ((0, 1, 2, 3), (2.0, -5.0, 4.0, -1.0)),
    3: ((0, 1, 2, 3, 4), (-2.5, 9.0, -12.0, 7.0, -1.5)),
}


def _stencil(curve: AnalyticCurve, s: np.ndarray, order: int, h: float, table) -> np.ndarray:
    offsets, weights = table[order]
    acc = np.zeros((s.size, curve.dim))
    for off, w in zip(offsets, weights):
        acc += w * curve.position(s + off * h)
    return acc / h**order


def derivatives(
    curve: Curve,
    s,
    order: int,
    cfg: ToleranceConfig = DEFAULT_TOL,
    one_sided_edges: bool = False,
) -> np.ndarray:
    """Vectorised derivative of ``curve`` at parameters ``s``; returns ``(m, dim)``.

    With ``one_sided_edges`` the finite-difference path switches to one-sided
    stencils where the central stencil would leave the domain instead of raising.
    """
    if not 1 <= order <= 3:
        raise UnsupportedOrderError(f"derivative order {order} not supported (1..3)")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    lo, hi = curve.domain
    if np.any(s < lo) or np.any(s > hi):
        bad = s[(s < lo) | (s > hi)][0]
        raise DomainError(f"s={bad:.12g} outside domain [{lo:.12g}, {hi:.12g}]")

    if isinstance(curve, SampledCurve):
        table = curve.sample_derivatives(order)
        return np.column_stack([np.interp(s, curve.s, table[:, k]) for k in range(curve.dim)])

    exact = curve.exact_derivative(order)
    if exact is not None:
        return np.asarray(exact(s), dtype=float)

    h = cfg.step_for(order)
    reach = order * h
    inside = (s >= lo + reach) & (s <= hi - reach)
    if not one_sided_edges:
        if not np.all(inside):
            bad = s[~inside][0]
            raise DomainError(
                f"s={bad:.12g} too close to the domain edge for order-{order} "
                f"differences with step {h:g}"
            )
        return _stencil(curve, s, order, h, _CENTRAL)

    if (hi - lo) < 2 * (order + 1) * h:
        raise DomainError("domain too short for finite differences")
    out = np.empty((s.size, curve.dim))
    if np.any(inside):
        out[inside] = _stencil(curve, s[inside], order, h, _CENTRAL)
    left = (~inside) & (s < lo + reach)
    right = (~inside) & ~left
    if np.any(left):
        out[left] = _stencil(curve, s[left], order, h, _FORWARD)
    if np.any(right):
        out[right] = _stencil(curve, s[right], order, -h, _FORWARD)
    return out


def derivative(curve: Curve, s: float, order: int, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Derivative of the given order (1..3) at a single parameter value."""
    return derivatives(curve, np.array([float(s)]), order, cfg)[0]


def unit_tangents(curve: Curve, s, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    d1 = derivatives(curve, s, 1, cfg, one_sided_edges=True)
    speed = np.linalg.norm(d1, axis=1)
    bad = speed <= cfg.singular_guard
    if np.any(bad):
        k = int(np.argmax(bad))
        raise SingularCurveError(float(np.atleast_1d(s)[k]), float(speed[k]))
    return d1 / speed[:, None]


# ---------------------------------------------------------------------------
# arclength


def arclength_table(curve: Curve, n_probe: int, cfg: ToleranceConfig = DEFAULT_TOL):
    """Cumulative arclength on a uniform probe grid: ``(t, L(t))``."""
    if isinstance(curve, SampledCurve):
        t = curve.s
    else:
        t = np.linspace(curve.s_min, curve.s_max, n_probe)
    speed = np.linalg.norm(derivatives(curve, t, 1, cfg, one_sided_edges=True), axis=1)
    low = speed <= cfg.singular_guard
    if np.any(low):
        k = int(np.argmax(low))
        raise SingularCurveError(float(t[k]), float(speed[k]))
    return t, cumulative_trapezoid(speed, t, initial=0.0)


def arclength_reparam(curve: Curve, n_samples: int, cfg: ToleranceConfig = DEFAULT_TOL) -> SampledCurve:
    """Resample ``curve`` at ``n_samples`` points uniformly spaced in arclength.

    The returned curve is parameterised by cumulative arclength starting at 0.
    """
    if n_samples < 4:
        raise ValueError("n_samples must be >= 4")
    t, length = arclength_table(curve, 4 * n_samples, cfg)
    sigma = np.linspace(0.0, length[-1], n_samples)
    t_of_sigma = np.interp(sigma, length, t)
    t_of_sigma[0], t_of_sigma[-1] = t[0], t[-1]
    return SampledCurve(sigma, curve.position(t_of_sigma), name=f"{getattr(curve, 'name', 'curve')}-arclength")


def total_length(curve: Curve, n_probe: int = 4001, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    return float(arclength_table(curve, n_probe, cfg)[1][-1])
