"""Frenet frames, rotation-minimizing frames and RM curvatures.

Frame vectors are stored row-wise: ``frames[i, 0]`` is the tangent-like
vector xi_1 at sample ``i`` and ``frames[i, j]`` is xi_{j+1}. The RM system
integrated here is

    xi_1'     =  sum_j k_j xi_{j+1}
    xi_{j+1}' = -k_j xi_1

Curvature values are rates per unit of the field parameter; on a unit-speed
curve they are the RM curvatures.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from . import _kernels
from .core import (
    DEFAULT_TOL,
    AnalyticCurve,
    Curve,
    SampledCurve,
    ToleranceConfig,
    derivatives,
    unit_tangents,
)
from .errors import (
    AccuracyError,
    DegenerateStepError,
    FrameDegeneracyError,
    GridMismatchError,
    InsufficientDataError,
)


@dataclass(frozen=True)
class Frame:
    s: float
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def orthonormality_error(self) -> float:
        return float(np.abs(self.vectors @ self.vectors.T - np.eye(self.dim)).max())

    def determinant(self) -> float:
        return float(np.linalg.det(self.vectors))


class FrameField:
    """Orthonormal frames on an increasing parameter grid."""

    def __init__(self, s, frames, base_curve: Optional[Curve] = None):
        s = np.array(s, dtype=float)
        frames = np.array(frames, dtype=float)
        if frames.ndim != 3 or frames.shape[0] != s.size or frames.shape[1] != frames.shape[2]:
            raise ValueError("frames must have shape (m, n, n) matching s")
        if s.size > 1 and np.any(np.diff(s) <= 0):
            raise ValueError("frame parameters must be strictly increasing")
        s.setflags(write=False)
        frames.setflags(write=False)
        self.s = s
        self.frames = frames
        self.base_curve = base_curve

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    def __len__(self):
        return self.s.size

    def __getitem__(self, i) -> Frame:
        return Frame(float(self.s[i]), self.frames[i])

    def vector(self, j: int) -> np.ndarray:
        """All samples of xi_j (1-based, as in the frame equations)."""
        return self.frames[:, j - 1, :]

    def orthonormality_error(self) -> float:
        gram = np.einsum("mij,mkj->mik", self.frames, self.frames)
        return float(np.abs(gram - np.eye(self.dim)).max())

    def determinants(self) -> np.ndarray:
        return np.linalg.det(self.frames)


@dataclass(frozen=True)
class CurvatureField:
    """RM curvatures per sample, optionally with Frenet data (n = 3).

    ``func`` evaluates the curvatures exactly at arbitrary parameters when the
    field comes from a closed form; integrators prefer it over interpolation.
    """

    s: np.ndarray
    k: np.ndarray
    kappa: Optional[np.ndarray] = None
    tau: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None
    residual: Optional[np.ndarray] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = dc_field(default=None, compare=False)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        k = np.asarray(self.k, dtype=float)
        if k.ndim == 1:
            k = k[:, None]
        if k.shape[0] != s.size:
            raise ValueError("curvature samples do not match the parameter grid")
        if s.size > 1 and np.any(np.diff(s) <= 0):
            raise ValueError("curvature parameters must be strictly increasing")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "k", k)

    @property
    def dim(self) -> int:
        return self.k.shape[1] + 1

    def at(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.func is not None:
            return np.asarray(self.func(s), dtype=float).reshape(s.size, -1)
        if self.s.size >= 4:
            return CubicSpline(self.s, self.k, axis=0)(s)
        return np.column_stack([np.interp(s, self.s, self.k[:, j]) for j in range(self.k.shape[1])])

    @classmethod
    def from_function(cls, func, s, **extra) -> "CurvatureField":
        s = np.asarray(s, dtype=float)
        return cls(s, np.asarray(func(s), dtype=float).reshape(s.size, -1), func=func, **extra)


# ---------------------------------------------------------------------------
# helpers


def _orthonormalize(frames: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt on the rows of a batch ``(B, n, n)``; row 0 keeps its direction."""
    out = frames.copy()
    n = out.shape[1]
    for i in range(n):
        v = out[:, i, :]
        for j in range(i):
            v = v - np.einsum("bk,bk->b", v, out[:, j, :])[:, None] * out[:, j, :]
        out[:, i, :] = v / np.linalg.norm(v, axis=1)[:, None]
    return out


def _complete_positive(rows: np.ndarray) -> np.ndarray:
    """Append the unit vector that makes ``rows`` a positively oriented basis."""
    n = rows.shape[1]
    if n == 3 and rows.shape[0] == 2:
        last = np.cross(rows[0], rows[1])
    else:
        _, _, vt = np.linalg.svd(rows)
        last = vt[-1]
    full = np.vstack([rows, last / np.linalg.norm(last)])
    if np.linalg.det(full) < 0:
        full[-1] = -full[-1]
    return full


def default_initial_frame(tangent, s: float = 0.0) -> Frame:
    """Deterministic frame completing ``tangent``.

    xi_2 comes from the ambient basis vector least parallel to the tangent,
    the rest from the remaining basis vectors in index order; the last vector
    is flipped if needed so the determinant is +1.
    """
    t = np.asarray(tangent, dtype=float)
    t = t / np.linalg.norm(t)
    n = t.size
    first = int(np.argmin(np.abs(t)))
    order = [first] + [i for i in range(n) if i != first]
    rows = [t]
    for i in order:
        if len(rows) == n:
            break
        v = np.eye(n)[i]
        for r in rows:
            v = v - np.dot(v, r) * r
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            rows.append(v / nv)
    frame = np.array(rows)
    if np.linalg.det(frame) < 0:
        frame[-1] = -frame[-1]
    return Frame(float(s), frame)


def _check_initial(initial, n: int, cfg: ToleranceConfig) -> np.ndarray:
    vecs = initial.vectors if isinstance(initial, Frame) else np.asarray(initial, dtype=float)
    if vecs.shape != (n, n):
        raise GridMismatchError(f"initial frame has shape {vecs.shape}, expected {(n, n)}")
    err = np.abs(vecs @ vecs.T - np.eye(n)).max()
    if err > max(cfg.ortho_tol, 1e-9) * 1e3:
        raise ValueError(f"initial frame is not orthonormal (error {err:.3g})")
    return vecs


# ---------------------------------------------------------------------------
# Frenet


def _frenet_batch(curve: Curve, s: np.ndarray, cfg: ToleranceConfig):
    n = curve.dim
    if n > 4:
        raise ValueError("Frenet frames are only built for n <= 4; use an RMF for higher dimensions")
    derivs = [derivatives(curve, s, k, cfg, one_sided_edges=True) for k in range(1, max(n - 1, 1) + 1)]
    m = s.size
    frames = np.empty((m, n, n))
    rows = []
    gram = np.ones(m)
    for k, d in enumerate(derivs):
        w = d.copy()
        for r in rows:
            w -= np.einsum("mi,mi->m", w, r)[:, None] * r
        nw = np.linalg.norm(w, axis=1)
        gram = gram * nw**2
        if k > 0 and np.any(gram <= cfg.singular_guard):
            i = int(np.argmax(gram <= cfg.singular_guard))
            raise FrameDegeneracyError(float(s[i]), float(gram[i]))
        if k == 0 and np.any(nw <= cfg.singular_guard):
            i = int(np.argmax(nw <= cfg.singular_guard))
            raise FrameDegeneracyError(float(s[i]), float(gram[i]))
        rows.append(w / nw[:, None])
    for i in range(m):
        frames[i] = _complete_positive(np.array([r[i] for r in rows]))
    return frames, derivs


def frenet_frame(curve: Curve, s: float, cfg: ToleranceConfig = DEFAULT_TOL) -> Frame:
    """Frenet frame (T, N, B, ...) at ``s`` by Gram-Schmidt on the derivatives."""
    frames, _ = _frenet_batch(curve, np.array([float(s)]), cfg)
    return Frame(float(s), frames[0])


def frenet_frames(curve: Curve, s_grid, cfg: ToleranceConfig = DEFAULT_TOL) -> FrameField:
    s = np.asarray(s_grid, dtype=float)
    frames, _ = _frenet_batch(curve, s, cfg)
    return FrameField(s, frames, curve)


def frenet_curvatures(curve: Curve, s_grid, cfg: ToleranceConfig = DEFAULT_TOL):
    """Curvature, torsion and speed of a space curve at ``s_grid``."""
    if curve.dim != 3:
        raise ValueError("curvature/torsion need a curve in R^3")
    s = np.asarray(s_grid, dtype=float)
    d1, d2, d3 = (derivatives(curve, s, k, cfg, one_sided_edges=True) for k in (1, 2, 3))
    speed = np.linalg.norm(d1, axis=1)
    c = np.cross(d1, d2)
    c2 = np.einsum("mi,mi->m", c, c)
    kappa = np.sqrt(c2) / speed**3
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.einsum("mi,mi->m", c, d3) / c2
    return kappa, tau, speed


# ---------------------------------------------------------------------------
# double reflection


def _double_reflection_batch(points: np.ndarray, tangents: np.ndarray, initial: np.ndarray, s=None):
    """Propagate ``initial`` (B, n, n) along B polylines (B, m, n)."""
    frames, bad = _kernels.double_reflection(
        np.ascontiguousarray(points, dtype=float),
        np.ascontiguousarray(tangents, dtype=float),
        np.ascontiguousarray(initial, dtype=float),
    )
    if bad >= 0:
        raise DegenerateStepError(int(bad), float(s[bad]) if s is not None else float("nan"))
    return frames


def rmf_double_reflection(
    curve: Curve,
    s_grid,
    initial: Optional[Frame] = None,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> FrameField:
    """Rotation-minimizing frames by two reflections per step.

    Each step reflects the frame in the bisecting plane of consecutive points,
    then in the bisecting plane of the reflected tangent and the true next
    tangent. With ``initial=None`` the :func:`default_initial_frame` is used.
    """
    s = np.asarray(s_grid, dtype=float)
    if s.size < 2 or np.any(np.diff(s) <= 0):
        raise ValueError("s_grid must be strictly increasing with at least two entries")
    pts = curve.position(s)
    tans = unit_tangents(curve, s, cfg)
    if initial is None:
        initial = default_initial_frame(tans[0], s[0])
    init = _check_initial(initial, curve.dim, cfg)
    if np.abs(init[0] - tans[0]).max() > 1e-6:
        raise ValueError("initial frame's first vector must be the unit tangent at s_grid[0]")
    init = init.copy()
    init[0] = tans[0]
    frames = _double_reflection_batch(pts[None], tans[None], _orthonormalize(init[None]), s)[0]
    return FrameField(s, frames, curve)


# ---------------------------------------------------------------------------
# ODE integration


def _integrate_batch(s: np.ndarray, table: np.ndarray, initial: np.ndarray, origin=None):
    """RK4 over a batch; ``table`` is ``(m-1, 3, B, n-1)`` stage curvatures."""
    nb, n, _ = initial.shape
    with_pos = origin is not None
    org = np.zeros(n) if origin is None else np.asarray(origin, dtype=float)
    frames, pos = _kernels.rk4_frames(
        np.ascontiguousarray(s, dtype=float),
        np.ascontiguousarray(table, dtype=float),
        np.ascontiguousarray(initial, dtype=float),
        with_pos,
        org,
    )
    return frames, (pos if with_pos else None)


def _stage_table(curvatures: CurvatureField) -> np.ndarray:
    """Curvatures at start, midpoint and end of each step: ``(m-1, 3, n-1)``."""
    s = curvatures.s
    mid = 0.5 * (s[:-1] + s[1:])
    km = curvatures.at(mid)
    if curvatures.func is not None:
        ks = curvatures.at(s)
    else:
        ks = curvatures.k
    return np.stack([ks[:-1], km, ks[1:]], axis=1)


def rmf_ode(
    curvatures: CurvatureField,
    initial: Frame,
    cfg: ToleranceConfig = DEFAULT_TOL,
    origin=None,
) -> FrameField:
    """Integrate the RM frame system over the curvature grid (RK4 + renormalisation).

    With ``origin`` given, positions of the integral curve of xi_1 are
    integrated alongside and attached as the field's ``base_curve``.
    """
    s = curvatures.s
    if s.size < 2:
        raise InsufficientDataError("need at least two curvature samples")
    n = curvatures.dim
    init = _check_initial(initial, n, cfg)
    kmax = float(np.abs(curvatures.k).max()) if curvatures.k.size else 0.0
    hmax = float(np.diff(s).max())
    if kmax > 0 and hmax > 0.1 / kmax:
        raise AccuracyError(
            f"grid step {hmax:.3g} exceeds 0.1/max|k| = {0.1 / kmax:.3g}; refine the grid"
        )
    table = _stage_table(curvatures)[:, :, None, :]
    frames, pos = _integrate_batch(s, table, _orthonormalize(init[None]), origin)
    base = SampledCurve(s, pos[0], name="rmf-ode") if pos is not None else None
    return FrameField(s, frames[0], base)


# ---------------------------------------------------------------------------
# curvatures


def _field_tangent_derivative(field: FrameField, method: str) -> np.ndarray:
    curve = field.base_curve
    analytic = (
        isinstance(curve, AnalyticCurve)
        and curve.exact_derivative(1) is not None
        and curve.exact_derivative(2) is not None
    )
    if method == "analytic" and not analytic:
        raise ValueError("analytic curvatures need a base curve with exact derivatives")
    if method == "analytic" or (method == "auto" and analytic):
        d1 = curve.exact_derivative(1)(field.s)
        d2 = curve.exact_derivative(2)(field.s)
        speed = np.linalg.norm(d1, axis=1)
        t = d1 / speed[:, None]
        return (d2 - np.einsum("mi,mi->m", d2, t)[:, None] * t) / speed[:, None]
    return np.gradient(field.frames[:, 0, :], field.s, axis=0, edge_order=2)


def rm_curvatures(field: FrameField, cfg: ToleranceConfig = DEFAULT_TOL, method: str = "fd") -> CurvatureField:
    """k_j = <xi_1', xi_{j+1}> along the field, with the reconstruction residual.

    ``method="fd"`` differentiates xi_1 along the samples (2nd order);
    ``"analytic"`` uses the base curve's exact derivatives; ``"auto"`` picks
    analytic when available.
    """
    if len(field) < 3:
        raise InsufficientDataError(f"need at least 3 frames, got {len(field)}")
    if method not in ("fd", "analytic", "auto"):
        raise ValueError(f"unknown method {method!r}")
    d = _field_tangent_derivative(field, method)
    normals = field.frames[:, 1:, :]
    k = np.einsum("mi,mji->mj", d, normals)
    resid = np.linalg.norm(d - np.einsum("mj,mji->mi", k, normals), axis=1)
    return CurvatureField(field.s, k, residual=resid)


def frenet_as_rmf(curve: Curve, s_grid, cfg: ToleranceConfig = DEFAULT_TOL):
    """Reorder the Frenet frame as (N, B, T), an RMF of the integral curve of N.

    Curvatures follow k_1 = tau, k_2 = -kappa (scaled by the speed so they are
    rates per unit of the curve parameter).
    """
    if curve.dim != 3:
        raise ValueError("frenet_as_rmf is defined for space curves (n = 3)")
    s = np.asarray(s_grid, dtype=float)
    kappa, tau, speed = frenet_curvatures(curve, s, cfg)
    low = kappa <= cfg.singular_guard
    if np.any(low):
        i = int(np.argmax(low))
        raise FrameDegeneracyError(float(s[i]), float(kappa[i]) ** 2)
    fr = frenet_frames(curve, s, cfg).frames
    reordered = fr[:, [1, 2, 0], :]
    # (N, B, T) is an even permutation of (T, N, B): determinant stays +1.
    normals = reordered[:, 0, :]
    integral = cumulative_trapezoid(normals, s, axis=0, initial=0.0) if s.size > 1 else normals * 0
    base = SampledCurve(s, integral, name="integral-of-N") if s.size > 1 else None
    theta = cumulative_trapezoid(tau * speed, s, initial=0.0) if s.size > 1 else np.zeros_like(s)
    k = np.column_stack([tau * speed, -kappa * speed])
    curv = CurvatureField(s, k, kappa=kappa, tau=tau, theta=theta)
    return FrameField(s, reordered, base), curv


def bishop_curvatures(curve: Curve, s_grid, cfg: ToleranceConfig = DEFAULT_TOL, theta0: float = 0.0):
    """Bishop curvatures k_1 = kappa cos(theta), k_2 = kappa sin(theta), theta = int tau ds."""
    s = np.asarray(s_grid, dtype=float)
    kappa, tau, speed = frenet_curvatures(curve, s, cfg)
    theta = theta0 + cumulative_trapezoid(tau * speed, s, initial=0.0)
    k = np.column_stack([kappa * np.cos(theta) * speed, kappa * np.sin(theta) * speed])
    return CurvatureField(s, k, kappa=kappa, tau=tau, theta=theta)


def bishop_initial_frame(curve: Curve, s: float, theta: float = 0.0, cfg: ToleranceConfig = DEFAULT_TOL) -> Frame:
    """{T, cos(theta) N - sin(theta) B, sin(theta) N + cos(theta) B} at ``s``."""
    f = frenet_frame(curve, s, cfg).vectors
    c, sn = np.cos(theta), np.sin(theta)
    return Frame(float(s), np.array([f[0], c * f[1] - sn * f[2], sn * f[1] + c * f[2]]))


# ---------------------------------------------------------------------------
# diagnostics


def rm_residual(field: FrameField) -> np.ndarray:
    """Per-sample RM defect of the normals: max_j |xi_j' - <xi_j', xi_1> xi_1| / max(1, |xi_j'|).

    Interior samples only; derivatives by 2nd-order differences along the field.
    """
    return rm_residual_batch(field.s, field.frames[None])[0]


def rm_residual_batch(s: np.ndarray, frames: np.ndarray) -> np.ndarray:
    """:func:`rm_residual` for ``(B, m, n, n)`` frames on a shared grid; returns ``(B, m - 2)``."""
    d = np.gradient(frames[:, :, 1:, :], s, axis=1, edge_order=2)
    t = frames[:, :, 0, :]
    along = np.einsum("bmji,bmi->bmj", d, t)
    perp = d - along[..., None] * t[:, :, None, :]
    scale = np.maximum(1.0, np.linalg.norm(d, axis=3))
    return (np.linalg.norm(perp, axis=3) / scale).max(axis=2)[:, 1:-1]


def angular_deviation(a: FrameField, b: FrameField) -> float:
    """Largest angle (radians) between corresponding frame vectors of two fields."""
    if a.frames.shape != b.frames.shape or not np.allclose(a.s, b.s):
        raise GridMismatchError("frame fields are not on the same grid")
    chord = np.linalg.norm(a.frames - b.frames, axis=2)
    return float((2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))).max())
