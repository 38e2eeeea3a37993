"""Rectifying-type curves built from an RM frame field.

A type-``j`` curve in R^n is

    psi(s) = sum_i c_i(s) xi_{i+1}(s),   i = 1..n-1,

where every coefficient is constant except ``c_j``. Requiring psi' to carry no
xi_1 component fixes the free coefficient:

    c_j = -(sum_{i != j} c_i k_i) / k_j
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field, replace
from typing import Optional

import numpy as np

from .core import DEFAULT_TOL, Curve, SampledCurve, ToleranceConfig, derivatives
from .errors import (
    FitDegeneracyError,
    GridMismatchError,
    NotConstantError,
    SingularityError,
    ZeroVectorError,
)
from .framing import CurvatureField, FrameField

# relative standard deviation thresholds for "constant" / "indeterminate"
CONSTANT_RTOL = 1e-6
INDETERMINATE_RTOL = 1e-3


@dataclass(frozen=True)
class RectifyingSpec:
    n: int
    type_index: int
    constants: tuple
    free_coeff: Optional[np.ndarray] = dc_field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("ambient dimension must be >= 2")
        if not 1 <= self.type_index <= self.n - 1:
            raise ValueError(f"type_index must be in 1..{self.n - 1}, got {self.type_index}")
        consts = tuple(float(c) for c in self.constants)
        if len(consts) != self.n - 2:
            raise ValueError(f"expected {self.n - 2} constants, got {len(consts)}")
        object.__setattr__(self, "constants", consts)

    def fixed_slots(self) -> list[int]:
        """1-based coefficient slots holding the constants, in order."""
        return [i for i in range(1, self.n) if i != self.type_index]

    def coefficients(self, m: Optional[int] = None) -> np.ndarray:
        """Per-sample coefficient table ``(m, n-1)``; slot ``j`` holds the free coefficient."""
        if self.free_coeff is None:
            raise ValueError("free coefficient not derived yet")
        free = np.asarray(self.free_coeff, dtype=float)
        if m is not None and free.size != m:
            raise GridMismatchError(f"free coefficient has {free.size} samples, field has {m}")
        table = np.empty((free.size, self.n - 1))
        for slot, c in zip(self.fixed_slots(), self.constants):
            table[:, slot - 1] = c
        table[:, self.type_index - 1] = free
        return table

    def with_constant_free(self, value: float, m: int) -> "RectifyingSpec":
        return replace(self, free_coeff=np.full(m, float(value)))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "type_index": self.type_index, "constants": list(self.constants)})

    @classmethod
    def from_json(cls, text: str) -> "RectifyingSpec":
        d = json.loads(text)
        return cls(int(d["n"]), int(d["type_index"]), tuple(d["constants"]))


def relative_variation(values) -> float:
    """Standard deviation relative to the mean magnitude (absolute when the mean is ~0)."""
    v = np.asarray(values, dtype=float)
    sd = float(np.std(v))
    mean = abs(float(np.mean(v)))
    return sd / mean if mean > 1e-300 and sd > 0 else sd


def constancy_verdict(values) -> str:
    rv = relative_variation(values)
    if rv < CONSTANT_RTOL:
        return "constant"
    if rv < INDETERMINATE_RTOL:
        return "indeterminate"
    return "varying"


def _zero_crossings(s: np.ndarray, k: np.ndarray) -> list[float]:
    sign = np.sign(k)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    return [float(s[i] - k[i] * (s[i + 1] - s[i]) / (k[i + 1] - k[i])) for i in idx]


def derive_free_coefficient(
    curvatures: CurvatureField, spec: RectifyingSpec, cfg: ToleranceConfig = DEFAULT_TOL
) -> RectifyingSpec:
    """Fill ``spec.free_coeff`` so that psi' has no xi_1 component."""
    if curvatures.dim != spec.n:
        raise GridMismatchError(f"curvature field is for n={curvatures.dim}, spec for n={spec.n}")
    k = curvatures.k
    s = curvatures.s
    m = s.size
    if not any(spec.constants):
        return replace(spec, free_coeff=np.zeros(m))
    kj = k[:, spec.type_index - 1]
    small = np.abs(kj) <= cfg.singular_guard
    crossings = _zero_crossings(s, kj)
    if np.any(small) or crossings:
        where = sorted(set([float(x) for x in s[small]] + crossings))
        shown = ", ".join(f"{x:.12g}" for x in where[:8])
        more = "" if len(where) <= 8 else f" (+{len(where) - 8} more)"
        raise SingularityError(
            f"k_{spec.type_index} vanishes on the grid near s = {shown}{more}", where
        )
    numer = np.zeros(m)
    for slot, c in zip(spec.fixed_slots(), spec.constants):
        numer += c * k[:, slot - 1]
    return replace(spec, free_coeff=-numer / kj)


def construct_type_curve(field: FrameField, spec: RectifyingSpec) -> SampledCurve:
    """psi(s) = sum_i c_i(s) xi_{i+1}(s) on the field's grid."""
    if field.dim != spec.n:
        raise GridMismatchError(f"field is in R^{field.dim}, spec in R^{spec.n}")
    coeffs = spec.coefficients(len(field))
    psi = np.einsum("mj,mjk->mk", coeffs, field.frames[:, 1:, :])
    return SampledCurve(field.s, psi, name=f"type-{spec.type_index}")


@dataclass
class DerivativeReport:
    xi1_residual: float
    fixed_residuals: dict
    free_slot_norm: float

    def to_dict(self):
        return {
            "xi1_residual": self.xi1_residual,
            "fixed_residuals": {f"xi{k}": v for k, v in self.fixed_residuals.items()},
            "free_slot_norm": self.free_slot_norm,
        }


def verify_derivative_rectifying(
    field: FrameField, spec: RectifyingSpec, cfg: ToleranceConfig = DEFAULT_TOL
) -> DerivativeReport:
    """Differentiate psi along the grid and measure its frame components.

    With the derived coefficient psi' is parallel to xi_{j+1}: the xi_1 and
    fixed-slot components vanish up to discretisation error. Maxima are over
    interior samples.
    """
    psi = construct_type_curve(field, spec)
    d = np.gradient(psi.points, field.s, axis=0, edge_order=2)
    comps = np.einsum("mk,mjk->mj", d, field.frames)[1:-1]
    if comps.shape[0] == 0:
        comps = np.einsum("mk,mjk->mj", d, field.frames)
    fixed = {slot + 1: float(np.abs(comps[:, slot]).max()) for slot in spec.fixed_slots()}
    return DerivativeReport(
        xi1_residual=float(np.abs(comps[:, 0]).max()),
        fixed_residuals=fixed,
        free_slot_norm=float(np.abs(comps[:, spec.type_index]).max()),
    )


@dataclass
class AxisReport:
    axis: np.ndarray
    constancy_residual: float
    angle_residuals: dict
    cosines: dict

    def to_dict(self):
        return {
            "axis": self.axis.tolist(),
            "constancy_residual": self.constancy_residual,
            "angle_residuals": {f"xi{k}": v for k, v in self.angle_residuals.items()},
            "mean_cosines": {f"xi{k}": float(np.mean(v)) for k, v in self.cosines.items()},
        }


def helix_axis(
    field: FrameField,
    curvatures: CurvatureField,
    spec: RectifyingSpec,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> AxisReport:
    """Constant vector U = sum_i c_i xi_{i+1} when the free coefficient is constant.

    Reports how constant U is along the field and, for each normal xi_{i+1},
    how constant its angle with U is (the integral curves of xi_{i+1} are then
    helices with axis U).
    """
    if spec.free_coeff is None:
        spec = derive_free_coefficient(curvatures, spec, cfg)
    rv = relative_variation(spec.free_coeff)
    if rv >= CONSTANT_RTOL:
        raise NotConstantError(rv)
    U = np.einsum("mj,mjk->mk", spec.coefficients(len(field)), field.frames[:, 1:, :])
    constancy = float(np.linalg.norm(U - U[0], axis=1).max())
    mean_u = U.mean(axis=0)
    nu = np.linalg.norm(mean_u)
    if nu == 0.0:
        return AxisReport(mean_u, constancy, {j: 0.0 for j in range(2, spec.n + 1)},
                          {j: np.zeros(len(field)) for j in range(2, spec.n + 1)})
    u_hat = mean_u / nu
    cosines = {j: field.vector(j) @ u_hat for j in range(2, spec.n + 1)}
    resid = {j: float(np.abs(c - c.mean()).max()) for j, c in cosines.items()}
    return AxisReport(u_hat, constancy, resid, cosines)


@dataclass
class SphericalFactor:
    s: np.ndarray
    scale: np.ndarray
    direction: np.ndarray
    sphere_dim: int
    omega: float
    phase: float
    sec_misfit: float
    is_sec_profile: bool
    unit_residual: float

    def to_dict(self):
        return {
            "sphere_dim": self.sphere_dim,
            "omega": self.omega,
            "phase": self.phase,
            "sec_misfit": self.sec_misfit,
            "is_sec_profile": self.is_sec_profile,
            "unit_residual": self.unit_residual,
        }


def spherical_factorization(
    psi: Curve, c: float, cfg: ToleranceConfig = DEFAULT_TOL, grid=None, sec_tol: float = 1e-4
) -> SphericalFactor:
    """Split psi into ``scale(s) * Y(s)`` with ``|Y| = 1`` and test ``scale = c sec(omega s + phase)``."""
    if c == 0:
        raise ValueError("c must be non-zero")
    if grid is None:
        if not isinstance(psi, SampledCurve):
            raise ValueError("pass a grid for analytic curves")
        grid = psi.s
    s = np.asarray(grid, dtype=float)
    pts = psi.position(s)
    scale = np.linalg.norm(pts, axis=1)
    if np.any(scale <= cfg.singular_guard):
        i = int(np.argmax(scale <= cfg.singular_guard))
        raise ZeroVectorError(f"psi vanishes at s={s[i]:.12g}")
    Y = pts / scale[:, None]
    unit_res = float(np.abs(np.linalg.norm(Y, axis=1) - 1.0).max())

    ac = abs(float(c))
    theta = np.arccos(np.clip(ac / scale, -1.0, 1.0))
    i0 = int(np.argmin(theta))
    if 0 < i0 < s.size - 1:
        theta[:i0] = -theta[:i0]
    omega, phase = np.polyfit(s, theta, 1)
    with np.errstate(divide="ignore", over="ignore"):
        fitted = ac / np.cos(omega * s + phase)
    misfit = float(np.abs(fitted - scale).max() / scale.max())
    if not np.isfinite(misfit):
        misfit = float("inf")
    is_sec = bool(misfit < sec_tol and abs(omega) * (s[-1] - s[0]) > 1e-6)
    return SphericalFactor(s, scale, Y, pts.shape[1] - 1, float(omega), float(phase), misfit, is_sec, unit_res)


# ---------------------------------------------------------------------------
# spheres


def fit_sphere(points: np.ndarray, rel_rank_tol: float = 1e-9):
    """Least-squares sphere through points (linear Coope formulation).

    The fit is done inside the affine hull of the data, so planar data gets
    the plane-centred circle. Returns ``(center, radius, affine_dim)``.
    """
    pts = np.asarray(points, dtype=float)
    mean = pts.mean(axis=0)
    X = pts - mean
    _, sv, vt = np.linalg.svd(X, full_matrices=False)
    if sv.size == 0 or sv[0] == 0:
        raise FitDegeneracyError("all points coincide")
    d = int(np.sum(sv > rel_rank_tol * sv[0]))
    if d < 2:
        raise FitDegeneracyError("points are collinear; no sphere is determined")
    basis = vt[:d]
    Y = X @ basis.T
    A = np.column_stack([2.0 * Y, np.ones(len(Y))])
    rhs = np.einsum("mi,mi->m", Y, Y)
    if np.linalg.cond(A) > 1e12:
        raise FitDegeneracyError("sphere fit is ill-conditioned")
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    cy, e = sol[:d], sol[d]
    r2 = e + cy @ cy
    if r2 <= 0:
        raise FitDegeneracyError("sphere fit produced a non-positive radius")
    return mean + cy @ basis, float(np.sqrt(r2)), d


@dataclass
class SphericalCoefficients:
    a: np.ndarray
    radius: float
    relation_residual: float
    constancy_residual: float
    center: np.ndarray
    fit_radius: float
    distance_residual: float
    affine_dim: int

    def to_dict(self):
        return {
            "a": self.a.tolist(),
            "radius": self.radius,
            "relation_residual": self.relation_residual,
            "constancy_residual": self.constancy_residual,
            "center": self.center.tolist(),
            "fit_radius": self.fit_radius,
            "distance_residual": self.distance_residual,
            "affine_dim": self.affine_dim,
        }


def spherical_coefficients(
    alpha: Curve,
    field: FrameField,
    curvatures: CurvatureField,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> SphericalCoefficients:
    """Coefficients a_i of alpha - center in the normals xi_{i+1}.

    For a spherical curve they are constant, satisfy sum a_i k_i + 1 = 0 with
    arclength curvatures, and r^2 = sum a_i^2 is the sphere radius squared.
    """
    if len(field) != curvatures.s.size or not np.allclose(field.s, curvatures.s):
        raise GridMismatchError("frame field and curvature field grids differ")
    s = field.s
    pts = alpha.position(s)
    center, fit_r, dim = fit_sphere(pts)
    rel = pts - center
    proj = np.einsum("mk,mjk->mj", rel, field.frames[:, 1:, :])
    a = proj.mean(axis=0)
    constancy = float(np.abs(proj - a).max())
    speed = np.linalg.norm(derivatives(alpha, s, 1, cfg, one_sided_edges=True), axis=1)
    k_arc = curvatures.k / speed[:, None]
    relation = float(np.abs(k_arc @ a + 1.0).max())
    dist = np.linalg.norm(rel, axis=1)
    radius = float(np.sqrt(a @ a))
    return SphericalCoefficients(
        a=a,
        radius=radius,
        relation_residual=relation,
        constancy_residual=constancy,
        center=center,
        fit_radius=fit_r,
        distance_residual=float(np.abs(dist - fit_r).max() / fit_r),
        affine_dim=dim,
    )
