"""Curve classification with quantified residuals.

Every test returns a :class:`ClassEntry` whose verdict follows from its
residual alone: ``yes`` below ``residual_tol``, ``indeterminate`` below
``1e3 * residual_tol``, ``no`` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import DEFAULT_TOL, Curve, SampledCurve, ToleranceConfig, derivatives
from .errors import FrameDegeneracyError, GridMismatchError, NumericalError
from .framing import (
    CurvatureField,
    FrameField,
    frenet_curvatures,
    rm_curvatures,
    rmf_double_reflection,
)
from .rectifying import spherical_coefficients

CHEN_MIN_SLOPE = 1e-6
INDETERMINATE_FACTOR = 1e3


def verdict_for(residual: float, tol: float) -> str:
    if residual < tol:
        return "yes"
    if residual < INDETERMINATE_FACTOR * tol:
        return "indeterminate"
    return "no"


@dataclass
class ClassEntry:
    verdict: str
    residual: float
    params: list
    degenerate: bool = False
    notes: list = dc_field(default_factory=list)

    @classmethod
    def from_residual(cls, residual, tol, params, degenerate=False, notes=None):
        residual = float(max(residual, 0.0))
        return cls(verdict_for(residual, tol), residual, [float(p) for p in params], degenerate, notes or [])

    def to_dict(self):
        d = {
            "verdict": self.verdict,
            "residual": self.residual,
            "params": self.params,
            "degenerate": self.degenerate,
        }
        if self.notes:
            d["notes"] = self.notes
        return d


@dataclass
class ClassificationReport:
    entries: dict = dc_field(default_factory=dict)

    @property
    def verdicts(self):
        return {k: e.verdict for k, e in self.entries.items()}

    @property
    def residuals(self):
        return {k: e.residual for k, e in self.entries.items()}

    @property
    def fitted_params(self):
        return {k: e.params for k, e in self.entries.items()}

    def to_dict(self):
        return {k: e.to_dict() for k, e in self.entries.items()}


def default_grid(curve: Curve, n: int = 1001) -> np.ndarray:
    if isinstance(curve, SampledCurve):
        return curve.s
    return np.linspace(curve.s_min, curve.s_max, n)


def _arclength(curve: Curve, s: np.ndarray, cfg) -> np.ndarray:
    speed = np.linalg.norm(derivatives(curve, s, 1, cfg, one_sided_edges=True), axis=1)
    return s[0] + cumulative_trapezoid(speed, s, initial=0.0)


def is_rectifying_chen(curve: Curve, cfg: ToleranceConfig = DEFAULT_TOL, grid=None) -> ClassEntry:
    """tau/kappa must be a non-constant linear function of arclength.

    The residual adds the RMS misfit of the linear fit (relative to the ratio's
    magnitude) and a penalty that reaches 1 as the slope drops to zero.
    """
    if curve.dim != 3:
        raise ValueError("Chen's characterisation applies to space curves")
    s = default_grid(curve) if grid is None else np.asarray(grid, dtype=float)
    kappa, tau, _ = frenet_curvatures(curve, s, cfg)
    if np.any(kappa <= cfg.singular_guard):
        i = int(np.argmax(kappa <= cfg.singular_guard))
        raise FrameDegeneracyError(float(s[i]), float(kappa[i]) ** 2)
    ratio = tau / kappa
    sigma = _arclength(curve, s, cfg)
    slope, intercept = np.polyfit(sigma, ratio, 1)
    misfit = float(np.sqrt(np.mean((ratio - (slope * sigma + intercept)) ** 2)))
    misfit /= max(1.0, float(np.abs(ratio).max()))
    gate = max(0.0, 1.0 - abs(slope) / CHEN_MIN_SLOPE)
    notes = ["constant tau/kappa"] if gate > 0 else []
    return ClassEntry.from_residual(misfit + gate, cfg.residual_tol, [slope, intercept], notes=notes)


def _principal_normals(curve: Curve, s: np.ndarray, cfg):
    d1 = derivatives(curve, s, 1, cfg, one_sided_edges=True)
    d2 = derivatives(curve, s, 2, cfg, one_sided_edges=True)
    t = d1 / np.linalg.norm(d1, axis=1)[:, None]
    w = d2 - np.einsum("mi,mi->m", d2, t)[:, None] * t
    nw = np.linalg.norm(w, axis=1)
    scale = np.maximum(np.linalg.norm(d1, axis=1) ** 2, 1e-300)
    if np.any(nw / scale <= cfg.singular_guard):
        i = int(np.argmax(nw / scale <= cfg.singular_guard))
        raise FrameDegeneracyError(float(s[i]), float(nw[i]) ** 2)
    return w / nw[:, None]


def is_rectifying_position(curve: Curve, cfg: ToleranceConfig = DEFAULT_TOL, grid=None) -> ClassEntry:
    """Position vector orthogonal to the principal normal: max |<beta, N>| / |beta|."""
    s = default_grid(curve) if grid is None else np.asarray(grid, dtype=float)
    n_beta = _principal_normals(curve, s, cfg)
    pos = curve.position(s)
    norms = np.linalg.norm(pos, axis=1)
    ok = norms > cfg.singular_guard
    if not np.any(ok):
        return ClassEntry.from_residual(0.0, cfg.residual_tol, [], degenerate=True, notes=["zero curve"])
    resid = np.abs(np.einsum("mi,mi->m", pos[ok], n_beta[ok])) / norms[ok]
    return ClassEntry.from_residual(float(resid.max()), cfg.residual_tol, [])


def is_rectifying_type_myller(s, dr_components, frame_products, cfg: ToleranceConfig = DEFAULT_TOL) -> ClassEntry:
    """Both derivative identities: d<r, xi_1>/ds = a_1 and d<r, xi_3>/ds = a_3.

    ``dr_components`` is ``(m, 3)`` (a_1, a_2, a_3) of dr/ds in the frame and
    ``frame_products`` is ``(m, 2)`` holding <r, xi_1> and <r, xi_3>.
    """
    s = np.asarray(s, dtype=float)
    a = np.asarray(dr_components, dtype=float)
    p = np.asarray(frame_products, dtype=float)
    if a.shape != (s.size, 3) or p.shape != (s.size, 2):
        raise GridMismatchError("component arrays are not aligned with the parameter grid")
    from .core import _sampled_derivative

    dp = _sampled_derivative(s, p, 1)
    r1 = float(np.abs(dp[:, 0] - a[:, 0]).max())
    r3 = float(np.abs(dp[:, 1] - a[:, 2]).max())
    degenerate = bool(np.all(a == 0) and np.all(p == 0))
    notes = ["zero curve"] if degenerate else []
    return ClassEntry.from_residual(max(r1, r3), cfg.residual_tol, [r1, r3], degenerate=degenerate, notes=notes)


def is_helix(curve: Curve, cfg: ToleranceConfig = DEFAULT_TOL, grid=None) -> ClassEntry:
    """Constant angle between the tangent and a fixed axis.

    The axis minimises the variance of <T, U>: it is the eigenvector of the
    smallest eigenvalue of the tangent covariance, and the residual is the
    standard deviation of <T, U>. Params: axis components then mean cosine.
    """
    s = default_grid(curve) if grid is None else np.asarray(grid, dtype=float)
    d1 = derivatives(curve, s, 1, cfg, one_sided_edges=True)
    t = d1 / np.linalg.norm(d1, axis=1)[:, None]
    mean_t = t.mean(axis=0)
    cov = (t - mean_t).T @ (t - mean_t) / len(t)
    w, v = np.linalg.eigh(cov)
    notes = []
    degenerate = False
    if w[-1] < 1e-24:
        axis = mean_t / np.linalg.norm(mean_t)
        degenerate = True
        notes.append("straight line")
    else:
        axis = v[:, 0]
    cosines = t @ axis
    if cosines.mean() < 0:
        axis, cosines = -axis, -cosines
    resid = float(np.std(cosines)) if not degenerate else 0.0
    if abs(cosines.mean()) < 1e-12:
        degenerate = True
        notes.append("planar (axis normal to the plane)")
    return ClassEntry.from_residual(resid, cfg.residual_tol, list(axis) + [cosines.mean()], degenerate, notes)


def is_spherical(
    curve: Curve,
    field: Optional[FrameField] = None,
    curvatures: Optional[CurvatureField] = None,
    cfg: ToleranceConfig = DEFAULT_TOL,
    grid=None,
) -> ClassEntry:
    """Sphere-fit distance constancy and the affine RM-curvature relation.

    Params: center components, radius, then a_1..a_{n-1}.
    """
    if field is None:
        s = default_grid(curve) if grid is None else np.asarray(grid, dtype=float)
        field = rmf_double_reflection(curve, s, cfg=cfg)
    if curvatures is None:
        curvatures = rm_curvatures(field, cfg, method="auto")
    sc = spherical_coefficients(curve, field, curvatures, cfg)
    resid = max(sc.distance_residual, sc.relation_residual)
    notes = []
    if sc.affine_dim < curve.dim:
        notes.append("data spans a proper affine subspace; sphere centred in that subspace")
    return ClassEntry.from_residual(resid, cfg.residual_tol, list(sc.center) + [sc.radius] + list(sc.a), notes=notes)


def is_bertrand(curvatures: CurvatureField, cfg: ToleranceConfig = DEFAULT_TOL) -> ClassEntry:
    """Fit a k_1 + b k_2 + 1 = 0 with k_1 = tau, k_2 = -kappa (minimal-norm least squares)."""
    if curvatures.kappa is None or curvatures.tau is None:
        raise ValueError("Bertrand test needs Frenet curvature and torsion samples")
    A = np.column_stack([curvatures.tau, -curvatures.kappa])
    if np.abs(A).max() <= cfg.singular_guard:
        raise NumericalError("curvature and torsion vanish identically (straight line)")
    sol, *_ = np.linalg.lstsq(A, -np.ones(len(A)), rcond=1e-10)
    resid = float(np.abs(A @ sol + 1.0).max())
    return ClassEntry.from_residual(resid, cfg.residual_tol, list(sol))


def classify_curve(curve: Curve, cfg: ToleranceConfig = DEFAULT_TOL, grid=None) -> ClassificationReport:
    """Run every classifier that applies to the curve's dimension.

    Classifiers that hit a degeneracy record a ``no`` with the error text.
    """
    from .framing import frenet_as_rmf

    s = default_grid(curve) if grid is None else np.asarray(grid, dtype=float)
    report = ClassificationReport()

    def attempt(name, fn):
        try:
            report.entries[name] = fn()
        except (NumericalError, ValueError) as exc:
            report.entries[name] = ClassEntry("no", float("inf"), [], True, [str(exc)])

    attempt("helix", lambda: is_helix(curve, cfg, s))
    attempt("spherical", lambda: is_spherical(curve, cfg=cfg, grid=s))
    if curve.dim == 3:
        attempt("rectifying-chen", lambda: is_rectifying_chen(curve, cfg, s))
        attempt("bertrand", lambda: is_bertrand(frenet_as_rmf(curve, s, cfg)[1], cfg))
    return report
