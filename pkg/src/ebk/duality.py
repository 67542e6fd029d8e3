"""Legendre duality: convex conjugates, support functions, and the pointwise
hypersurface transform p -> n(p) / <p, n(p)> together with its inverse use,
reconstructing a level surface from the point cloud {k / a(k)}.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree

from .errors import (
    ConfigError,
    ConvergenceFailure,
    InsufficientCloud,
    NotAttained,
    TooFewNicePoints,
)
from .profiles import ToricProfile
from .surfaces import (
    DEFAULT_RESOLUTION,
    LevelSurface,
    Orientation,
    SUPPORT_FLOOR,
)

CURVATURE_FLOOR = 1e-8      # |K| below this marks a non-nice (flat) sample
NICE_FRACTION_MIN = 0.5     # required share of nice samples for the transform
INJECTIVITY_RATIO = 0.1     # post/pre spacing ratio below this drops a sample
CLOUD_DEDUP_TOL = 1e-12
MIN_CLOUD_POINTS = 20
MIN_NICE_POINTS = 10


@dataclass(frozen=True)
class PointCloud:
    """Deduplicated planar point set, the raw input to reconstruction."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ConfigError("point cloud must have shape (N, 2)")
        if not np.all(np.isfinite(pts)):
            raise ConfigError("point cloud contains non-finite coordinates")
        if len(pts) > 1:
            tree = cKDTree(pts)
            dupes = tree.query_pairs(CLOUD_DEDUP_TOL, output_type="ndarray")
            if len(dupes):
                drop = np.zeros(len(pts), dtype=bool)
                drop[dupes[:, 1]] = True
                pts = pts[~drop]
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_actions(cls, actions) -> "PointCloud":
        """Cloud {k / a(k)} over the entries of an action spectrum."""
        K = actions.directions.astype(float)
        return cls(points=K / actions.actions[:, None])


def convex_conjugate(profile: ToricProfile, q, tol: float = 1e-10,
                     max_iter: int = 80, box: float = 1e8) -> tuple[float, np.ndarray]:
    """sup_p (<p, q> - f(p)) via damped Newton on grad f(p) = q.

    Returns (value, argmax). Raises NotAttained when the objective grows
    without bound along the ray through q (degree-1 profiles outside the
    dual unit ball), ConvergenceFailure when no stationary point is found.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    n = profile.dimension
    if q.shape != (n,):
        raise ConfigError(f"q must have {n} components")
    qnorm = float(np.linalg.norm(q))
    if qnorm == 0.0:
        return 0.0, np.zeros(n)

    def objective(p):
        return float(p @ q) - float(profile.evaluate(p))

    def residual(p):
        return profile.gradient(p) - q

    seeds = [q, 0.5 * q, 2.0 * q, np.full(n, qnorm / np.sqrt(n))]
    for seed in seeds:
        p = np.array(seed, dtype=float)
        ok = True
        for _ in range(max_iter):
            r = residual(p)
            rn = float(np.linalg.norm(r))
            if rn <= tol * max(1.0, qnorm):
                break
            J = _gradient_jacobian(profile, p)
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                ok = False
                break
            # backtrack until the gradient residual improves
            lam = 1.0
            for _ in range(40):
                cand = p + lam * step
                if np.linalg.norm(residual(cand)) < rn:
                    p = cand
                    break
                lam *= 0.5
            else:
                ok = False
                break
            if np.linalg.norm(p) > box:
                ok = False
                break
        if ok and np.linalg.norm(residual(p)) <= tol * max(1.0, qnorm):
            # strict convexity makes the stationary point unique, so the
            # first converged seed already is the argmax
            return objective(p), p

    # No stationary point: decide unbounded vs plain failure by probing the
    # objective along the ray through q.
    probes = [objective(t * q / qnorm) for t in (1e2, 1e4, 1e6)]
    if probes[2] > probes[1] > probes[0] and probes[2] > 0:
        raise NotAttained("conjugate objective is unbounded along q")
    raise ConvergenceFailure("Newton failed to locate the conjugate argmax")


def _gradient_jacobian(profile: ToricProfile, p: np.ndarray) -> np.ndarray:
    n = p.size
    J = np.empty((n, n))
    for j in range(n):
        h = max(1e-7, 1e-9 * abs(p[j]))
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (profile.gradient(p + e) - profile.gradient(p - e)) / (2 * h)
    return 0.5 * (J + J.T)


def conjugate_function(profile: ToricProfile) -> ToricProfile:
    """The conjugate as a profile; for degree d > 1 the result is homogeneous
    of degree d' with 1/d + 1/d' = 1."""
    if profile.degree <= 1.0:
        raise ConfigError(
            "conjugate_function needs degree > 1; the conjugate of a "
            "1-homogeneous profile is an indicator, not a toric profile")
    dual_degree = profile.degree / (profile.degree - 1.0)

    def evaluate_fn(Q):
        Q = np.asarray(Q, dtype=float)
        out = np.empty(Q.shape[:-1])
        flat = Q.reshape(-1, Q.shape[-1])
        vals = out.reshape(-1)
        for i, q in enumerate(flat):
            vals[i], _ = convex_conjugate(profile, q)
        return out

    def gradient_fn(Q):
        Q = np.asarray(Q, dtype=float)
        out = np.empty_like(Q)
        flat = Q.reshape(-1, Q.shape[-1])
        grads = out.reshape(-1, Q.shape[-1])
        for i, q in enumerate(flat):
            _, grads[i] = convex_conjugate(profile, q)
        return out

    return ToricProfile(name=f"conjugate({profile.name})",
                        dimension=profile.dimension, degree=dual_degree,
                        evaluate_fn=evaluate_fn, gradient_fn=gradient_fn)


def support_function(surface: LevelSurface, q, refine: bool = True) -> float:
    """sup over the surface of <p, q> (inf for concave orientation).

    Exactly 1-homogeneous in q: the extremum is located for the unit
    direction and rescaled.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape != (surface.dimension,):
        raise ConfigError(f"q must have {surface.dimension} components")
    qnorm = float(np.linalg.norm(q))
    if qnorm == 0.0:
        return 0.0
    u = q / qnorm
    use_min = surface.orientation is Orientation.CONCAVE
    samp = surface.samples
    dots = samp.points @ u
    idx = int(np.argmin(dots) if use_min else np.argmax(dots))
    value = float(dots[idx])
    if refine and surface.dimension == 2:
        lo = samp.params[max(idx - 1, 0)]
        hi = samp.params[min(idx + 1, len(dots) - 1)]
        if hi > lo:
            sign = 1.0 if use_min else -1.0
            res = minimize_scalar(lambda t: sign * float(surface.point(t) @ u),
                                  bounds=(float(lo), float(hi)),
                                  method="bounded",
                                  options={"xatol": 1e-13})
            refined = sign * float(res.fun)
            value = min(value, refined) if use_min else max(value, refined)
    return qnorm * value


def hypersurface_transform(surface: LevelSurface,
                           curvature_floor: float = CURVATURE_FLOOR,
                           at_params: Optional[np.ndarray] = None,
                           resolution: int = DEFAULT_RESOLUTION) -> LevelSurface:
    """Dual surface through L(p) = n(p) / <p, n(p)> over the nice samples.

    Nice means |K| above the curvature floor, support value away from zero,
    and locally injective images. The result is parametrized by the original
    parameter, with closed-form normals p(t)/|p(t)|.
    """
    if surface.dimension != 2:
        raise ConfigError("hypersurface_transform is implemented for n = 2")
    if at_params is not None:
        params = np.asarray(at_params, dtype=float)
        pts = surface.point(params)
        nrm = surface.normal(params)
        curv = np.asarray([surface.curvature(t) for t in params])
    else:
        samp = surface.samples
        params, pts, nrm, curv = samp.params, samp.points, samp.normals, samp.curvature

    support = np.einsum("ij,ij->i", pts, nrm)
    defined = np.abs(support) > SUPPORT_FLOOR
    with np.errstate(invalid="ignore"):
        nice = defined & (np.abs(curv) > curvature_floor)
    if nice.sum() < NICE_FRACTION_MIN * len(params):
        raise TooFewNicePoints(
            f"only {int(nice.sum())} of {len(params)} samples are nice "
            f"(curvature floor {curvature_floor:g})")

    images = nrm[nice] / support[nice, None]
    pre = np.linalg.norm(np.diff(pts[nice], axis=0), axis=1)
    post = np.linalg.norm(np.diff(images, axis=0), axis=1)
    # injectivity guard: consecutive images collapsing far faster than their
    # preimages indicates a fold; drop the second point of each such pair
    keep = np.ones(nice.sum(), dtype=bool)
    with np.errstate(invalid="ignore"):
        collapsed = (post < INJECTIVITY_RATIO * pre) & (pre > 0)
    keep[1:][collapsed] = False
    survivors = np.flatnonzero(nice)[keep]
    if len(survivors) < MIN_NICE_POINTS:
        raise TooFewNicePoints(f"only {len(survivors)} injective nice samples")

    # domain: L(p) stays pointwise defined wherever the support is off zero,
    # so the image keeps the whole contiguous well-defined run around the
    # nice core (the closure of the dual), not just the nice range itself
    mid = survivors[len(survivors) // 2]
    lo_idx, hi_idx = mid, mid
    while lo_idx > 0 and defined[lo_idx - 1]:
        lo_idx -= 1
    while hi_idx < len(params) - 1 and defined[hi_idx + 1]:
        hi_idx += 1
    lo = float(params[lo_idx])
    hi = float(params[hi_idx])

    def point_fn(t):
        t = np.asarray(t, dtype=float)
        P = surface.point(t)
        N = surface.normal(t)
        s = np.einsum("...j,...j->...", P, N)
        return N / s[..., None]

    def normal_fn(t):
        P = surface.point(np.asarray(t, dtype=float))
        return P / np.linalg.norm(P, axis=-1, keepdims=True)

    # the dual of a strictly convex arc is strictly convex; anything else is
    # left to detection on the output's own samples
    orientation = (Orientation.CONVEX
                   if surface.orientation is Orientation.CONVEX else None)
    dual = LevelSurface(dimension=2, point_fn=point_fn, param_lo=lo,
                        param_hi=hi, normal_fn=normal_fn,
                        orientation=orientation, resolution=resolution)
    dual.knots = params[survivors]
    return dual


@dataclass(frozen=True)
class ReconstructionReport:
    cloud_size: int
    fit_knots: int
    nice_points: int
    hausdorff_vs_reference: Optional[float]

    def to_json_dict(self) -> dict:
        return {
            "cloud_size": self.cloud_size,
            "fit_knots": self.fit_knots,
            "nice_points": self.nice_points,
            "hausdorff_vs_reference": self.hausdorff_vs_reference,
        }


@dataclass(frozen=True)
class ReconstructionResult:
    surface: LevelSurface
    fit_surface: LevelSurface
    report: ReconstructionReport


def reconstruct_surface(cloud: PointCloud,
                        reference: Optional[LevelSurface] = None,
                        resolution: int = DEFAULT_RESOLUTION) -> ReconstructionResult:
    """Recover the level surface N from the cloud {k / a(k)}.

    Pipeline: spline-fit the cloud as a polar graph M', then push M' through
    the hypersurface transform; the transform of the fitted dual is N itself.
    """
    if len(cloud) < MIN_CLOUD_POINTS:
        raise InsufficientCloud(
            f"need at least {MIN_CLOUD_POINTS} points, got {len(cloud)}")
    fit = LevelSurface.from_points(cloud.points, resolution=resolution)
    dual = hypersurface_transform(fit, at_params=fit.knots,
                                  resolution=resolution)
    # keep only the knot images: there the fit interpolates the cloud exactly
    # and only its normal error enters; refitting through them avoids the
    # between-knot error of pushing the whole spline through L
    images = dual.point(dual.knots)
    surface = LevelSurface.from_points(images, resolution=resolution)
    hd = hausdorff_distance(surface, reference) if reference is not None else None
    report = ReconstructionReport(cloud_size=len(cloud),
                                  fit_knots=len(fit.knots),
                                  nice_points=len(dual.knots),
                                  hausdorff_vs_reference=hd)
    return ReconstructionResult(surface=surface, fit_surface=fit, report=report)


def hausdorff_distance(a: LevelSurface, b: LevelSurface,
                       resolution: int = DEFAULT_RESOLUTION) -> float:
    """Symmetric Hausdorff distance between dense samplings of two surfaces."""
    pa = a.point(np.linspace(a.param_lo, a.param_hi, resolution))
    pb = b.point(np.linspace(b.param_lo, b.param_hi, resolution))
    d_ab = cKDTree(pb).query(pa)[0].max()
    d_ba = cKDTree(pa).query(pb)[0].max()
    return float(max(d_ab, d_ba))
