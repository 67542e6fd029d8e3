"""Quantization of the circular billiard, two ways.

The reference route solves the monotone radial phase equation
sqrt(F^2 - m^2) - m arccos(m/F) = n pi for F and converts to energy.
The toric route runs the concave inf-variational formula over the marked
actions of the boundary curve rho(alpha); crosscheck_disk compares both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .actions import ActionSpectrum, MaslovShift, as_shift, marked_action_spectrum
from .errors import ConfigError, ConvergenceFailure, DomainError
from .profiles import FAMILY_RAMOS, ToricProfile
from .quantize import truncation_estimate
from .surfaces import DEFAULT_RESOLUTION, LevelSurface, Orientation

# Maslov pair for the disk: 0 on the angular loop, 3/4 on the radial one,
# surfaced as n -> n + 3/4 in the phase equation.
RADIAL_SHIFT = 0.75

PHASE_SOLVE_TOL = 1e-12
MAX_SOLVE_ITERS = 200


def _check_angular(m) -> int:
    if not (isinstance(m, (int, np.integer)) and m >= 0):
        raise ConfigError(f"angular quantum number must be an integer >= 0, got {m!r}")
    return int(m)


def radial_phase(m: int, x):
    """sqrt(x^2 - m^2) - m arccos(m/x), zero at x = m, strictly increasing."""
    m = _check_angular(m)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < m):
        raise DomainError(f"radial phase needs x >= m = {m}")
    if m == 0:
        out = arr.copy()
    else:
        # x == m makes both terms vanish; the clip only absorbs roundoff
        root = np.sqrt(np.maximum(arr * arr - m * m, 0.0))
        out = root - m * np.arccos(np.clip(m / arr, -1.0, 1.0))
    return out if isinstance(x, np.ndarray) else float(out)


def radial_phase_slope(m: int, x):
    """d/dx of the radial phase: sqrt(x^2 - m^2)/x."""
    m = _check_angular(m)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < m) or np.any(arr <= 0):
        raise DomainError("slope needs x >= m and x > 0")
    out = np.sqrt(np.maximum(arr * arr - m * m, 0.0)) / arr
    return out if isinstance(x, np.ndarray) else float(out)


def solve_momentum(m: int, n: float, tol: float = PHASE_SOLVE_TOL,
                   max_iter: int = MAX_SOLVE_ITERS) -> float:
    """The unique F >= m with radial_phase(m, F) = n pi.

    Bracket doubling from [m, m + n pi + 1], then a bisection-safeguarded
    Newton iteration on the phase residual. n = 0 returns F = m without
    iteration (the gliding limit, where the bracket degenerates).
    """
    m = _check_angular(m)
    if not (np.isfinite(n) and n >= 0):
        raise ConfigError(f"radial quantum number must be >= 0, got {n!r}")
    if tol <= 0:
        raise ConfigError("tol must be > 0")
    if n == 0:
        return float(m)
    target = n * math.pi
    lo = float(m)
    hi = float(m) + target + 1.0
    for _ in range(200):
        if radial_phase(m, hi) >= target:
            break
        hi = m + 2.0 * (hi - m)
    else:
        raise ConvergenceFailure("bracket doubling failed to enclose the root")

    x = 0.5 * (lo + hi)
    fx = radial_phase(m, x) - target
    for _ in range(max_iter):
        if abs(fx) <= tol:
            return x
        if fx > 0:
            hi = x
        else:
            lo = x
        slope = math.sqrt(max(x * x - m * m, 0.0)) / x if x > 0 else 0.0
        cand = x - fx / slope if slope > 0.0 else lo
        x = cand if lo < cand < hi else 0.5 * (lo + hi)
        fx = radial_phase(m, x) - target
    if abs(fx) <= tol:
        return x
    raise ConvergenceFailure(
        f"phase solve stalled at residual {abs(fx):.3e} (tol {tol:g})")


def energy_from_momentum(momentum: float, radius: float = 1.0,
                         hbar: float = 1.0) -> float:
    """E = (hbar F)^2 / (2 R^2)."""
    if radius <= 0 or hbar <= 0:
        raise ConfigError("radius and hbar must be > 0")
    if momentum < 0:
        raise ConfigError("momentum must be >= 0")
    return (hbar * momentum) ** 2 / (2.0 * radius * radius)


@dataclass(frozen=True)
class BilliardLevel:
    """One quantized level of the disk, with its solve residual."""

    m: int
    n: float
    momentum: float
    energy: float
    radius: float
    hbar: float
    residual: float

    @classmethod
    def solve(cls, m: int, n: float, radius: float = 1.0, hbar: float = 1.0,
              tol: float = PHASE_SOLVE_TOL) -> "BilliardLevel":
        momentum = solve_momentum(m, n, tol=tol)
        residual = abs(radial_phase(m, momentum) - n * math.pi)
        return cls(m=int(m), n=float(n), momentum=momentum,
                   energy=energy_from_momentum(momentum, radius, hbar),
                   radius=float(radius), hbar=float(hbar), residual=residual)


# -- the concave boundary curve of the disk's momentum image --

def boundary_point(alpha):
    """rho(alpha) = (sin a - a cos a, sin a + (pi - a) cos a), a in [0, pi]."""
    a = np.asarray(alpha, dtype=float)
    pts = np.stack([np.sin(a) - a * np.cos(a),
                    np.sin(a) + (math.pi - a) * np.cos(a)], axis=-1)
    return pts


def boundary_tangent(alpha):
    """rho'(alpha) = (a sin a, (a - pi) sin a)."""
    a = np.asarray(alpha, dtype=float)
    return np.stack([a * np.sin(a), (a - math.pi) * np.sin(a)], axis=-1)


def boundary_normal(alpha):
    """Outward unit normal, proportional to (pi - a, a)."""
    a = np.asarray(alpha, dtype=float)
    raw = np.stack([math.pi - a, a], axis=-1)
    return raw / np.linalg.norm(raw, axis=-1, keepdims=True)


def direction_parameter(k1: float, k2: float) -> float:
    """The alpha whose outward normal points along (k1, k2)."""
    if k1 < 0 or k2 < 0 or k1 + k2 <= 0:
        raise ConfigError("direction must be nonzero with k1, k2 >= 0")
    return math.pi * k2 / (k1 + k2)


def ramos_action(k1: int, k2: int) -> float:
    """Action (k1 + k2) sin(pi k2 / (k1 + k2)) of the (k1, k2) class.

    Boundary classes (k1 = 0 or k2 = 0) return an exact 0.0.
    """
    if k1 < 0 or k2 < 0 or k1 + k2 < 1:
        raise ConfigError("need integers k1, k2 >= 0 with k1 + k2 >= 1")
    if k1 == 0 or k2 == 0:
        return 0.0
    s = k1 + k2
    return s * math.sin(math.pi * k2 / s)


def _polar_angle_of_alpha(a: float) -> float:
    x, y = boundary_point(a)
    return math.atan2(y, x)


def _alpha_for_polar(phi: float) -> float:
    # polar angle of rho decreases from pi/2 at alpha=0 to 0 at alpha=pi
    lo, hi = 0.0, math.pi
    if not (-1e-12 <= phi <= math.pi / 2 + 1e-12):
        raise DomainError("direction leaves the closed positive quadrant")
    phi = min(max(phi, 0.0), math.pi / 2)
    for _ in range(kernels.BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if _polar_angle_of_alpha(mid) > phi:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def disk_profile() -> ToricProfile:
    """The 1-homogeneous gauge whose unit level set is the boundary curve.

    Evaluated radially: f(p) = |p| / |rho(alpha_p)| with alpha_p matching
    the polar angle of p. The gradient has the closed form
    (pi - a, a) / (pi sin a), which blows up toward the axes; callers stay
    in the open quadrant.
    """

    def evaluate_fn(P):
        P = np.asarray(P, dtype=float)
        flat = P.reshape(-1, 2)
        out = np.empty(len(flat))
        for i, p in enumerate(flat):
            r = math.hypot(p[0], p[1])
            if r == 0.0:
                out[i] = 0.0
                continue
            a = _alpha_for_polar(math.atan2(p[1], p[0]))
            out[i] = r / math.hypot(*boundary_point(a))
        return out.reshape(P.shape[:-1])

    def gradient_fn(P):
        P = np.asarray(P, dtype=float)
        flat = P.reshape(-1, 2)
        out = np.empty_like(flat)
        for i, p in enumerate(flat):
            a = _alpha_for_polar(math.atan2(p[1], p[0]))
            s = math.sin(a)
            if s < 1e-12:
                raise DomainError("gauge gradient is unbounded on the axes")
            out[i] = np.array([math.pi - a, a]) / (math.pi * s)
        return out.reshape(P.shape)

    return ToricProfile(name="ramos", dimension=2, degree=1.0,
                        evaluate_fn=evaluate_fn, gradient_fn=gradient_fn,
                        jit_family=FAMILY_RAMOS, jit_params=())


class RamosCurve(LevelSurface):
    """The concave curve bounding the disk's toric momentum region."""

    def __init__(self, resolution: int = DEFAULT_RESOLUTION):
        super().__init__(dimension=2, point_fn=boundary_point,
                         param_lo=0.0, param_hi=math.pi,
                         normal_fn=boundary_normal,
                         orientation=Orientation.CONCAVE,
                         profile=disk_profile(), resolution=resolution,
                         jit_family=FAMILY_RAMOS, jit_params=())


@dataclass(frozen=True)
class CrosscheckReport:
    """Side-by-side momenta from the toric and phase-equation routes."""

    m1: int
    m2: int
    shift: MaslovShift
    hbar: float
    k_max: int
    toric_energy: float
    momentum_toric: float
    momentum_reference: float
    difference: float
    truncation_error_estimate: float

    def to_json_dict(self) -> dict:
        return {
            "m1": self.m1, "m2": self.m2,
            "shift": list(self.shift.values), "hbar": self.hbar,
            "k_max": self.k_max, "E_toric": self.toric_energy,
            "F_route": self.momentum_toric,
            "F_ref": self.momentum_reference,
            "difference": self.difference,
            "truncation_error_estimate": self.truncation_error_estimate,
        }


def crosscheck_disk(m1: int, m2: int, k_max: int = 2000, shift=None,
                    hbar: float = 1.0,
                    actions: Optional[ActionSpectrum] = None) -> CrosscheckReport:
    """Compare the toric inf-route momentum against the phase-equation root.

    The toric route evaluates the concave variational formula at (m1, m2)
    over unshifted boundary-curve actions (the shift enters the numerator);
    the reference solves the phase equation at angular m2 - m1 and radial
    m1 + mu. Uniform shifts only: the identification pairs one mu with both
    loops of the reference route.
    """
    m1 = _check_angular(m1)
    m2 = _check_angular(m2)
    if m2 < m1:
        raise ConfigError("crosscheck expects m2 >= m1")
    if k_max < 10:
        raise ConfigError("k_max must be >= 10")
    if hbar <= 0:
        raise ConfigError("hbar must be > 0")
    mu = as_shift(shift, 2)
    if mu.values[0] != mu.values[1]:
        raise ConfigError("crosscheck requires a uniform shift")

    if actions is None:
        actions = marked_action_spectrum(RamosCurve(), k_max)
    else:
        if actions.orientation is not Orientation.CONCAVE:
            raise ConfigError("crosscheck needs concave-orientation actions")
        if not actions.shift.is_zero:
            raise ConfigError("crosscheck needs unshifted action entries")
        k_max = actions.k_max

    w = hbar * (np.array([m1, m2], dtype=float) + mu.as_array())

    def inf_value(spec: ActionSpectrum) -> float:
        vals, _ = kernels.extremal_ratios(spec.directions, spec.actions,
                                          w[None, :], use_max=False)
        return float(vals[0])

    energy = inf_value(actions)
    levels = np.array([inf_value(actions.restrict(k_max // 4)),
                       inf_value(actions.restrict(k_max // 2)), energy])
    estimate = float(truncation_estimate(levels[:1], levels[1:2], levels[2:])[0])

    momentum_toric = math.pi * energy / hbar
    reference = BilliardLevel.solve(m2 - m1, m1 + mu.values[0], hbar=hbar)
    return CrosscheckReport(
        m1=m1, m2=m2, shift=mu, hbar=hbar, k_max=k_max, toric_energy=energy,
        momentum_toric=momentum_toric,
        momentum_reference=reference.momentum,
        difference=momentum_toric - reference.momentum,
        truncation_error_estimate=estimate)
