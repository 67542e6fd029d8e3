"""Semiclassical spectra on the integer lattice, by three routes.

direct:         E_m = f(hbar (m + mu)) straight from a toric profile.
variational:    E_m = (extremum over marked actions of hbar <m + mu, k> / a)^d,
                sup for convex level sets, inf for concave ones.
reconstruction: E_m read off a surface rebuilt from the cloud {k / a(k)}.

The three must agree wherever they are all defined; tests lean on that.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .actions import ActionSpectrum, MarkedActionEntry, MaslovShift, as_shift
from .duality import PointCloud, ReconstructionResult, reconstruct_surface
from .errors import (
    ConfigError,
    DomainError,
    EmptySpectrum,
    NoQualifyingDirections,
    RayMiss,
    UnsupportedSurface,
)
from .profiles import ToricProfile
from .surfaces import Orientation

TRUNCATION_MIN_KMAX = 4   # need k_max/4 >= 1 for the three-level estimate
ARGEXT_TIE_TOL = 1e-12    # relative tie window; first direction in lex order wins


def lattice_grid(dimension: int, m_max: int) -> np.ndarray:
    """All m in {0..m_max}^dimension, lexicographically ordered."""
    if m_max < 0:
        raise ConfigError("m_max must be >= 0")
    rows = list(itertools.product(range(m_max + 1), repeat=dimension))
    return np.asarray(rows, dtype=np.int64)


@dataclass(frozen=True)
class EbkSpectrum:
    """Energies over a lattice block, with per-level provenance."""

    route: str
    dimension: int
    degree: float
    hbar: float
    shift: MaslovShift
    m_grid: np.ndarray
    energies: np.ndarray
    argext: Optional[np.ndarray] = None       # (M, n) extremal directions
    truncation: Optional[np.ndarray] = None   # (M,) error estimates, NaN if n/a

    def __len__(self) -> int:
        return len(self.energies)

    def energy(self, m: Sequence[int]) -> float:
        key = np.asarray(m, dtype=np.int64)
        hit = np.flatnonzero((self.m_grid == key).all(axis=1))
        if len(hit) == 0:
            raise ConfigError(f"m={tuple(int(x) for x in key)} not in this grid")
        return float(self.energies[hit[0]])

    def to_csv(self) -> str:
        n = self.dimension
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"m_{j+1}" for j in range(n)]
                   + ["E_m", "argmax_k", "truncation_error_estimate"])
        for i, m in enumerate(self.m_grid):
            arg = ""
            if self.argext is not None:
                arg = ";".join(str(int(x)) for x in self.argext[i])
            est = ""
            if self.truncation is not None and math.isfinite(self.truncation[i]):
                est = format(float(self.truncation[i]), ".17g")
            w.writerow([int(x) for x in m]
                       + [format(float(self.energies[i]), ".17g"), arg, est])
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        entries = []
        for i, m in enumerate(self.m_grid):
            row = {"m": [int(x) for x in m], "E": float(self.energies[i])}
            row["argmax_k"] = ([int(x) for x in self.argext[i]]
                               if self.argext is not None else None)
            est = None
            if self.truncation is not None and math.isfinite(self.truncation[i]):
                est = float(self.truncation[i])
            row["truncation_error_estimate"] = est
            entries.append(row)
        return {"route": self.route, "dimension": self.dimension,
                "degree": self.degree, "hbar": self.hbar,
                "shift": list(self.shift.values), "entries": entries}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def _weights(m_grid: np.ndarray, mu: MaslovShift, hbar: float) -> np.ndarray:
    if hbar <= 0:
        raise ConfigError("hbar must be > 0")
    W = hbar * (m_grid.astype(float) + mu.as_array())
    if np.any(W < 0):
        raise DomainError("hbar (m + mu) leaves the nonnegative orthant")
    return W


def direct_spectrum(profile: ToricProfile, m_max: int, hbar: float = 1.0,
                    shift=None) -> EbkSpectrum:
    """E_m = f(hbar (m + mu)) for every m in the {0..m_max}^n block."""
    mu = as_shift(shift, profile.dimension)
    m_grid = lattice_grid(profile.dimension, m_max)
    W = _weights(m_grid, mu, hbar)
    energies = np.asarray(profile.evaluate(W), dtype=float).reshape(len(m_grid))
    return EbkSpectrum(route="direct", dimension=profile.dimension,
                       degree=profile.degree, hbar=hbar, shift=mu,
                       m_grid=m_grid, energies=energies)


def _coerce_actions(actions, orientation=None) -> ActionSpectrum:
    if isinstance(actions, ActionSpectrum):
        if orientation is not None and Orientation(orientation) is not actions.orientation:
            # explicit override: single-facet (general) containers have no
            # preferred extremum, the caller picks sup or inf semantics
            return ActionSpectrum(actions.directions, actions.actions,
                                  actions.points, orientation, actions.k_max,
                                  actions.shift)
        return actions
    entries = list(actions)
    if not entries:
        raise EmptySpectrum("no marked action entries supplied")
    if orientation is None:
        raise ConfigError("orientation is required with a bare entry list")
    n = len(entries[0].k)
    K = np.asarray([e.k for e in entries], dtype=np.int64)
    A = np.asarray([e.action for e in entries], dtype=float)
    P = np.asarray([e.point for e in entries], dtype=float)
    return ActionSpectrum(K, A, P, orientation, int(K.max()),
                          MaslovShift.zero(n))


def _check_shift_pairing(actions: ActionSpectrum, mu: MaslovShift) -> None:
    # The variational numerator shift belongs with unshifted entries; pairing
    # a shifted container with a second nonzero shift double-counts mu.
    if not actions.shift.is_zero and not mu.is_zero:
        raise ConfigError(
            "action entries already carry a shift; pass shift=None or "
            "rebuild the entries unshifted")


def variational_spectrum(actions, m_max: int, degree: float = 1.0,
                         hbar: float = 1.0, shift=None, orientation=None,
                         truncation: bool = True,
                         force: str | None = None) -> EbkSpectrum:
    """Extremal-ratio spectrum over the stored primitive entries.

    Convex containers take the sup of hbar <m + mu, k> / a(k), concave ones
    the inf; the result is raised to the homogeneity degree. When the
    container records its k_max and truncation is requested, a three-level
    Richardson-style error estimate is attached per level.
    """
    spec = _coerce_actions(actions, orientation)
    if len(spec) == 0:
        raise EmptySpectrum("action spectrum has no entries")
    mu = as_shift(shift, spec.dimension)
    _check_shift_pairing(spec, mu)
    if spec.orientation is Orientation.CONVEX:
        use_max = True
    elif spec.orientation is Orientation.CONCAVE:
        use_max = False
    else:
        raise UnsupportedSurface(
            "variational route needs a convex or concave orientation")
    m_grid = lattice_grid(spec.dimension, m_max)
    W = _weights(m_grid, mu, hbar)

    def level_values(sub: ActionSpectrum) -> np.ndarray:
        vals, _ = kernels.extremal_ratios(sub.directions, sub.actions, W,
                                          use_max, tie_tol=ARGEXT_TIE_TOL,
                                          force=force)
        return vals ** degree

    vals, idx = kernels.extremal_ratios(spec.directions, spec.actions, W,
                                        use_max, tie_tol=ARGEXT_TIE_TOL,
                                        force=force)
    energies = vals ** degree
    argext = spec.directions[idx]

    est = None
    if truncation and spec.k_max >= TRUNCATION_MIN_KMAX:
        quarter = spec.restrict(spec.k_max // 4)
        half = spec.restrict(spec.k_max // 2)
        # single-direction containers can lose every entry at a coarser
        # level; the three-level estimate is undefined then
        if len(quarter) > 0 and len(half) > 0:
            est = truncation_estimate(level_values(quarter),
                                      level_values(half), energies)

    return EbkSpectrum(route="variational", dimension=spec.dimension,
                       degree=degree, hbar=hbar, shift=mu, m_grid=m_grid,
                       energies=energies, argext=argext, truncation=est)


def truncation_estimate(coarse: np.ndarray, mid: np.ndarray,
                        fine: np.ndarray) -> np.ndarray:
    """Residual-ratio extrapolation from three nested truncation levels.

    With D1 = mid - coarse and D2 = fine - mid, a contraction ratio
    r = D1/D2 > 1 gives the geometric tail bound |D2| / (r - 1); otherwise
    fall back to |D2| itself. Converged levels report zero.
    """
    d1 = np.atleast_1d(np.asarray(mid, dtype=float)
                       - np.asarray(coarse, dtype=float))
    d2 = np.atleast_1d(np.asarray(fine, dtype=float)
                       - np.asarray(mid, dtype=float))
    out = np.abs(d2)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(d2 != 0, d1 / np.where(d2 != 0, d2, 1.0), np.inf)
    geom = np.abs(d2) / np.maximum(r - 1.0, 1e-300)
    better = (r > 1.0) & (d2 != 0)
    out[better] = geom[better]
    out[d2 == 0] = 0.0
    if np.isscalar(fine) or np.ndim(fine) == 0:
        return float(out[0])
    return out


@dataclass(frozen=True)
class CertificateRecord:
    ell: int
    value: float
    direction: tuple[int, ...]
    multiple: int


@dataclass(frozen=True)
class MinmaxCertificate:
    """Finite minmax values certifying the sign of E - E_m.

    Every value positive certifies E > E_m, every value negative E < E_m,
    and |value(ell)| grows at least like c * ell * |E - E_m| with the
    reported direction constant c.
    """

    energy: float
    m: tuple[int, ...]
    shift: MaslovShift
    hbar: float
    records: tuple[CertificateRecord, ...]
    direction_constant: float

    @property
    def values(self) -> np.ndarray:
        return np.asarray([r.value for r in self.records])

    @property
    def sign(self) -> int:
        v = self.values
        if np.all(v > 0):
            return 1
        if np.all(v < 0):
            return -1
        return 0


def minmax_certificate(actions, energy: float, m: Sequence[int], shift=None,
                       hbar: float = 1.0, ells: Iterable[int] = range(1, 21),
                       orientation=None) -> MinmaxCertificate:
    """value(ell) = min over interior entries of ceil(ell / min_j k_j) times
    (E a(k) - hbar <m + mu, k>), the smallest qualifying multiple of each
    primitive class.

    Interior means every component of k positive; without such entries the
    certificate is undefined (NoQualifyingDirections). Only meaningful for
    sup-route (convex or single-facet) spectra.
    """
    spec = _coerce_actions(actions, orientation)
    mu = as_shift(shift, spec.dimension)
    _check_shift_pairing(spec, mu)
    if spec.orientation is Orientation.CONCAVE:
        raise UnsupportedSurface(
            "minmax certificate is defined for the sup route; concave "
            "containers certify the opposite inequality")
    m = np.asarray(m, dtype=np.int64).reshape(-1)
    if m.shape != (spec.dimension,):
        raise ConfigError(f"m must have {spec.dimension} components")
    w = _weights(m[None, :], mu, hbar)[0]

    interior = spec.directions.min(axis=1) >= 1
    if not np.any(interior):
        raise NoQualifyingDirections(
            "no marked entries with all components positive")
    K = spec.directions[interior]
    A = spec.actions[interior]
    P = spec.points[interior]
    base = energy * A - K.astype(float) @ w
    kmin = K.min(axis=1)

    records = []
    for ell in ells:
        if ell < 1:
            raise ConfigError("certificate levels ell must be >= 1")
        mult = -(-ell // kmin)   # ceil(ell / kmin), elementwise
        vals = mult * base
        i = int(np.argmin(vals))
        records.append(CertificateRecord(ell=int(ell), value=float(vals[i]),
                                         direction=tuple(int(x) for x in K[i]),
                                         multiple=int(mult[i])))
    c = float(P.max(axis=1).min())
    return MinmaxCertificate(energy=float(energy),
                             m=tuple(int(x) for x in m), shift=mu, hbar=hbar,
                             records=tuple(records), direction_constant=c)


def reconstruction_spectrum(actions, m_max: int, degree: float = 1.0,
                            hbar: float = 1.0, shift=None, orientation=None,
                            reference=None,
                            resolution: int = 4096
                            ) -> tuple[EbkSpectrum, ReconstructionResult]:
    """Rebuild the level surface from {k / a(k)} and read energies off it.

    Entries must be unshifted (the cloud geometry would otherwise bake mu
    into the surface); the quantization shift still applies to the lattice.
    """
    spec = _coerce_actions(actions, orientation)
    if len(spec) == 0:
        raise EmptySpectrum("action spectrum has no entries")
    if not spec.shift.is_zero:
        raise ConfigError("reconstruction needs unshifted action entries")
    mu = as_shift(shift, spec.dimension)
    recon = reconstruct_surface(PointCloud.from_actions(spec),
                                reference=reference, resolution=resolution)
    m_grid = lattice_grid(spec.dimension, m_max)
    W = _weights(m_grid, mu, hbar)
    energies = np.empty(len(m_grid))
    from .errors import DirectionNotAttained
    for i, w in enumerate(W):
        if not np.any(w):
            energies[i] = 0.0
            continue
        try:
            energies[i] = recon.surface.radial_value(w) ** degree
        except DirectionNotAttained as exc:
            raise RayMiss(
                f"ray through hbar(m+mu) for m={m_grid[i].tolist()} misses "
                f"the reconstructed surface: {exc}") from exc
    spectrum = EbkSpectrum(route="reconstruction", dimension=spec.dimension,
                           degree=degree, hbar=hbar, shift=mu, m_grid=m_grid,
                           energies=energies)
    return spectrum, recon
