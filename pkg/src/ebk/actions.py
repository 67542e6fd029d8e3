"""Marked action spectra: periodic-orbit actions labeled by integer homology.

An entry pairs a primitive nonnegative integer direction k with the action
a = <p + mu, k> of the orbit class through the surface point p whose outward
normal is proportional to k. Entries are stored for primitive k only and in
lexicographic order; integer multiples scale exactly and are generated on
demand. Zero-action entries (k orthogonal to an axis endpoint) are dropped.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import (
    ConfigError,
    ConvergenceFailure,
    InvalidOrbitClass,
    UnsupportedSurface,
)
from .surfaces import LevelSurface, Orientation, NORMAL_RESIDUAL_TOL

ZERO_ACTION_TOL = 1e-12   # |a| <= tol * |k| counts as a dropped zero entry
FLAT_ACTION_TOL = 1e-9    # agreement required across multivalued components


@dataclass(frozen=True)
class MaslovShift:
    """Per-coordinate quantization shift mu appearing in m + mu and p + mu."""

    values: tuple[float, ...]

    @classmethod
    def zero(cls, dimension: int) -> "MaslovShift":
        return cls(values=(0.0,) * dimension)

    @classmethod
    def uniform(cls, value: float, dimension: int) -> "MaslovShift":
        return cls(values=(float(value),) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)


def as_shift(shift, dimension: int) -> MaslovShift:
    """Coerce None / scalar / sequence / MaslovShift to a checked shift."""
    if shift is None:
        return MaslovShift.zero(dimension)
    if isinstance(shift, MaslovShift):
        if shift.dimension != dimension:
            raise ConfigError(
                f"shift has dimension {shift.dimension}, expected {dimension}")
        return shift
    if np.isscalar(shift):
        return MaslovShift.uniform(float(shift), dimension)
    values = tuple(float(v) for v in shift)
    if len(values) != dimension:
        raise ConfigError(f"shift needs {dimension} components, got {len(values)}")
    return MaslovShift(values=values)


@dataclass(frozen=True)
class MarkedActionEntry:
    k: tuple[int, ...]
    action: float
    point: tuple[float, ...]

    def multiple(self, ell: int) -> "MarkedActionEntry":
        """The non-primitive class ell*k; the action scales exactly."""
        if ell < 1:
            raise ConfigError("multiple requires ell >= 1")
        return MarkedActionEntry(k=tuple(ell * kj for kj in self.k),
                                 action=ell * self.action, point=self.point)

    @property
    def is_primitive(self) -> bool:
        return math.gcd(*self.k) == 1 if len(self.k) > 1 else self.k[0] == 1


class ActionSpectrum:
    """Array-backed container for a marked action spectrum.

    Rows are lexicographically sorted by k. Treat as immutable.
    """

    def __init__(self, directions: np.ndarray, actions: np.ndarray,
                 points: np.ndarray, orientation: Orientation | str,
                 k_max: int, shift: MaslovShift):
        self.directions = np.ascontiguousarray(directions, dtype=np.int64)
        self.actions = np.ascontiguousarray(actions, dtype=float)
        self.points = np.ascontiguousarray(points, dtype=float)
        self.orientation = Orientation(orientation)
        self.k_max = int(k_max)
        self.shift = shift
        n = self.directions.shape[0]
        if self.actions.shape != (n,) or self.points.shape != self.directions.shape:
            raise ConfigError("inconsistent action-spectrum array shapes")

    def __len__(self) -> int:
        return self.directions.shape[0]

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]

    @cached_property
    def sup_norms(self) -> np.ndarray:
        return self.directions.max(axis=1)

    @cached_property
    def entries(self) -> tuple[MarkedActionEntry, ...]:
        return tuple(
            MarkedActionEntry(k=tuple(int(x) for x in k), action=float(a),
                              point=tuple(float(x) for x in p))
            for k, a, p in zip(self.directions, self.actions, self.points))

    def restrict(self, k_max: int) -> "ActionSpectrum":
        """Sub-spectrum with ||k||_inf <= k_max (shares no state)."""
        mask = self.sup_norms <= k_max
        return ActionSpectrum(self.directions[mask], self.actions[mask],
                              self.points[mask], self.orientation,
                              min(self.k_max, k_max), self.shift)

    # -- deterministic file formats --

    def to_csv(self) -> str:
        n = self.dimension
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"k_{j+1}" for j in range(n)] + ["action"]
                   + [f"p_{j+1}" for j in range(n)])
        for k, a, p in zip(self.directions, self.actions, self.points):
            w.writerow([int(x) for x in k] + [format(a, ".17g")]
                       + [format(x, ".17g") for x in p])
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "orientation": self.orientation.value,
            "k_max": self.k_max,
            "shift": list(self.shift.values),
            "entries": [
                {"k": [int(x) for x in k], "action": float(a),
                 "point": [float(x) for x in p]}
                for k, a, p in zip(self.directions, self.actions, self.points)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_csv(cls, text: str, orientation: Orientation | str,
                 k_max: int = 0, shift: Optional[MaslovShift] = None) -> "ActionSpectrum":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ConfigError("empty actions CSV")
        header = rows[0]
        n = sum(1 for h in header if h.startswith("k_"))
        if n < 1 or header[:n] != [f"k_{j+1}" for j in range(n)] \
                or header[n] != "action":
            raise ConfigError("unrecognized actions CSV header")
        K, A, P = [], [], []
        for row in rows[1:]:
            if not row:
                continue
            K.append([int(x) for x in row[:n]])
            A.append(float(row[n]))
            P.append([float(x) for x in row[n + 1:2 * n + 1]])
        K = np.asarray(K, dtype=np.int64).reshape(len(A), n)
        inferred = int(K.max()) if len(A) else 0
        return cls(K, np.asarray(A), np.asarray(P).reshape(len(A), n),
                   orientation, k_max or inferred,
                   shift or MaslovShift.zero(n))

    @classmethod
    def from_json(cls, text: str) -> "ActionSpectrum":
        doc = json.loads(text)
        n = int(doc["dimension"])
        entries = doc["entries"]
        K = np.asarray([e["k"] for e in entries], dtype=np.int64).reshape(len(entries), n)
        A = np.asarray([e["action"] for e in entries], dtype=float)
        P = np.asarray([e["point"] for e in entries], dtype=float).reshape(len(entries), n)
        return cls(K, A, P, doc["orientation"], int(doc["k_max"]),
                   MaslovShift(values=tuple(float(v) for v in doc["shift"])))


def marked_action_spectrum(surface: LevelSurface, k_max: int, shift=None,
                           force: str | None = None) -> ActionSpectrum:
    """Enumerate primitive directions with ||k||_inf <= k_max and their actions.

    Directions outside the surface's normal cone are skipped silently; on
    strictly convex/concave surfaces the inversion is a vectorized monotone
    bisection, on general surfaces a per-direction scan that must produce a
    single consistent action (flat facets qualify, genuinely multivalued
    surfaces do not).
    """
    if k_max < 1:
        raise ConfigError("k_max must be >= 1")
    dim = surface.dimension
    mu = as_shift(shift, dim)
    K = kernels.primitive_directions(dim, k_max, force=force)

    if dim == 2 and surface.orientation in (Orientation.CONVEX, Orientation.CONCAVE):
        _, pts, res, attained = surface.invert_normal_many(K.astype(float))
        bad = attained & (res > NORMAL_RESIDUAL_TOL)
        if np.any(bad):
            raise ConvergenceFailure(
                f"{int(bad.sum())} directions failed the inversion residual")
        K = K[attained]
        pts = pts[attained]
    else:
        rows, ppts = [], []
        for row in K:
            try:
                inv = surface.invert_normal(row.astype(float))
            except Exception as exc:
                from .errors import DirectionNotAttained
                if isinstance(exc, DirectionNotAttained):
                    continue
                raise
            if inv.multivalued:
                acts = inv.points @ row.astype(float)
                scale = max(1.0, float(np.abs(acts).max()))
                if np.ptp(acts) > FLAT_ACTION_TOL * scale:
                    raise UnsupportedSurface(
                        f"direction {row.tolist()} has multivalued inversion "
                        "with disagreeing actions")
            rows.append(row)
            ppts.append(inv.point)
        K = np.asarray(rows, dtype=np.int64).reshape(len(rows), dim)
        pts = np.asarray(ppts, dtype=float).reshape(len(rows), dim)

    shifted = pts + mu.as_array()
    acts = np.einsum("ij,ij->i", shifted, K.astype(float))
    knorm = np.linalg.norm(K.astype(float), axis=1)
    keep = np.abs(acts) > ZERO_ACTION_TOL * knorm
    return ActionSpectrum(K[keep], acts[keep], pts[keep],
                          surface.orientation, k_max, mu)


def billiard_orbit_action(energy: float, radius: float, k: int, ell: int) -> float:
    """Action 2 R sqrt(2E) ell sin(pi k / ell) of the (k, ell) orbit class
    in the disk of the given radius at energy E."""
    if ell < 1 or not (0 < k / ell < 1):
        raise InvalidOrbitClass(f"need 0 < k/ell < 1, got k={k}, ell={ell}")
    if energy < 0 or radius <= 0:
        raise ConfigError("energy must be >= 0 and radius > 0")
    return 2.0 * radius * math.sqrt(2.0 * energy) * ell * math.sin(math.pi * k / ell)
