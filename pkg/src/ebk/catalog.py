"""Profile and surface specs for the command line.

Builtin names: harmonic:w1,...,wn  pnorm:s  power:s,d  circle  ramos.
Anything else is read as a JSON file:

    { "kind": "linear"|"pnorm"|"superellipse"|"ramos"|"custom-table",
      "params": {...}, "degree": d, "dimension": n }

linear takes params.weights, pnorm/superellipse take params.s, custom-table
takes params.table as [t, x, y] rows (a sampled curve; no closed-form
profile, so only surface-based subcommands accept it).
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .billiard import RamosCurve, disk_profile
from .errors import ConfigError
from .profiles import ToricProfile, linear_profile, pnorm_profile
from .surfaces import DEFAULT_RESOLUTION, LevelSurface


@dataclass(frozen=True)
class DomainSpec:
    """A parsed --profile argument: closed-form profile, surface recipe, or both."""

    name: str
    profile: Optional[ToricProfile]
    surface_factory: Callable[[int], LevelSurface]

    def make_surface(self, resolution: int = DEFAULT_RESOLUTION) -> LevelSurface:
        return self.surface_factory(resolution)

    def require_profile(self) -> ToricProfile:
        if self.profile is None:
            raise ConfigError(
                f"profile '{self.name}' has no closed-form evaluation; "
                "only surface-based subcommands accept it")
        return self.profile


def _from_profile_factory(profile: ToricProfile):
    return lambda resolution: LevelSurface.from_profile(profile,
                                                        resolution=resolution)


def _spec_from_profile(name: str, profile: ToricProfile) -> DomainSpec:
    return DomainSpec(name=name, profile=profile,
                      surface_factory=_from_profile_factory(profile))


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError as exc:
        raise ConfigError(f"could not parse {what} from {text!r}") from exc


def parse_domain_spec(spec: str) -> DomainSpec:
    """Resolve a --profile argument to a DomainSpec."""
    if not spec:
        raise ConfigError("empty profile spec")
    head, _, tail = spec.partition(":")
    if head == "harmonic" or head == "linear":
        weights = _parse_floats(tail, "harmonic weights")
        if len(weights) < 1:
            raise ConfigError("harmonic profile needs weights, e.g. harmonic:1,2")
        return _spec_from_profile(spec, linear_profile(weights))
    if head == "pnorm":
        vals = _parse_floats(tail, "pnorm exponent")
        if len(vals) != 1:
            raise ConfigError("pnorm takes one exponent, e.g. pnorm:4")
        return _spec_from_profile(spec, pnorm_profile(vals[0]))
    if head == "power":
        vals = _parse_floats(tail, "power parameters")
        if len(vals) != 2:
            raise ConfigError("power takes s,d — e.g. power:2,2")
        return _spec_from_profile(spec, pnorm_profile(vals[0], degree=vals[1]))
    if spec == "circle":
        return _spec_from_profile("circle", pnorm_profile(2.0))
    if spec == "ramos":
        return DomainSpec(name="ramos", profile=disk_profile(),
                          surface_factory=lambda resolution: RamosCurve(
                              resolution=resolution))
    if os.path.exists(spec) or spec.endswith(".json"):
        return load_domain_file(spec)
    raise ConfigError(
        f"unknown profile {spec!r}; builtins are harmonic:w1,...,wn, "
        "pnorm:s, power:s,d, circle, ramos, or a JSON spec file")


def load_domain_file(path: str) -> DomainSpec:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read profile file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path!r}: {exc}") from exc
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError(f"{path!r} must be an object with a 'kind' field")
    kind = doc["kind"]
    params = doc.get("params", {})
    degree = float(doc.get("degree", 1.0))
    dimension = int(doc.get("dimension", 2))
    name = f"{kind}@{os.path.basename(path)}"

    if kind == "linear":
        weights = params.get("weights")
        if not weights:
            raise ConfigError("linear spec needs params.weights")
        if len(weights) != dimension:
            raise ConfigError("params.weights length must match dimension")
        return _spec_from_profile(name, linear_profile([float(w) for w in weights]))
    if kind in ("pnorm", "superellipse"):
        if "s" not in params:
            raise ConfigError(f"{kind} spec needs params.s")
        profile = pnorm_profile(float(params["s"]), dimension=dimension,
                                degree=degree)
        return _spec_from_profile(name, profile)
    if kind == "ramos":
        return DomainSpec(name=name, profile=disk_profile(),
                          surface_factory=lambda resolution: RamosCurve(
                              resolution=resolution))
    if kind == "custom-table":
        table = params.get("table")
        if not table:
            raise ConfigError("custom-table spec needs params.table rows [t, x, y]")
        rows = np.asarray(table, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 3:
            raise ConfigError("params.table rows must be [t, x, y]")
        pts = rows[np.argsort(rows[:, 0], kind="stable"), 1:]

        def factory(resolution: int) -> LevelSurface:
            return LevelSurface.from_points(pts, resolution=resolution)

        return DomainSpec(name=name, profile=None, surface_factory=factory)
    raise ConfigError(f"unknown profile kind {kind!r} in {path!r}")
