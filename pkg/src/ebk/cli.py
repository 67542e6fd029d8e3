"""Command-line front end.

Subcommands: spectrum-direct, spectrum-variational, spectrum-reconstruct,
actions, legendre-dual, billiard-solve, billiard-crosscheck, minmax-certify.
Exit status 0 on success, 2 on validation errors, 3 on numerical failures.
Identical configurations produce byte-identical output files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional

import numpy as np

from .actions import ActionSpectrum, marked_action_spectrum
from .billiard import RADIAL_SHIFT, BilliardLevel, crosscheck_disk
from .catalog import parse_domain_spec
from .duality import hypersurface_transform
from .errors import ConfigError, EbkError
from .quantize import (
    direct_spectrum,
    minmax_certificate,
    reconstruction_spectrum,
    variational_spectrum,
)
from .surfaces import DEFAULT_RESOLUTION


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_shift(text: Optional[str]):
    if text is None:
        return None
    vals = [float(tok) for tok in text.split(",") if tok != ""]
    if not vals:
        raise ConfigError("--shift needs comma separated numbers")
    return vals[0] if len(vals) == 1 else tuple(vals)


def _parse_lattice_point(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--m expects comma separated integers, got {text!r}") from exc


def _write(out: Optional[str], text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _load_actions(args) -> ActionSpectrum:
    if getattr(args, "actions", None):
        with open(args.actions) as fh:
            text = fh.read()
        if args.actions.endswith(".json"):
            return ActionSpectrum.from_json(text)
        orientation = getattr(args, "orientation", None)
        if orientation is None:
            raise ConfigError("CSV action files need --orientation")
        return ActionSpectrum.from_csv(text, orientation=orientation)
    spec = parse_domain_spec(args.profile)
    surface = spec.make_surface(args.resolution)
    # entries stay unshifted here; --shift enters these routes through the
    # lattice numerator, not the stored actions
    return marked_action_spectrum(surface, args.k_max)


def _spectrum_text(spectrum, fmt: str) -> str:
    return spectrum.to_json() if fmt == "json" else spectrum.to_csv()


def cmd_spectrum_direct(args) -> int:
    spec = parse_domain_spec(args.profile)
    spectrum = direct_spectrum(spec.require_profile(), args.m_max,
                               hbar=args.hbar, shift=_parse_shift(args.shift))
    _write(args.out, _spectrum_text(spectrum, args.format))
    return 0


def cmd_spectrum_variational(args) -> int:
    actions = _load_actions(args)
    spectrum = variational_spectrum(actions, args.m_max, degree=args.degree,
                                    hbar=args.hbar,
                                    shift=_parse_shift(args.shift),
                                    orientation=args.orientation)
    _write(args.out, _spectrum_text(spectrum, args.format))
    return 0


def cmd_spectrum_reconstruct(args) -> int:
    reference = None
    if getattr(args, "actions", None):
        actions = _load_actions(args)
    else:
        spec = parse_domain_spec(args.profile)
        reference = spec.make_surface(args.resolution)
        actions = marked_action_spectrum(reference, args.k_max)
    spectrum, recon = reconstruction_spectrum(actions, args.m_max,
                                              degree=args.degree,
                                              hbar=args.hbar,
                                              shift=_parse_shift(args.shift),
                                              reference=reference)
    _write(args.out, _spectrum_text(spectrum, args.format))
    if args.report:
        _write(args.report,
               json.dumps(recon.report.to_json_dict(), indent=2,
                          sort_keys=True) + "\n")
    return 0


def cmd_actions(args) -> int:
    spec = parse_domain_spec(args.profile)
    surface = spec.make_surface(args.resolution)
    actions = marked_action_spectrum(surface, args.k_max,
                                     shift=_parse_shift(args.shift))
    _write(args.out,
           actions.to_json() if args.format == "json" else actions.to_csv())
    return 0


def cmd_legendre_dual(args) -> int:
    spec = parse_domain_spec(args.profile)
    surface = spec.make_surface(args.resolution)
    dual = hypersurface_transform(surface, resolution=args.resolution)
    params = np.linspace(dual.param_lo, dual.param_hi, args.samples)
    points = dual.point(params)
    if args.format == "json":
        doc = {"profile": spec.name,
               "params": [float(t) for t in params],
               "points": [[float(x) for x in row] for row in points]}
        _write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "x_1", "x_2"])
        for t, row in zip(params, points):
            w.writerow([_fmt(t)] + [_fmt(x) for x in row])
        _write(args.out, buf.getvalue())
    return 0


def cmd_billiard_solve(args) -> int:
    n = args.n + (RADIAL_SHIFT if args.maslov else 0.0)
    level = BilliardLevel.solve(args.m, n, radius=args.radius, hbar=args.hbar,
                                tol=args.tol)
    if args.format == "json":
        doc = {"m": level.m, "n": level.n, "F": level.momentum,
               "E": level.energy, "residual": level.residual,
               "radius": level.radius, "hbar": level.hbar}
        _write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "n", "F", "E", "residual"])
        w.writerow([level.m, _fmt(level.n), _fmt(level.momentum),
                    _fmt(level.energy), _fmt(level.residual)])
        _write(args.out, buf.getvalue())
    return 0


def cmd_billiard_crosscheck(args) -> int:
    report = crosscheck_disk(args.m1, args.m2, k_max=args.k_max,
                             shift=_parse_shift(args.shift), hbar=args.hbar)
    doc = report.to_json_dict()
    if args.format == "csv":
        keys = sorted(doc)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)

        def cell(v):
            if isinstance(v, float):
                return _fmt(v)
            if isinstance(v, (list, tuple)):
                return ";".join(cell(x) for x in v)
            return v

        w.writerow([cell(doc[k]) for k in keys])
        _write(args.out, buf.getvalue())
    else:
        _write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_minmax_certify(args) -> int:
    actions = _load_actions(args)
    cert = minmax_certificate(actions, args.energy, _parse_lattice_point(args.m),
                              shift=_parse_shift(args.shift), hbar=args.hbar,
                              ells=range(1, args.ell_max + 1),
                              orientation=args.orientation)
    if args.format == "json":
        doc = {"energy": cert.energy, "m": list(cert.m),
               "shift": list(cert.shift.values), "hbar": cert.hbar,
               "direction_constant": cert.direction_constant,
               "sign": cert.sign,
               "records": [{"ell": r.ell, "value": r.value,
                            "direction": list(r.direction),
                            "multiple": r.multiple} for r in cert.records]}
        _write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ell", "value", "direction", "multiple"])
        for r in cert.records:
            w.writerow([r.ell, _fmt(r.value),
                        ";".join(str(k) for k in r.direction), r.multiple])
        _write(args.out, buf.getvalue())
    return 0


def _add_common(p, *, out=True) -> None:
    if out:
        p.add_argument("--out", default="-", help="output path ('-' = stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--hbar", type=float, default=1.0)


def _add_profile(p, *, k_max=False, actions=False) -> None:
    p.add_argument("--profile", help="builtin name or JSON spec file")
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    if k_max:
        p.add_argument("--k-max", type=int, default=100, dest="k_max")
    if actions:
        p.add_argument("--actions", help="precomputed actions file (CSV or JSON)")
        p.add_argument("--orientation", choices=("convex", "concave", "general"),
                       help="orientation of a CSV actions file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ebk",
        description="EBK spectra of toric domains: direct, variational, "
                    "and reconstruction routes, plus the disk billiard.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum-direct", help="E_m = f(hbar(m+mu)) per lattice point")
    _add_profile(p)
    p.add_argument("--m-max", type=int, required=True, dest="m_max")
    p.add_argument("--shift")
    _add_common(p)
    p.set_defaults(fn=cmd_spectrum_direct)

    p = sub.add_parser("spectrum-variational",
                       help="extremal-ratio spectrum over marked actions")
    _add_profile(p, k_max=True, actions=True)
    p.add_argument("--m-max", type=int, required=True, dest="m_max")
    p.add_argument("--degree", type=float, default=1.0)
    p.add_argument("--shift")
    _add_common(p)
    p.set_defaults(fn=cmd_spectrum_variational)

    p = sub.add_parser("spectrum-reconstruct",
                       help="spectrum read off a surface rebuilt from k/a")
    _add_profile(p, k_max=True, actions=True)
    p.add_argument("--m-max", type=int, required=True, dest="m_max")
    p.add_argument("--degree", type=float, default=1.0)
    p.add_argument("--shift")
    p.add_argument("--report", help="write the reconstruction report JSON here")
    _add_common(p)
    p.set_defaults(fn=cmd_spectrum_reconstruct)

    p = sub.add_parser("actions", help="enumerate the marked action spectrum")
    _add_profile(p, k_max=True)
    p.add_argument("--shift")
    _add_common(p)
    p.set_defaults(fn=cmd_actions)

    p = sub.add_parser("legendre-dual", help="sample the dual surface L(N)")
    _add_profile(p)
    p.add_argument("--samples", type=int, default=256)
    _add_common(p)
    p.set_defaults(fn=cmd_legendre_dual)

    p = sub.add_parser("billiard-solve", help="solve the radial phase equation")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--maslov", action="store_true",
                   help=f"add the radial shift {RADIAL_SHIFT} to n")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-12)
    _add_common(p)
    p.set_defaults(fn=cmd_billiard_solve)

    p = sub.add_parser("billiard-crosscheck",
                       help="toric route vs phase equation for the disk")
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    p.add_argument("--k-max", type=int, default=2000, dest="k_max")
    p.add_argument("--shift")
    _add_common(p)
    # the report is a JSON document; CSV is the opt-in flattened form
    p.set_defaults(fn=cmd_billiard_crosscheck, format="json")

    p = sub.add_parser("minmax-certify",
                       help="finite minmax certificate for the sign of E - E_m")
    _add_profile(p, k_max=True, actions=True)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--m", required=True, help="lattice point, e.g. 1,1")
    p.add_argument("--ell-max", type=int, default=20, dest="ell_max")
    p.add_argument("--shift")
    _add_common(p)
    p.set_defaults(fn=cmd_minmax_certify)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "profile", None) is None \
            and getattr(args, "actions", None) is None \
            and args.fn in (cmd_spectrum_variational, cmd_spectrum_reconstruct,
                            cmd_minmax_certify, cmd_actions, cmd_spectrum_direct,
                            cmd_legendre_dual):
        print("error: --profile (or --actions) is required", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EbkError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
