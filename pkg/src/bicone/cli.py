"""Command-line interface: seeded, replayable runs emitting JSON or CSV.

Spec strings:
  modulus family   identity | power:eps=0.5 | iterlog:k=2,alpha=1.0,n=2
  map              cone:phi=<family>[,n=N] | glued:phi=<family>[,n=N]
                   | radial:power:eps=0.5[,n=N] | radial:logexample:beta=1,n=2
  radius grid      log:a..b[:N]  (N log-spaced points, default 24)
                   or a plain comma-separated list of radii
  points           comma-separated coordinates; semicolons separate rows

Every run echoes its fully resolved configuration (defaults included) into
the output header, so outputs are self-describing and byte-identical under
replay with the same seed.  Exit status: 0 all-pass, 1 verification or
numerical failure (the failing report is still emitted), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .continuity import (averaging_lemma_check, linear_dilatation,
                         modulus_profile, verify_global_modulus_F,
                         verify_global_modulus_H, verify_main_theorem)
from .deformations import ConeMap, GluedMap, RadialMap
from .energy import (biconformal_energy, conformal_energy_H,
                     energy_F_monte_carlo, inner_distortion_integral)
from .moduli import (EnergyDivergenceError, ModulusFunction,
                     check_admissibility, measured_constants)
from .reports import SCHEMA_VERSION, VerificationReport


class SpecError(ValueError):
    """A malformed family/map/grid specification (a usage error)."""


def _parse_kv(body: str) -> dict:
    out = {}
    for item in body.split(","):
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise SpecError(f"expected key=value, got {item!r}")
        out[key] = value
    return out


def _no_extras(name: str, kv: dict) -> None:
    if kv:
        raise SpecError(f"{name} spec has unknown parameters {sorted(kv)}")


def parse_family(spec: str) -> tuple[ModulusFunction, int | None]:
    """Parse a modulus-family spec; returns (family, dimension hint)."""
    name, colon, body = spec.partition(":")
    if "," in name:          # bare family with trailing params: identity,n=2
        name, _, extra = name.partition(",")
        body = extra + ("," + body if colon else "")
    kv = _parse_kv(body)
    n_hint = int(kv.pop("n")) if "n" in kv else None
    try:
        if name == "identity":
            if kv:
                raise SpecError(f"identity takes no parameters, got {kv}")
            return ModulusFunction.identity(), n_hint
        if name == "power":
            eps = float(kv.pop("eps"))
            _no_extras(name, kv)
            return ModulusFunction.power(eps), n_hint
        if name == "iterlog":
            depth = int(kv.pop("k"))
            alpha = float(kv.pop("alpha", 1.0))
            _no_extras(name, kv)
            if n_hint is None:
                raise SpecError("iterlog needs n=, e.g. iterlog:k=2,alpha=1,n=2")
            phi = ModulusFunction.iterlog(depth=depth, alpha=alpha, n=n_hint)
            return phi, n_hint
    except KeyError as missing:
        raise SpecError(f"family {name!r} is missing parameter {missing}") from None
    except (TypeError, ValueError) as bad:
        raise SpecError(f"bad family spec {spec!r}: {bad}") from None
    raise SpecError(f"unknown family {name!r} (identity, power, iterlog)")


def parse_map(spec: str):
    """Parse a map spec into a ConeMap, GluedMap, or RadialMap."""
    kind, _, rest = spec.partition(":")
    try:
        if kind in ("cone", "glued"):
            if not rest.startswith("phi="):
                raise SpecError(f"{kind} map needs phi=<family>, got {spec!r}")
            phi, n_hint = parse_family(rest[len("phi="):])
            n = n_hint if n_hint is not None else 2
            return ConeMap(phi, n=n) if kind == "cone" else GluedMap(phi, n=n)
        if kind == "radial":
            sub, _, body = rest.partition(":")
            kv = _parse_kv(body)
            n = int(kv.pop("n", 2))
            if sub == "power":
                eps = float(kv.pop("eps"))
                _no_extras("radial:power", kv)
                return RadialMap("power", eps=eps, n=n)
            if sub == "logexample":
                beta = float(kv.pop("beta", 1.0))
                _no_extras("radial:logexample", kv)
                return RadialMap("logexample", beta=beta, n=n)
            raise SpecError(f"unknown radial kind {sub!r} (power, logexample)")
    except KeyError as missing:
        raise SpecError(f"map {kind!r} is missing parameter {missing}") from None
    except (TypeError, ValueError) as bad:
        raise SpecError(f"bad map spec {spec!r}: {bad}") from None
    raise SpecError(f"unknown map kind {kind!r} (cone, glued, radial)")


def parse_radii(spec: str) -> np.ndarray:
    if spec.startswith("log:"):
        body = spec[len("log:"):]
        parts = body.split(":")
        if len(parts) not in (1, 2) or ".." not in parts[0]:
            raise SpecError(f"radius grid must be log:a..b[:N], got {spec!r}")
        a_str, _, b_str = parts[0].partition("..")
        count = int(parts[1]) if len(parts) == 2 else 24
        try:
            a, b = float(a_str), float(b_str)
        except ValueError:
            raise SpecError(f"bad radius bounds in {spec!r}") from None
        if not (0 < a < b) or count < 2:
            raise SpecError("radius grid needs 0 < a < b and N >= 2")
        return np.geomspace(a, b, count)
    try:
        radii = np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise SpecError(f"bad radius list {spec!r}") from None
    if radii.size == 0 or np.any(radii <= 0):
        raise SpecError("radii must be positive")
    return radii


def parse_points(spec: str, n: int) -> np.ndarray:
    try:
        rows = [[float(v) for v in row.split(",")] for row in spec.split(";")]
    except ValueError:
        raise SpecError(f"bad point list {spec!r}") from None
    if len({len(r) for r in rows}) != 1:
        raise SpecError(f"rows of {spec!r} have mixed lengths")
    arr = np.array(rows)
    if arr.shape[1] != n:
        raise SpecError(f"points must have {n} coordinates, got {arr.shape[1]}")
    return arr


def parse_center(spec: str, n: int) -> np.ndarray:
    if spec.strip() == "0":
        return np.zeros(n)
    center = parse_points(spec, n)
    if center.shape[0] != 1:
        raise SpecError("center must be a single point")
    return center[0]


# -- output plumbing -------------------------------------------------------

def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"func", "output", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit_json(args, result: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION,
               "config": {**_config_echo(args), "out": "json"},
               "result": result}
    _write(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit_csv(args, header: list, rows: list) -> None:
    lines = [f"# schema_version={SCHEMA_VERSION}"]
    lines += [f"# {k}={v}" for k, v in {**_config_echo(args), "out": "csv"}.items()]
    lines.append(",".join(header))
    lines += [",".join(repr(v) if isinstance(v, float) else str(v) for v in row)
              for row in rows]
    _write(args, "\n".join(lines) + "\n")


def _write(args, text: str) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_result(args, report: VerificationReport) -> int:
    if args.out == "csv":
        rows = [(c.condition, "pass" if c.passed else "fail",
                 "" if c.measured_constant is None else float(c.measured_constant),
                 "" if c.tolerance is None else float(c.tolerance))
                for c in report.checks]
        _emit_csv(args, ["condition", "status", "measured", "tolerance"], rows)
    else:
        _emit_json(args, report.to_dict())
    return 0 if report.passed else 1


# -- subcommands -----------------------------------------------------------

def _cmd_modulus(args) -> int:
    m = parse_map(args.map)
    center = parse_center(args.center, m.n)
    est = modulus_profile(m, center, parse_radii(args.radii), norm=args.norm,
                          count=args.count, seed=args.seed)
    if args.out == "csv":
        _emit_csv(args, ["radius", "value"],
                  list(zip(est.radii.tolist(), est.values.tolist())))
    else:
        _emit_json(args, {"center": est.center.tolist(),
                          "radii": est.radii.tolist(),
                          "values": est.values.tolist(),
                          "norm_used": est.norm_used,
                          "samples_per_radius": est.samples_per_radius,
                          "seed": est.seed})
    return 0


def _cmd_energy(args) -> int:
    m = parse_map(args.map)
    if args.integrand == "bi" and not isinstance(m, GluedMap):
        raise SpecError("--integrand bi needs a glued: map")
    if isinstance(m, GluedMap) and args.integrand != "bi":
        m = m.cone
    if isinstance(m, RadialMap):
        raise SpecError("energy integrals are defined for cone/glued maps")
    status = "converged"
    try:
        if args.method == "quad":
            res = {"forward": conformal_energy_H,
                   "inverse": inner_distortion_integral,
                   "bi": biconformal_energy}[args.integrand](m, tol=args.tol)
        else:
            if args.integrand != "inverse":
                raise SpecError("--method mc estimates the inverse-map energy; "
                                "use --integrand inverse")
            res = energy_F_monte_carlo(m, samples=int(args.samples),
                                       seed=args.seed)
    except EnergyDivergenceError as diverged:
        _emit_json(args, {"status": "divergent", "detail": str(diverged)})
        return 1
    _emit_json(args, {"status": status, "value": res.value,
                      "error_estimate": res.error_estimate,
                      "method": res.method,
                      "samples_or_nodes": res.samples_or_nodes,
                      "seed": res.seed})
    return 0


def _cmd_verify(args) -> int:
    if args.suite in ("main-theorem", "conditions", "global-h", "global-f",
                      "averaging"):
        if not args.phi:
            raise SpecError(f"verify {args.suite} needs --phi")
        phi, n_hint = parse_family(args.phi)
        n = n_hint if n_hint is not None else 2
    if args.suite == "conditions":
        report = check_admissibility(phi)
    elif args.suite == "main-theorem":
        radii = parse_radii(args.radii) if args.radii else None
        report = verify_main_theorem(GluedMap(phi, n=n), radii=radii,
                                     count=args.count, seed=args.seed)
    elif args.suite == "global-h":
        report = verify_global_modulus_H(ConeMap(phi, n=n), pairs=args.pairs,
                                         seed=args.seed)
    elif args.suite == "global-f":
        report = verify_global_modulus_F(ConeMap(phi, n=n), pairs=args.pairs,
                                         seed=args.seed)
    elif args.suite == "averaging":
        report = _averaging_suite(phi, n, args.pairs, args.seed, args.tol)
    else:
        raise SpecError(f"unknown suite {args.suite!r}")
    return _report_result(args, report)


def _averaging_suite(phi: ModulusFunction, n: int, pairs: int, seed: int,
                     tol: float) -> VerificationReport:
    """Averaging inequality on random pairs plus the antiparallel equality."""
    rc = measured_constants(phi).concavity_radius
    rng = np.random.default_rng(seed)
    worst = -np.inf
    failed = 0
    for _ in range(pairs):
        a, b = rng.normal(size=(2, n))
        a *= rng.uniform(0.02, 1.0) * rc / np.linalg.norm(a)
        b *= rng.uniform(0.02, 1.0) * rc / np.linalg.norm(b)
        rep = averaging_lemma_check(phi.derivative, a, b, quad_tol=tol, r=rc,
                                    lower_integral=phi)
        defect = rep.checks[0].measured_constant
        worst = max(worst, defect)
        failed += 0 if rep.passed else 1
    a = np.zeros(n)
    a[0] = 0.5 * rc
    eq = averaging_lemma_check(phi.derivative, a, -a, quad_tol=tol, r=rc,
                               lower_integral=phi)
    report = VerificationReport(
        title="segment averaging inequality, randomized suite", seed=seed,
        sample_count=pairs,
        metadata={"family": phi.describe(), "concavity_radius": rc})
    report.add(f"inequality holds on {pairs} random pairs", failed == 0,
               measured_constant=worst, grid_size=pairs, tolerance=tol)
    eq_defect = eq.checks[-1].measured_constant
    report.add("equality when a = -b", eq.passed,
               measured_constant=eq_defect, tolerance=1e-8)
    return report


def _cmd_dilatation(args) -> int:
    m = parse_map(args.map)
    center = parse_center(args.center, m.n)
    est = linear_dilatation(m, center, parse_radii(args.radii),
                            count=args.count, seed=args.seed,
                            threshold=args.threshold)
    if args.out == "csv":
        _emit_csv(args, ["radius", "ratio"],
                  list(zip(est.radii.tolist(), est.ratios.tolist())))
    else:
        _emit_json(args, {"center": est.center.tolist(),
                          "radii": est.radii.tolist(),
                          "ratios": [r if np.isfinite(r) else "inf"
                                     for r in est.ratios.tolist()],
                          "verdict": est.verdict})
    return 0


def _cmd_invert(args) -> int:
    m = parse_map(args.map)
    pts = parse_points(args.point, m.n)
    img = np.atleast_2d(m.inverse(pts, tol=args.tol))
    _emit_json(args, {"points": pts.tolist(), "images": img.tolist()})
    return 0


def _cmd_eval(args) -> int:
    if args.phi:
        phi, _ = parse_family(args.phi)
        s = parse_radii(args.points)
        rows = list(zip(s.tolist(), phi(s).tolist(), phi.derivative(s).tolist(),
                        phi.chord_slope(s).tolist(), phi.elasticity(s).tolist()))
        header = ["s", "phi", "derivative", "chord_slope", "elasticity"]
        if args.out == "csv":
            _emit_csv(args, header, rows)
        else:
            _emit_json(args, {"columns": header, "rows": rows})
        return 0
    if args.map:
        m = parse_map(args.map)
        pts = parse_points(args.points, m.n)
        img = np.atleast_2d(m(pts))
        _emit_json(args, {"points": pts.tolist(), "images": img.tolist()})
        return 0
    raise SpecError("eval needs --phi or --map")


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bicone",
        description="Deformations of the double cone with prescribed moduli "
                    "of continuity: moduli, energies, verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=0):
        p.add_argument("--out", choices=("json", "csv"), default="json")
        p.add_argument("--output", default=None, metavar="PATH")
        p.add_argument("--seed", type=int, default=seed)

    p = sub.add_parser("modulus", help="sampled modulus of continuity profile")
    p.add_argument("--map", required=True)
    p.add_argument("--center", default="0")
    p.add_argument("--radii", default="log:1e-6..1")
    p.add_argument("--norm", choices=("cone", "euclid"), default="cone")
    p.add_argument("--count", type=int, default=4096)
    common(p, seed=1)
    p.set_defaults(func=_cmd_modulus)

    p = sub.add_parser("energy", help="conformal/distortion energy of a map")
    p.add_argument("--map", required=True)
    p.add_argument("--method", choices=("quad", "mc"), default="quad")
    p.add_argument("--integrand", choices=("forward", "inverse", "bi"),
                   default="forward")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--samples", type=float, default=1e6)
    common(p, seed=42)
    p.set_defaults(func=_cmd_energy)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=("conditions", "main-theorem", "global-h",
                                     "global-f", "averaging"))
    p.add_argument("--phi", default=None)
    p.add_argument("--radii", default=None)
    p.add_argument("--count", type=int, default=512)
    p.add_argument("--pairs", type=int, default=100_000)
    p.add_argument("--tol", type=float, default=1e-10)
    common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("dilatation", help="linear dilatation probe")
    p.add_argument("--map", required=True)
    p.add_argument("--center", default="0")
    p.add_argument("--radii", default="log:1e-10..0.1")
    p.add_argument("--count", type=int, default=256)
    p.add_argument("--threshold", type=float, default=1e3)
    common(p)
    p.set_defaults(func=_cmd_dilatation)

    p = sub.add_parser("invert", help="apply the inverse map to points")
    p.add_argument("--map", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    common(p)
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("eval", help="evaluate a family or a map pointwise")
    p.add_argument("--phi", default=None)
    p.add_argument("--map", default=None)
    p.add_argument("--points", required=True)
    common(p)
    p.set_defaults(func=_cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as bad:
        sys.stderr.write(f"{parser.prog}: error: {bad}\n")
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as failure:
        sys.stderr.write(f"{parser.prog}: {type(failure).__name__}: {failure}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
