"""Command-line front end tying the algebra and simulation layers together.

Model files are JSON documents with a ``kind`` of "statespace" (fields A, B, C
as nested arrays of rational strings) or "mcarma" (fields p, q, d, m,
A_coeffs, B_coeffs).  Unknown fields are rejected so a typo cannot silently
change a model.  Reports are JSON with sorted keys, two-space indent and a
trailing newline, so re-parsing and re-serializing a report reproduces it
byte for byte.  Rationals stay strings end to end; floats appear only in
simulation CSVs and metadata sidecars.

Exit codes are a stable interface:

  0  success (check-equiv: models equivalent)
  1  check-equiv: models distinct
  2  parse or usage error (bad JSON, bad rational, unknown field, bad flags)
  3  dimension error
  4  degenerate transfer function (identically zero, or not strictly proper)
  5  unstable drift with stationary initialization
  6  spectral density pole on the sampled axis
"""

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateTransferFunction,
    DimensionMismatch,
    ModelFileError,
    NotStrictlyProper,
    PoleOnEvaluationAxis,
    UnstableModel,
)
from .exactalg import (
    Poly,
    PolyMatrix,
    TransferFunction,
    format_rational,
    parse_rational,
    ratmat_equal,
)
from .realization import (
    McarmaSpec,
    StateSpaceModel,
    assemble_observer_ss,
    controller_realization,
    observer_realization,
    tf_equivalent,
    transfer_function,
)
from .simulate import (
    FixedAtomJumps,
    GaussianJumps,
    LevyDriverSpec,
    SimulationConfig,
    draw_compound_poisson_jumps,
    simulate_brownian,
    simulate_compound_poisson,
    simulate_compound_poisson_pair,
    spectral_density,
)

EXIT_OK = 0
EXIT_DISTINCT = 1
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_DEGENERATE = 4
EXIT_UNSTABLE = 5
EXIT_POLE = 6


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------

def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path} is not valid JSON: {exc}") from exc


def _check_fields(obj: dict, required: set, label: str) -> None:
    missing = required - set(obj)
    if missing:
        raise ModelFileError(f"{label} is missing fields: {sorted(missing)}")
    unknown = set(obj) - required
    if unknown:
        raise ModelFileError(f"{label} has unknown fields: {sorted(unknown)}")


def _rational_entry(value, label: str) -> Fraction:
    # Strings and ints are exact; floats are rejected rather than rounded.
    if isinstance(value, str):
        try:
            return parse_rational(value)
        except ValueError as exc:
            raise ModelFileError(f"{label}: {exc}") from exc
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    raise ModelFileError(
        f"{label}: expected a rational string like \"3/4\", got {value!r}")


def _rational_rows(value, label: str) -> tuple:
    if (not isinstance(value, list) or not value
            or any(not isinstance(row, list) or not row for row in value)):
        raise ModelFileError(f"{label} must be a non-empty nested array")
    return tuple(
        tuple(_rational_entry(v, f"{label}[{i}][{j}]")
              for j, v in enumerate(row))
        for i, row in enumerate(value))


def _int_field(obj: dict, name: str, label: str) -> int:
    value = obj[name]
    if not isinstance(value, int) or isinstance(value, bool):
        raise ModelFileError(f"{label}.{name} must be an integer")
    return value


def load_model(path: str):
    """Parse a model file into a StateSpaceModel or McarmaSpec.

    Structural problems (bad JSON, unknown fields, malformed rationals,
    invalid orders) raise ModelFileError; shape inconsistencies raise
    DimensionMismatch so they map to a distinct exit code.
    """
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise ModelFileError(f"{path}: top level must be a JSON object")
    kind = obj.get("kind")
    if kind == "statespace":
        _check_fields(obj, {"kind", "A", "B", "C"}, path)
        return StateSpaceModel(a=_rational_rows(obj["A"], f"{path}:A"),
                               b=_rational_rows(obj["B"], f"{path}:B"),
                               c=_rational_rows(obj["C"], f"{path}:C"))
    if kind == "mcarma":
        _check_fields(obj, {"kind", "p", "q", "d", "m", "A_coeffs", "B_coeffs"},
                      path)
        p = _int_field(obj, "p", path)
        q = _int_field(obj, "q", path)
        d = _int_field(obj, "d", path)
        m = _int_field(obj, "m", path)
        for name in ("A_coeffs", "B_coeffs"):
            if not isinstance(obj[name], list):
                raise ModelFileError(f"{path}.{name} must be an array")
        a_coeffs = tuple(_rational_rows(ai, f"{path}:A_coeffs[{k}]")
                         for k, ai in enumerate(obj["A_coeffs"]))
        b_coeffs = tuple(_rational_rows(bj, f"{path}:B_coeffs[{k}]")
                         for k, bj in enumerate(obj["B_coeffs"]))
        try:
            return McarmaSpec(p=p, q=q, d=d, m=m,
                              a_coeffs=a_coeffs, b_coeffs=b_coeffs)
        except DimensionMismatch:
            raise
        except ValueError as exc:
            raise ModelFileError(f"{path}: {exc}") from exc
    raise ModelFileError(
        f"{path}: kind must be \"statespace\" or \"mcarma\", got {kind!r}")


def model_to_ss(model) -> StateSpaceModel:
    """Coefficient specs route through the observer assembly."""
    if isinstance(model, McarmaSpec):
        return assemble_observer_ss(model)
    return model


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

def _rat_rows_json(mat) -> list:
    return [[format_rational(v) for v in row] for row in mat]


def _poly_json(poly: Poly) -> list:
    # Ascending coefficients as rational strings; the zero polynomial is [].
    return [format_rational(c) for c in poly.coeffs]


def _polymatrix_json(pm: PolyMatrix) -> list:
    return [[_poly_json(pm[i, j]) for j in range(pm.cols)]
            for i in range(pm.rows)]


def _statespace_json(ss: StateSpaceModel) -> dict:
    # Shaped exactly like a "statespace" model file, so reports can be fed
    # back in as inputs.
    return {"kind": "statespace", "A": _rat_rows_json(ss.a),
            "B": _rat_rows_json(ss.b), "C": _rat_rows_json(ss.c)}


def _mfd_json(mfd) -> dict:
    return {"side": mfd.side, "p": mfd.p, "q": mfd.q,
            "den": _polymatrix_json(mfd.den), "num": _polymatrix_json(mfd.num)}


def report_tf(h: TransferFunction) -> dict:
    entries = [[{"num": _poly_json(h[i, j].num), "den": _poly_json(h[i, j].den)}
                for j in range(h.cols)] for i in range(h.rows)]
    return {"kind": "transfer_function", "outputs": h.rows, "inputs": h.cols,
            "common_den": _poly_json(h.common_den), "entries": entries}


def report_canonical(form: str, h: TransferFunction) -> dict:
    if form == "observer":
        real, mfd = observer_realization(h)
        spec = real.mcarma
        report = {
            "kind": "canonical_form",
            "form": "observer",
            "p": spec.p,
            "q": spec.q,
            "ar_coeffs": [_rat_rows_json(ai) for ai in spec.a_coeffs],
            "ma_coeffs": [_rat_rows_json(bj) for bj in spec.b_coeffs],
            "input_blocks": [_rat_rows_json(bk) for bk in spec.beta],
            "statespace": _statespace_json(real.statespace),
            "mfd": _mfd_json(mfd),
        }
    elif form == "controller":
        real, mfd = controller_realization(h)
        report = {
            "kind": "canonical_form",
            "form": "controller",
            "p": len(real.atilde_coeffs),
            "q_tilde": real.q_tilde,
            "ar_coeffs": [_rat_rows_json(ai) for ai in real.atilde_coeffs],
            "num_coeffs": [_rat_rows_json(nk) for nk in real.n_coeffs],
            "num_coeffs_descending": [_rat_rows_json(bj)
                                      for bj in real.btilde_coeffs],
            "statespace": _statespace_json(real.statespace),
            "mfd": _mfd_json(mfd),
        }
    else:
        raise ValueError(f"unknown canonical form: {form!r}")
    report["tf_match"] = ratmat_equal(transfer_function(real.statespace), h)
    return report


def canonical_dumps(report: dict) -> str:
    """The one serialization used everywhere: sorted keys, 2-space indent,
    trailing newline.  Dump-parse-dump is the identity."""
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _emit_report(report: dict, out_path) -> None:
    text = canonical_dumps(report)
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Driver flags
# ---------------------------------------------------------------------------

def _load_sigma(spec: str, m: int) -> np.ndarray:
    if spec == "identity":
        return np.eye(m)
    obj = _load_json(spec)
    try:
        sigma = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelFileError(f"{spec}: covariance must be a numeric array") from exc
    if sigma.shape != (m, m):
        raise DimensionMismatch(
            f"covariance must be {m}x{m} to match the model input")
    return sigma


def _load_jumps(spec: str, m: int):
    if spec == "gaussian":
        return GaussianJumps(mean=np.zeros(m), cov=np.eye(m))
    if spec.startswith("atoms:"):
        obj = _load_json(spec[len("atoms:"):])
        if (not isinstance(obj, dict)
                or set(obj) != {"atoms", "probabilities"}):
            raise ModelFileError(
                "atom file must hold exactly the fields atoms, probabilities")
        try:
            return FixedAtomJumps(atoms=obj["atoms"],
                                  probabilities=obj["probabilities"])
        except DimensionMismatch:
            raise
        except (TypeError, ValueError) as exc:
            raise ModelFileError(f"bad atom file: {exc}") from exc
    raise ModelFileError(
        f"jump distribution must be \"gaussian\" or \"atoms:<file>\", got {spec!r}")


def _jump_json(jumps) -> dict:
    if isinstance(jumps, GaussianJumps):
        return {"kind": "gaussian", "mean": jumps.mean.tolist(),
                "cov": jumps.cov.tolist()}
    return {"kind": "atoms", "atoms": jumps.atoms.tolist(),
            "probabilities": jumps.probabilities.tolist()}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_tf(args) -> int:
    h = transfer_function(model_to_ss(load_model(args.model)))
    _emit_report(report_tf(h), args.out)
    return EXIT_OK


def cmd_canonical(args) -> int:
    h = transfer_function(model_to_ss(load_model(args.model)))
    _emit_report(report_canonical(args.form, h), args.out)
    return EXIT_OK


def cmd_check_equiv(args) -> int:
    ss1 = model_to_ss(load_model(args.model1))
    ss2 = model_to_ss(load_model(args.model2))
    equivalent = tf_equivalent(ss1, ss2)
    report = {"kind": "equivalence",
              "verdict": "EQUIVALENT" if equivalent else "DISTINCT"}
    lines = [report["verdict"]]
    if args.simulate == "cp":
        driver = LevyDriverSpec.compound_poisson(
            rate=args.rate,
            jumps=GaussianJumps(mean=np.zeros(ss1.m), cov=np.eye(ss1.m)))
        cfg = SimulationConfig(step_size=args.h, steps=args.steps,
                               seed=args.seed)
        path1, path2 = simulate_compound_poisson_pair(ss1, ss2, driver, cfg)
        gap = float(np.max(np.abs(path1.outputs - path2.outputs)))
        scale = float(max(np.max(np.abs(path1.outputs)),
                          np.max(np.abs(path2.outputs))))
        report["sup_norm_gap"] = gap
        report["relative_gap"] = gap / scale if scale > 0 else 0.0
        report["simulation"] = {"driver": "cp", "rate": args.rate,
                                "seed": args.seed, "steps": args.steps,
                                "step_size": args.h}
        lines.append(f"sup_norm_gap {gap:.17g}")
        lines.append(f"relative_gap {report['relative_gap']:.17g}")
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(canonical_dumps(report))
    return EXIT_OK if equivalent else EXIT_DISTINCT


def cmd_simulate(args) -> int:
    ss = model_to_ss(load_model(args.model))
    cfg = SimulationConfig(step_size=args.h, steps=args.steps, seed=args.seed,
                           init=args.init)
    if args.driver == "brownian":
        sigma = _load_sigma(args.sigma, ss.m)
        LevyDriverSpec.brownian(sigma)  # validates symmetry and PSD
        path = simulate_brownian(ss, sigma, cfg)
        driver_meta = {"kind": "brownian", "sigma": sigma.tolist()}
    else:
        jumps = _load_jumps(args.jump, ss.m)
        driver = LevyDriverSpec.compound_poisson(rate=args.rate, jumps=jumps)
        horizon = (cfg.steps - 1) * cfg.step_size
        times, sizes = draw_compound_poisson_jumps(driver, horizon, cfg)
        path = simulate_compound_poisson(ss, times, sizes, cfg)
        driver_meta = {"kind": "compound_poisson", "rate": driver.rate,
                       "jump": _jump_json(jumps)}
    path.to_csv(args.out)
    meta = {"kind": "simulation_metadata", "model": args.model,
            "driver": driver_meta, "seed": args.seed, "steps": args.steps,
            "step_size": args.h, "init": args.init, "output": args.out,
            "outputs": ss.d, "inputs": ss.m, "state_dim": ss.n}
    with open(args.out + ".meta.json", "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(canonical_dumps(meta))
    sys.stdout.write(args.out + "\n")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    ss = model_to_ss(load_model(args.model))
    h = transfer_function(ss)
    sigma = _load_sigma(args.sigma, ss.m)
    values = [(omega, spectral_density(h, sigma, omega))
              for omega in args.omegas]
    d = ss.d
    header = ["omega"]
    for i in range(d):
        for j in range(d):
            header.append(f"f{i + 1}{j + 1}_re")
            header.append(f"f{i + 1}{j + 1}_im")
    with open(args.out, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for omega, f in values:
            cells = [f"{omega:.17g}"]
            for i in range(d):
                for j in range(d):
                    cells.append(f"{f[i][j].real:.17g}")
                    cells.append(f"{f[i][j].imag:.17g}")
            fh.write(",".join(cells) + "\n")
    sys.stdout.write(args.out + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _omega_list(text: str):
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"omegas must be comma-separated numbers: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carmakit",
        description="Exact canonical realizations, equivalence checks and "
                    "seeded simulation for rational linear state space models.")
    sub = parser.add_subparsers(dest="command", required=True)

    tf = sub.add_parser("tf", help="print the exact transfer function")
    tf.add_argument("model", help="model file (JSON)")
    tf.add_argument("-o", "--out", help="also write the report to this path")
    tf.set_defaults(func=cmd_tf)

    canon = sub.add_parser(
        "canonical", help="emit a canonical realization and its matrix fraction")
    canon.add_argument("model", help="model file (JSON)")
    canon.add_argument("--form", choices=["observer", "controller"],
                       required=True)
    canon.add_argument("-o", "--out", help="also write the report to this path")
    canon.set_defaults(func=cmd_canonical)

    equiv = sub.add_parser(
        "check-equiv", help="decide whether two models share a transfer function")
    equiv.add_argument("model1", help="first model file")
    equiv.add_argument("model2", help="second model file")
    equiv.add_argument("--simulate", choices=["cp"],
                       help="also run a shared-jump pathwise comparison")
    equiv.add_argument("--rate", type=float, default=1.0,
                       help="jump rate for --simulate cp (default 1.0)")
    equiv.add_argument("--seed", type=int, help="seed for --simulate cp")
    equiv.add_argument("--steps", type=int, help="grid points for --simulate cp")
    equiv.add_argument("--h", type=float, help="step size for --simulate cp")
    equiv.add_argument("-o", "--out", help="write the verdict report to this path")
    equiv.set_defaults(func=cmd_check_equiv)

    sim = sub.add_parser("simulate", help="simulate a seeded sample path to CSV")
    sim.add_argument("model", help="model file (JSON)")
    sim.add_argument("--driver", choices=["brownian", "cp"], required=True)
    sim.add_argument("--sigma", default="identity",
                     help="Brownian covariance: \"identity\" or a JSON matrix file")
    sim.add_argument("--rate", type=float,
                     help="jump rate (required with --driver cp)")
    sim.add_argument("--jump", default="gaussian",
                     help="jump distribution: \"gaussian\" or \"atoms:<file>\"")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--steps", type=int, required=True)
    sim.add_argument("--h", type=float, required=True, help="grid step size")
    sim.add_argument("--init", choices=["zero", "stationary"], default="zero")
    sim.add_argument("-o", "--out", required=True, help="output CSV path")
    sim.set_defaults(func=cmd_simulate)

    spec = sub.add_parser(
        "spectrum", help="tabulate the spectral density on given frequencies")
    spec.add_argument("model", help="model file (JSON)")
    spec.add_argument("--sigma", default="identity",
                      help="driver covariance: \"identity\" or a JSON matrix file")
    spec.add_argument("--omegas", type=_omega_list, required=True,
                      help="comma-separated frequencies")
    spec.add_argument("-o", "--out", required=True, help="output CSV path")
    spec.set_defaults(func=cmd_spectrum)

    return parser


def _validate_flag_combinations(parser, args) -> None:
    if args.command == "check-equiv" and args.simulate == "cp":
        missing = [name for name in ("seed", "steps", "h")
                   if getattr(args, name) is None]
        if missing:
            parser.error("--simulate cp requires --" + ", --".join(missing))
    if args.command == "simulate" and args.driver == "cp":
        if args.rate is None:
            parser.error("--driver cp requires --rate")
        if args.init == "stationary":
            parser.error("--init stationary is only available with "
                         "--driver brownian")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate_flag_combinations(parser, args)
    try:
        return args.func(args)
    except ModelFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (DegenerateTransferFunction, NotStrictlyProper) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except UnstableModel as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except PoleOnEvaluationAxis as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POLE


if __name__ == "__main__":
    sys.exit(main())
