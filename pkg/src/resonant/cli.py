"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 domain error (including too many
masked cells), 4 convergence error, 130 interrupted (partial results are
still written).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .atoms import DEFAULT_ATOM_CAP, iid_power
from .dist import (
    ProbVec,
    ResourceTheory,
    asymptotic_rate,
    entropy_variance,
    irreversibility_parameter,
    relative_entropy,
    relative_entropy_variance,
    shannon_entropy,
)
from .exceptions import ConvergenceError, DomainError
from .experiments import (
    FixedError,
    FixedWork,
    HeatEngineSpec,
    default_axis,
    heat_engine_sweep,
    lambda_sweep,
    rate_sweep,
)
from .grid import INVALID, default_jobs
from .majorization import optimal_final_state
from .svg import render_heatmap, render_lines

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_INTERRUPT = 0, 2, 3, 4, 130
SWEEPS = ("heat-engine", "lambda-sweep", "rate-sweep")


class InputError(Exception):
    """Unparseable or schema-violating input."""


# -- input handling -------------------------------------------------------------


def load_schema() -> dict:
    text = resources.files("resonant").joinpath("schemas/run_config.schema.json").read_text()
    return json.loads(text)


def _read_numbers(path: Path):
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [float(tok) for tok in text.replace(",", " ").split()]
    if not isinstance(data, list) or not all(isinstance(v, (int, float)) for v in data):
        raise InputError(f"{path}: expected a flat list of numbers")
    return data


def parse_dist(spec, base: Path = Path(".")):
    """Inline list, ``"a,b,c"`` string, or path to a numbers file."""
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    path = base / spec
    if path.is_file():
        return _read_numbers(path)
    if str(spec).lstrip().startswith("["):
        try:
            data = json.loads(spec)
        except json.JSONDecodeError:
            raise InputError(f"cannot parse distribution {spec!r}") from None
        return parse_dist(data)
    try:
        return [float(tok) for tok in str(spec).replace(",", " ").split()]
    except ValueError:
        raise InputError(f"cannot read distribution {spec!r}") from None


def load_config(path: str, kind: str) -> tuple[dict, Path]:
    p = Path(path)
    try:
        cfg = json.loads(p.read_text())
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}") from None
    schema = load_schema()
    sub = dict(schema["$defs"][kind])
    sub["$defs"] = schema["$defs"]
    try:
        jsonschema.validate(cfg, sub, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(k) for k in exc.absolute_path) or "<root>"
        raise InputError(f"config invalid at {where}: {exc.message}") from None
    return cfg, p.parent


def _axis(spec, default=None):
    if spec is None:
        return default
    if isinstance(spec, dict):
        return np.linspace(spec["start"], spec["stop"], spec["num"]).tolist()
    return [float(v) for v in spec]


def _theory(cfg, default):
    return ResourceTheory.coerce(cfg.get("theory", default))


def _with_gibbs(values, gibbs):
    return ProbVec(values, gibbs)


# -- output ------------------------------------------------------------------------


def _stem(out: str) -> Path:
    p = Path(out)
    return p.with_suffix("") if p.suffix in (".csv", ".json", ".svg") else p


def _emit_grid(grid, args, svg_kind):
    interrupted = bool(grid.meta.get("interrupted"))
    if args.out:
        stem = _stem(args.out)
        stem.parent.mkdir(parents=True, exist_ok=True)
        stem.with_suffix(".csv").write_text(grid.to_csv())
        stem.with_suffix(".json").write_text(grid.to_json(indent=1) + "\n")
        written = [stem.with_suffix(".csv"), stem.with_suffix(".json")]
        if args.svg:
            render = render_heatmap if svg_kind == "heatmap" else render_lines
            stem.with_suffix(".svg").write_text(render(grid, log_scale=args.log_scale))
            written.append(stem.with_suffix(".svg"))
        for w in written:
            print(w)
    else:
        sys.stdout.write(grid.to_json(indent=1) + "\n" if args.format == "json" else grid.to_csv())
    if interrupted:
        print("interrupted: partial results written", file=sys.stderr)
        return EXIT_INTERRUPT
    frac = grid.masked_fraction(exclude=(INVALID,))
    if frac > args.max_masked:
        print(f"masked-cell rate {frac:.3g} exceeds {args.max_masked:g}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


# -- subcommands ----------------------------------------------------------------


def cmd_stats(args) -> int:
    p = parse_dist(args.dist)
    gibbs = parse_dist(args.gibbs) if args.gibbs else None
    pv = ProbVec(p, gibbs)
    report = {"H": shannon_entropy(pv), "V": entropy_variance(pv)}
    if gibbs is not None:
        report["D"] = relative_entropy(pv)
        report["V_rel"] = relative_entropy_variance(pv)
    if args.other:
        qv = ProbVec(parse_dist(args.other), gibbs)
        theory = ResourceTheory.coerce(args.theory or ("thermodynamic" if gibbs else "entanglement"))
        report["theory"] = theory.value
        report["nu"] = irreversibility_parameter(pv, qv, theory)
        report["R_inf"] = asymptotic_rate(pv, qv, theory)
    if args.format == "json":
        print(json.dumps(report))
    else:
        width = max(len(k) for k in report)
        for k, v in report.items():
            print(f"{k:<{width}}  {v if isinstance(v, str) else format(v, '.6g')}")
    return EXIT_OK


def cmd_convert(args) -> int:
    cfg, base = load_config(args.config, "convert")
    theory = _theory(cfg, "thermodynamic")
    gibbs = parse_dist(cfg["gibbs"], base) if "gibbs" in cfg else None
    p = _with_gibbs(parse_dist(cfg["initial"], base), gibbs)
    q = _with_gibbs(parse_dist(cfg["target"], base), gibbs)
    cap = cfg.get("atom_cap", DEFAULT_ATOM_CAP)
    res = optimal_final_state(
        iid_power(p, cfg.get("n_initial", 1), cap), iid_power(q, cfg.get("n_target", 1), cap), theory
    )
    report = {
        "theory": theory.value,
        "fidelity": res.fidelity,
        "infidelity": res.infidelity,
        "feasible_exact": res.feasible_exact,
        "support_mass": res.support_mass,
        "atoms": len(res.final),
    }
    if args.out:
        rows = ["log_p,log_g,log_mult"]
        rows += [",".join(repr(float(v)) for v in atom) for atom in res.final]
        Path(args.out).write_text("\n".join(rows) + "\n")
    if args.format == "json":
        print(json.dumps(report))
    else:
        for k, v in report.items():
            print(f"{k:<15} {v}")
    return EXIT_OK


def cmd_heat_engine(args) -> int:
    cfg, _ = load_config(args.config, "heat-engine")
    mode_cfg = cfg.get("mode", {"kind": "fixed-work"})
    if mode_cfg["kind"] == "fixed-work":
        mode = FixedWork(mode_cfg.get("fraction", 0.95))
    else:
        mode = FixedError(mode_cfg.get("threshold", 1e-3), mode_cfg.get("step", 0.005), mode_cfg.get("tol", 1e-4))
    spec = HeatEngineSpec(
        n=cfg.get("n", 200),
        T_h=cfg.get("T_h", 10.0),
        gap=cfg.get("gap", 1.0),
        T_c_axis=_axis(cfg.get("T_c_axis"), default_axis()),
        T_cp_axis=_axis(cfg.get("T_cp_axis"), default_axis()),
        mode=mode,
        axis=cfg.get("axis", "temperature"),
        battery_marginal=cfg.get("battery_marginal", False),
        cap=cfg.get("atom_cap", DEFAULT_ATOM_CAP),
    )
    return _emit_grid(heat_engine_sweep(spec, jobs=args.jobs), args, "heatmap")


def cmd_lambda_sweep(args) -> int:
    cfg, base = load_config(args.config, "lambda-sweep")
    gibbs = parse_dist(cfg["gibbs"], base) if "gibbs" in cfg else None
    p1, p2, q = (_with_gibbs(parse_dist(cfg[k], base), gibbs) for k in ("p1", "p2", "q"))
    grid = lambda_sweep(
        p1,
        p2,
        q,
        cfg["n_list"],
        _axis(cfg["lambda_grid"]),
        _theory(cfg, "entanglement"),
        jobs=args.jobs,
        cap=cfg.get("atom_cap", DEFAULT_ATOM_CAP),
    )
    return _emit_grid(grid, args, "lines")


def cmd_rate_sweep(args) -> int:
    cfg, base = load_config(args.config, "rate-sweep")
    gibbs = parse_dist(cfg["gibbs"], base) if "gibbs" in cfg else None
    initials = [_with_gibbs(parse_dist(d, base), gibbs) for d in cfg["initials"]]
    grid = rate_sweep(
        initials,
        _with_gibbs(parse_dist(cfg["q"], base), gibbs),
        cfg["n_list"],
        cfg["epsilon"],
        _theory(cfg, "entanglement"),
        labels=cfg.get("labels"),
        jobs=args.jobs,
        cap=cfg.get("atom_cap", DEFAULT_ATOM_CAP),
    )
    return _emit_grid(grid, args, "lines")


# -- parser ----------------------------------------------------------------------


def _fraction(text):
    v = float(text)
    if not 0.0 <= v <= 1.0 or math.isnan(v):
        raise argparse.ArgumentTypeError("expected a number in [0, 1]")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resonant",
        description="Optimal finite-size resource conversion and resonance sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    st = sub.add_parser("stats", help="entropic statistics of a distribution")
    st.add_argument("dist", help="inline 'a,b,c' or a path to a numbers file")
    st.add_argument("--gibbs", help="Gibbs weights (inline or path); enables D and V(.||gamma)")
    st.add_argument("--other", help="second distribution; reports nu and R_inf against it")
    st.add_argument("--theory", choices=[t.value for t in ResourceTheory], help="theory for nu and R_inf")
    st.add_argument("--format", choices=("text", "json"), default="text", help="report format (default: text)")
    st.set_defaults(func=cmd_stats)

    cv = sub.add_parser("convert", help="optimal approximate conversion from a JSON config")
    cv.add_argument("--config", required=True, help="JSON run configuration")
    cv.add_argument("--out", help="write the final state's atoms to this CSV file")
    cv.add_argument("--format", choices=("text", "json"), default="text", help="report format (default: text)")
    cv.set_defaults(func=cmd_convert)

    helps = {
        "heat-engine": "heat-engine work/infidelity sweep",
        "lambda-sweep": "infidelity versus mixing factor and n",
        "rate-sweep": "optimal rate at fixed error versus n",
    }
    funcs = {"heat-engine": cmd_heat_engine, "lambda-sweep": cmd_lambda_sweep, "rate-sweep": cmd_rate_sweep}
    for name in SWEEPS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", help="output stem; writes <stem>.csv and <stem>.json")
        sp.add_argument(
            "--format", choices=("csv", "json"), default="csv", help="stdout format when --out is absent"
        )
        sp.add_argument("--svg", action="store_true", help="also write <stem>.svg (needs --out)")
        sp.add_argument("--log-scale", action="store_true", help="logarithmic colour or y scale in the SVG")
        sp.add_argument(
            "--jobs", type=_positive_int, default=default_jobs(), help="worker processes (default: all cores)"
        )
        sp.add_argument(
            "--max-masked",
            type=_fraction,
            default=1.0,
            help="exit 3 if the share of cells masked by errors exceeds this (default: 1)",
        )
        sp.set_defaults(func=funcs[name])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    if getattr(args, "svg", False) and not args.out:
        print("error: --svg needs --out", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (InputError, ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except KeyboardInterrupt:
        return EXIT_INTERRUPT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
