"""Command-line experiment harness.

Every command resolves one configuration (defaults, then ``--config``, then
flags), runs, and writes a single data file whose content embeds that resolved
configuration and the package version.  Logs go to standard error.

Exit codes: 0 success, 2 configuration error, 3 capacity guard, 4 numerical or
constraint failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
from pathlib import Path

import numpy as np
import tomli

from . import __version__
from .errors import (
    ArgumentError,
    CapacityError,
    ConstraintError,
    DegeneratePosteriorError,
    DimensionError,
    DistributionError,
    NumericalError,
    SearchFailure,
)
from .probcore import DEFAULT_GUARD, JointDistribution, mutual_information
from .regions import (
    AuxiliaryCoupling,
    CascadeCoupling,
    Corner,
    OptimizerConfig,
    RelayCoupling,
    general_cascade_rates,
    general_task_coupling,
    minimize_rates,
    rate_triple,
    scatter_relay_coupling,
    scatter_relay_region,
    scatter_summary,
    scatter_target,
    task_coupling,
    task_region,
    task_target,
    variation_rates,
)
from .regions.frontier import RegionFrontier, fmt
from .synth import (
    CascadeSystem,
    ExperimentReport,
    NestedCascadeSystem,
    eavesdropper_independence_test,
    general_cascade_exact,
    induced_distribution_exact,
    markov_checks,
    relay_scheme_experiment,
    sample_cascade,
    sample_codebook,
    sample_nested_codebook,
    secrecy_tv,
    softcover_experiment,
    superposition_softcover_experiment,
    synthesis_tv,
    x_marginal_deviation,
)
from .synth.codebook import nested_sizes, superposition_sizes
from .synth.eavesdrop import MONTE_CARLO_NOTE

log = logging.getLogger("cascade_synthesis")

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_NUMERICAL = 0, 2, 3, 4


class ConfigError(ArgumentError):
    """Invalid or incomplete run configuration."""


# -- configuration -------------------------------------------------------------


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    try:
        text = p.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        if p.suffix.lower() == ".json":
            cfg = json.loads(text)
        else:
            cfg = tomli.loads(text.decode())
    except (ValueError, tomli.TOMLDecodeError) as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a table")
    return cfg


_NAMED = re.compile(r"^\s*([A-Za-z][\w-]*)\s*\(([^)]*)\)\s*$")


def parse_named(spec: str) -> tuple[str, list[int]]:
    """'task(3)' -> ('task', [3]); arguments are integers."""
    m = _NAMED.match(spec)
    if not m:
        return spec.strip(), []
    try:
        args = [int(a) for a in re.split(r"[,;\s]+", m.group(2).strip()) if a]
    except ValueError as e:
        raise ConfigError(f"non-integer argument in {spec!r}") from e
    return m.group(1), args


def inline_pmf(table: dict, what: str) -> JointDistribution:
    """Row-major decimal list with declared shape and variable names."""
    try:
        names, shape, pmf = table["names"], table["shape"], table["pmf"]
    except KeyError as e:
        raise ConfigError(f"{what}: inline pmf needs names, shape and pmf (missing {e})") from e
    arr = np.asarray(pmf, dtype=float)
    if arr.size != math.prod(shape) or len(shape) != len(names):
        raise ConfigError(f"{what}: {arr.size} values for shape {shape} over {names}")
    return JointDistribution(tuple(names), arr.reshape(shape), atol=float(table.get("atol", 1e-9)))


def resolve_target(spec) -> JointDistribution:
    if isinstance(spec, str):
        spec = {"named": spec}
    if not isinstance(spec, dict):
        raise ConfigError("target must be a table or a named example")
    if "named" in spec:
        name, args = parse_named(spec["named"])
        if name == "task" and len(args) == 1:
            return task_target(args[0])
        if name == "scatter" and len(args) == 1:
            return scatter_target(args[0])
        if name == "independent-copy" and not args:
            return _independent_copy()
        raise ConfigError(f"unknown named target {spec['named']!r}")
    return inline_pmf(spec, "target")


def _independent_copy() -> JointDistribution:
    """X uniform and independent of Y = Z uniform."""
    arr = np.zeros((2, 2, 2))
    for x in range(2):
        for y in range(2):
            arr[x, y, y] = 0.25
    return JointDistribution(("X", "Y", "Z"), arr)


def optimizer_config(cfg: dict) -> OptimizerConfig:
    opts = dict(cfg.get("optimizer", {}))
    try:
        return OptimizerConfig(seed=int(cfg.get("seed", 0)), **opts)
    except TypeError as e:
        raise ConfigError(f"bad optimizer option: {e}") from e


def resolve_coupling(cfg: dict, target: JointDistribution | None) -> AuxiliaryCoupling:
    spec = cfg.get("coupling", "optimize")
    if isinstance(spec, str):
        spec = {"named": spec}
    if "named" in spec:
        name, args = parse_named(spec["named"])
        if name == "task" and len(args) == 3:
            return task_coupling(*args)
        if target is None:
            raise ConfigError(f"coupling {name!r} needs a target")
        if name == "outputs":
            return AuxiliaryCoupling.outputs_as_auxiliaries(target)
        if name == "optimize":
            weights = tuple(float(w) for w in cfg.get("weights", (1.0, 0.0, 0.0)))
            aux, _ = minimize_rates(
                target, weights, restrict_to_Dprime=bool(cfg.get("restrict_to_Dprime", False)), cfg=optimizer_config(cfg)
            )
            return aux
        raise ConfigError(f"unknown named coupling {spec['named']!r}")
    joint = inline_pmf(spec, "coupling")
    if target is None:
        target = joint.marginal(("X", "Y", "Z"))
    return AuxiliaryCoupling(joint, target)


def _floats(value, what: str) -> list[float]:
    if isinstance(value, str):
        value = [v for v in re.split(r"[,\s]+", value.strip()) if v]
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{what} must be a list of numbers") from e


def _ints(value, what: str) -> list[int]:
    out = _floats(value, what)
    if any(v != int(v) or v < 1 for v in out):
        raise ConfigError(f"{what} must be positive integers")
    return [int(v) for v in out]


def resolve_rates(cfg: dict, floor: list[float]) -> list[float]:
    """Explicit ``rates`` win; otherwise the floor plus ``margin`` in every coordinate."""
    if cfg.get("rates") is not None:
        rates = _floats(cfg["rates"], "rates")
        if len(rates) != len(floor):
            raise ConfigError(f"expected {len(floor)} rates, got {len(rates)}")
        return rates
    margin = float(cfg.get("margin", 0.5))
    return [float(f) + margin for f in floor]


# -- output --------------------------------------------------------------------


def _echo(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def frontier_csv(f: RegionFrontier, cfg: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["generator"] + f.columns + ["version", "config"])
    for c in f.corners:
        w.writerow([c.generator] + [fmt(v) for v in c.vector] + [__version__, _echo(cfg)])
    return buf.getvalue()


def facets_csv(f: RegionFrontier, cfg: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow([f"n_{c}" for c in f.columns] + ["offset", "version", "config"])
    for normal, off in f.facets:
        w.writerow([fmt(v) for v in normal] + [fmt(off), __version__, _echo(cfg)])
    return buf.getvalue()


def _document(kind: str, cfg: dict, body: dict) -> str:
    doc = {"kind": kind, "version": __version__, "config": cfg, **body}
    return json.dumps(doc, indent=2) + "\n"


def write_output(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    log.info("wrote %s", path)


def _out_path(args, default_stem: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(f"{default_stem}.{args.format}")


def _report_text(rep: ExperimentReport, fmt_: str) -> str:
    return rep.to_csv() if fmt_ == "csv" else rep.to_json()


# -- commands ------------------------------------------------------------------


def _base(args, cfg: dict, command: str) -> dict:
    """Resolved config: file values overridden by explicit flags."""
    out = dict(cfg)
    out["command"] = command
    out["seed"] = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    out["guard"] = int(args.guard if args.guard is not None else cfg.get("guard", DEFAULT_GUARD))
    for key, val in vars(args).items():
        if key in {"seed", "guard", "out", "format", "config", "func", "verbose", "command", "kind"}:
            continue
        if val is not None:
            out[key] = val
    return out


def cmd_region(args) -> int:
    cfg = _base(args, load_config(args.config), f"region {args.kind}")
    body: dict = {}
    if args.kind == "task":
        m = int(cfg.get("m", 3))
        cfg["m"] = m
        f = task_region(m)
    elif args.kind == "scatter-relay":
        m = int(cfg.get("m", 2))
        cfg["m"] = m
        f = scatter_relay_region(m)
        body["summary"] = scatter_summary(m)
        log.info("scatter summary %s", body["summary"])
    else:
        if "target" not in cfg:
            raise ConfigError("region optimize needs a [target] table")
        target = resolve_target(cfg["target"])
        weights = tuple(_floats(cfg.get("weights", [1.0, 0.0, 0.0]), "weights"))
        if len(weights) != 3:
            raise ConfigError("weights must have three entries (R0, R1, R2)")
        cfg["weights"] = list(weights)
        opt = optimizer_config(cfg)
        aux, point = minimize_rates(target, weights, restrict_to_Dprime=bool(cfg.get("restrict_to_Dprime", False)), cfg=opt)
        f = RegionFrontier([Corner(point, "optimum")], kind="optimize", params={"weights": list(weights)})
        body["objective"] = float(np.dot(weights, point.as_vector()))
        body["cards"] = list(aux.cards)
    out = _out_path(args, f"region-{args.kind}")
    if args.format == "csv":
        write_output(out, frontier_csv(f, cfg))
        write_output(out.with_name(out.stem + ".facets.csv"), facets_csv(f, cfg))
    else:
        write_output(out, _document(f"region-{args.kind}", cfg, {**f.to_dict(), **body}))
    log.info("%d corners, %d hull vertices", len(f.corners), len(f.vertices))
    return EXIT_OK


def _largest_feasible_n(size_of_n, n_list, guard) -> int:
    ok = [n for n in range(1, max(n_list) + 1) if size_of_n(n) <= guard]
    return max(ok) if ok else 0


def _capacity_hint(err: CapacityError, size_of_n, n_list, guard) -> CapacityError:
    best = _largest_feasible_n(size_of_n, n_list, guard)
    hint = f"reduce n to at most {best}" if best else "reduce the alphabets or rates (no n fits)"
    return CapacityError(f"{err}; {hint}", err.required, err.guard)


def _experiment_grid(cfg: dict, n_default, trials_default) -> tuple[list[int], int]:
    n_list = _ints(cfg.get("n_list", n_default), "n_list")
    trials = int(cfg.get("trials", trials_default))
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    cfg["n_list"], cfg["trials"] = n_list, trials
    return n_list, trials


def cmd_simulate(args) -> int:
    cfg = _base(args, load_config(args.config), f"simulate {args.kind}")
    n_list, trials = _experiment_grid(cfg, [1, 2], 5)
    seed, guard = cfg["seed"], cfg["guard"]
    if args.kind == "cascade":
        target = resolve_target(cfg["target"]) if "target" in cfg else None
        aux = resolve_coupling(cfg, target)
        floor = rate_triple(aux)
        rates = resolve_rates(cfg, [float(v) for v in floor.as_vector()])
        cfg["rates"] = rates
        nx, ny, nz = aux.target.sizes

        def size(n):
            n_k, n_a, n_b = superposition_sizes(n, rates)
            return n_k * n_a * n_b * (nx * ny * nz) ** n

        rep = ExperimentReport("simulate-cascade", cfg)
        for n in n_list:
            for s in range(seed, seed + trials):
                try:
                    sys_ = CascadeSystem(aux, sample_codebook(aux, n, rates, s, guard))
                    ind = induced_distribution_exact(sys_, guard)
                except CapacityError as e:
                    raise _capacity_hint(e, size, n_list, guard) from e
                mk = markov_checks(ind)
                rep.add(
                    s,
                    n,
                    tv=secrecy_tv(ind, aux.target),
                    synthesis_tv=synthesis_tv(ind, aux.target),
                    x_marginal_dev=x_marginal_deviation(ind, aux.joint.marginal_array("X")),
                    markov_1=mk["I(X;M2,Y|M1,K)"],
                    markov_2=mk["I(X,Y,M1;Z|M2,K)"],
                    degenerate=ind.degenerate,
                )
                log.info("n=%d seed=%d tv=%.6g", n, s, rep.records[-1]["tv"])
        floor_v = [float(v) for v in floor.as_vector()]
    else:
        coupling = _long_coupling(cfg)
        floor = general_cascade_rates(coupling)
        floor_v = [float(v) for v in floor.as_vector()]
        rates = resolve_rates(cfg, floor_v)
        cfg["rates"] = rates
        target = coupling.joint.marginal(("X",) + coupling.ys())
        alph = math.prod(target.sizes)

        def size(n):
            return math.prod(nested_sizes(n, rates)) * alph**n

        rep = ExperimentReport("simulate-long-cascade", cfg)
        for n in n_list:
            for s in range(seed, seed + trials):
                try:
                    sys_ = NestedCascadeSystem(coupling, sample_nested_codebook(coupling, n, rates, s, guard))
                    ind = general_cascade_exact(sys_, guard)
                except CapacityError as e:
                    raise _capacity_hint(e, size, n_list, guard) from e
                rep.add(
                    s,
                    n,
                    tv=secrecy_tv(ind, target),
                    synthesis_tv=synthesis_tv(ind, target),
                    x_marginal_dev=x_marginal_deviation(ind, coupling.joint.marginal_array("X")),
                    degenerate=ind.degenerate,
                )
    rep.metadata = {"rate_floor": floor_v, "rates": rates, "margin": [r - f for r, f in zip(rates, floor_v)]}
    log.info("rates %s vs floor %s", rates, floor_v)
    write_output(_out_path(args, f"simulate-{args.kind}"), _report_text(rep, args.format))
    return EXIT_OK


def _long_coupling(cfg: dict) -> CascadeCoupling:
    spec = cfg.get("coupling", "general-task(4;1,2,3)")
    if isinstance(spec, str):
        spec = {"named": spec}
    if "named" in spec:
        name, args = parse_named(spec["named"])
        if name == "general-task" and len(args) >= 3:
            return general_task_coupling(args[0], tuple(args[1:]))
        raise ConfigError(f"unknown long-cascade coupling {spec['named']!r}")
    joint = inline_pmf(spec, "coupling")
    k = sum(1 for n in joint.names if re.fullmatch(r"U\d+", n))
    return CascadeCoupling(joint, k + 1)


def _softcover_channel(cfg: dict) -> JointDistribution:
    if "channel" in cfg:
        return inline_pmf(cfg["channel"], "channel")
    return JointDistribution(("U", "X"), np.eye(2) / 2)


def cmd_softcover(args) -> int:
    cfg = _base(args, load_config(args.config), f"softcover {args.kind}")
    n_list, trials = _experiment_grid(cfg, [2, 4, 6, 8], 30)
    if args.kind == "single":
        q = _softcover_channel(cfg)
        rate = float(cfg.get("rate", 2.0))
        cfg["rate"] = rate
        rep = softcover_experiment(q, rate, n_list, trials, cfg["seed"], cfg["guard"])
        rep.metadata = {"I(X;U)": mutual_information(q, "X", "U")}
    else:
        if "coupling" in cfg:
            joint = inline_pmf(cfg["coupling"], "coupling")
        else:
            joint = JointDistribution(("X", "U", "V"), np.eye(2)[:, :, None] / 2)
        rates = _floats(cfg.get("rates", [1.5, 0.5]), "rates")
        if len(rates) != 2:
            raise ConfigError("superposition needs rates (R_a, R_b)")
        cfg["rates"] = rates
        rep = superposition_softcover_experiment(joint, rates, n_list, trials, cfg["seed"], cfg["guard"])
        rep.metadata = {
            "I(X;V)": mutual_information(joint, "X", "V"),
            "I(X;U,V)": mutual_information(joint, "X", ("U", "V")),
        }
    rep.config = cfg
    write_output(_out_path(args, f"softcover-{args.kind}"), _report_text(rep, args.format))
    return EXIT_OK


def _relay_coupling(cfg: dict) -> RelayCoupling:
    spec = cfg.get("coupling", "scatter-relay(2,1)")
    if isinstance(spec, str):
        spec = {"named": spec}
    if "named" in spec:
        name, args = parse_named(spec["named"])
        if name == "scatter-relay" and len(args) == 2:
            return scatter_relay_coupling(*args)
        raise ConfigError(f"unknown relay coupling {spec['named']!r}")
    joint = inline_pmf(spec, "coupling")
    return RelayCoupling(joint, joint.marginal(("X", "Z")))


def cmd_relay(args) -> int:
    cfg = _base(args, load_config(args.config), "relay")
    n_list, trials = _experiment_grid(cfg, [2, 3, 4, 5, 6], 20)
    coupling = _relay_coupling(cfg)
    floor = [float(v) for v in variation_rates(coupling, "thm4_relay").r]
    if "rates" not in cfg and "margin" not in cfg:
        cfg["margin"] = 0.25
    rates = resolve_rates(cfg, floor)
    cfg["rates"] = rates
    common = cfg.get("common_rates")
    rep = relay_scheme_experiment(None, coupling, rates, n_list, trials, cfg["seed"], common, cfg["guard"])
    cfg["common_rates"] = rep.config["common_rates"]
    rep.config = cfg
    rep.metadata = {"rate_floor": floor, "rates": rates}
    write_output(_out_path(args, "relay"), _report_text(rep, args.format))
    return EXIT_OK


def cmd_eavesdrop(args) -> int:
    cfg = _base(args, load_config(args.config), "eavesdrop-test")
    target = resolve_target(cfg["target"]) if "target" in cfg else None
    aux = resolve_coupling(cfg, target)
    rates = resolve_rates(cfg, [float(v) for v in rate_triple(aux).as_vector()])
    n = int(cfg.get("n", 2))
    samples = int(cfg.get("samples", 20000))
    significance = float(cfg.get("significance", 0.05))
    cfg.update(rates=rates, n=n, samples=samples, significance=significance)
    sys_ = CascadeSystem(aux, sample_codebook(aux, n, rates, cfg["seed"], cfg["guard"]))
    res = eavesdropper_independence_test(sample_cascade(sys_, samples, cfg["seed"]), significance=significance)
    row = res.to_dict()
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        keys = list(row)
        w.writerow(keys + ["note", "version", "config"])
        w.writerow([fmt(v) if isinstance(v, float) else str(v).lower() if isinstance(v, bool) else v for v in row.values()]
                   + [MONTE_CARLO_NOTE, __version__, _echo(cfg)])
        text = buf.getvalue()
    else:
        text = _document("eavesdrop-test", cfg, {"result": row, "note": MONTE_CARLO_NOTE})
    log.info("G=%.4g dof=%d p=%.4g reject=%s", res.statistic, res.dof, res.p_value, res.reject)
    write_output(_out_path(args, "eavesdrop-test"), text)
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    p.add_argument("--out", default=None, help="output file")
    p.add_argument("--guard", type=int, default=None, help="state-space guard")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", default=None, help="TOML or JSON run configuration")
    p.add_argument("-v", "--verbose", action="store_true")


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-list", dest="n_list", default=None, help="comma-separated block lengths")
    p.add_argument("--trials", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cascade-synth", description="Cascade channel synthesis experiments")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    reg = sub.add_parser("region", help="rate-region corners and hulls")
    reg.add_argument("kind", choices=("task", "scatter-relay", "optimize"))
    reg.add_argument("--m", type=int, default=None)
    reg.add_argument("--weights", default=None, help="objective weights on (R0, R1, R2)")
    _common(reg)
    reg.set_defaults(func=cmd_region)

    sim = sub.add_parser("simulate", help="exact secrecy TV of the cascade scheme")
    sim.add_argument("kind", choices=("cascade", "long-cascade"))
    sim.add_argument("--target", default=None, help="named target, e.g. task(3)")
    sim.add_argument("--coupling", default=None, help="named coupling, e.g. task(3,2,1)")
    sim.add_argument("--rates", default=None, help="comma-separated (R0, R1, ...)")
    sim.add_argument("--margin", type=float, default=None, help="added to the coupling's rate floor")
    _experiment_flags(sim)
    _common(sim)
    sim.set_defaults(func=cmd_simulate)

    sc = sub.add_parser("softcover", help="soft-covering experiments")
    sc.add_argument("kind", choices=("single", "superposition"))
    sc.add_argument("--rate", type=float, default=None)
    sc.add_argument("--rates", default=None, help="R_a,R_b for superposition")
    _experiment_flags(sc)
    _common(sc)
    sc.set_defaults(func=cmd_softcover)

    rl = sub.add_parser("relay", help="two-stage relay scheme")
    rl.add_argument("--coupling", default=None, help="e.g. scatter-relay(2,1)")
    rl.add_argument("--rates", default=None)
    rl.add_argument("--margin", type=float, default=None)
    _experiment_flags(rl)
    _common(rl)
    rl.set_defaults(func=cmd_relay)

    ev = sub.add_parser("eavesdrop-test", help="G-test of message/sequence independence")
    ev.add_argument("--target", default=None)
    ev.add_argument("--coupling", default=None)
    ev.add_argument("--rates", default=None)
    ev.add_argument("--margin", type=float, default=None)
    ev.add_argument("--n", type=int, default=None)
    ev.add_argument("--samples", type=int, default=None)
    ev.add_argument("--significance", type=float, default=None)
    _common(ev)
    ev.set_defaults(func=cmd_eavesdrop)
    return ap


def _normalize_flags(args) -> None:
    """Turn list-valued flag strings into lists so that the echo is a clean config."""
    for key, conv in (("n_list", _ints), ("rates", _floats), ("weights", _floats)):
        val = getattr(args, key, None)
        if isinstance(val, str):
            setattr(args, key, conv(val, key))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        _normalize_flags(args)
        return args.func(args)
    except CapacityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except (NumericalError, ConstraintError, SearchFailure, DegeneratePosteriorError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ArgumentError, DimensionError, DistributionError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
