"""Command-line interface: simulation, fitting, criteria, and experiment drivers."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .abc import build_table
from .config import (
    ConfigError,
    ExperimentConfig,
    get_float,
    get_int,
    get_str,
    get_system,
    load_config,
    parse_criterion,
)
from .criteria import CandidateModel
from .experiments import (
    CRITERIA_HEADER,
    ExperimentError,
    evaluate_criterion,
    run_experiment1,
    run_experiment2,
    run_experiment3,
    _exp3_priors,
)
from .fit import icm_fit, kmeans_init, simulated_field_em
from .grid import LatticeSpec
from .io import read_observations, write_field, write_observations
from .noise import EmissionParams
from .potts import PottsSpec
from .samplers import DEFAULT_BURNIN, simulate_hidden


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.handler(args)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockpotts",
        description="Hidden Potts model selection via block likelihood criteria.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("simulate", _cmd_simulate, "simulate a hidden Potts field and observations"),
        ("fit", _cmd_fit, "fit parameters and a segmentation to observations"),
        ("criterion", _cmd_criterion, "evaluate one criterion on observations"),
        ("exp1", _cmd_exp1, "color-count recovery experiment"),
        ("exp2", _cmd_exp2, "adjacency-system choice experiment"),
        ("exp3", _cmd_exp3, "ABC versus criteria error-rate experiment"),
        ("abc-table", _cmd_abc_table, "simulate an ABC reference table"),
    ]
    for name, handler, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--threads", type=int, help="worker processes")
        p.set_defaults(handler=handler)
    return parser


def _mapping(args) -> dict[str, str]:
    mapping = load_config(args.config) if args.config else {}
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be a nonnegative integer")
        mapping["seed"] = str(args.seed)
    if args.out is not None:
        mapping["out"] = args.out
    if args.threads is not None:
        mapping["threads"] = str(args.threads)
    return mapping


def _out_dir(mapping) -> Path:
    out = Path(get_str(mapping, "out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _experiment_config(args, kind: str) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for experiment runs")
    return ExperimentConfig.from_mapping(_mapping(args), kind)


def _cmd_simulate(args) -> None:
    m = _mapping(args)
    lattice = LatticeSpec(get_int(m, "height"), get_int(m, "width"))
    system = get_system(m, "system")
    K = get_int(m, "K")
    spec = PottsSpec(lattice, system, K, get_float(m, "interaction"))
    emission = EmissionParams.default(K, get_float(m, "sigma"))
    burnin = get_int(m, "burnin", str(DEFAULT_BURNIN))
    rng = np.random.default_rng(get_int(m, "seed", "0"))
    out = _out_dir(m)
    x, y = simulate_hidden(spec, emission, burnin, rng)
    write_field(out / "field.txt", x, K)
    write_observations(out / "observations.txt", y)
    print(f"wrote {out / 'field.txt'} and {out / 'observations.txt'}")


def _run_fits(m, y, system, K, cspec=None):
    """Run whichever fits the requested criterion (or method key) needs."""
    lattice = LatticeSpec(*y.shape)
    init = kmeans_init(y, K)
    rng = np.random.default_rng(get_int(m, "seed", "0"))
    icm_res = em_res = None
    needed = (
        {cspec.border_source, cspec.theta_source}
        if cspec is not None
        else {get_str(m, "method")}
    )
    if not needed <= {"none", "icm", "em"}:
        raise ConfigError(f"method must be icm or em, got {needed}")
    if "icm" in needed:
        icm_res = icm_fit(
            y, lattice, system, K,
            init=init, iterations=get_int(m, "icm_iterations", "200"),
        )
    if "em" in needed:
        em_res = simulated_field_em(
            y, lattice, system, K, rng,
            init=init, iterations=get_int(m, "em_iterations", "200"),
        )
    return icm_res, em_res


def _cmd_fit(args) -> None:
    m = _mapping(args)
    y = read_observations(get_str(m, "observations"))
    system = get_system(m, "system")
    K = get_int(m, "K")
    icm_res, em_res = _run_fits(m, y, system, K)
    result = icm_res if icm_res is not None else em_res
    out = _out_dir(m)
    write_field(out / "segmentation.txt", result.segmentation, K)
    theta = result.theta
    with open(out / "theta.txt", "w") as fh:
        fh.write(f"method = {result.method}\n")
        fh.write(f"iterations = {result.iterations}\n")
        fh.write("means = " + ",".join(repr(float(v)) for v in theta.emission.means) + "\n")
        fh.write("sds = " + ",".join(repr(float(v)) for v in theta.emission.sds) + "\n")
        fh.write(f"interaction = {float(theta.interaction)!r}\n")
    print(f"wrote {out / 'segmentation.txt'} and {out / 'theta.txt'}")


def _cmd_criterion(args) -> None:
    m = _mapping(args)
    y = read_observations(get_str(m, "observations"))
    cspec = parse_criterion(get_str(m, "criterion"))
    system = get_system(m, "system")
    K = get_int(m, "K")
    model = CandidateModel(system, K)
    icm_res, em_res = _run_fits(m, y, system, K, cspec)
    value = evaluate_criterion(cspec, y, model, icm_res, em_res)
    row = [
        0, value.name, system.value, K,
        repr(value.value), value.d_m, repr(value.block_loglik),
    ]
    print(",".join(CRITERIA_HEADER))
    print(",".join(str(v) for v in row))
    if args.out is not None:
        out = _out_dir(m)
        with open(out / "criteria.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CRITERIA_HEADER)
            writer.writerow(row)


def _cmd_exp1(args) -> None:
    config = _experiment_config(args, "exp1")
    run_experiment1(config)
    print(f"wrote selection.csv, criteria.csv, delta.csv under {config.out}")


def _cmd_exp2(args) -> None:
    config = _experiment_config(args, "exp2")
    run_experiment2(config)
    print(f"wrote selection.csv, criteria.csv, delta.csv under {config.out}")


def _cmd_exp3(args) -> None:
    config = _experiment_config(args, "exp3")
    rates = run_experiment3(config)
    for name, rate in rates.items():
        print(f"{name}: error rate {rate:.4f}")
    print(f"wrote reference_table.csv and abc_report.csv under {config.out}")


def _cmd_abc_table(args) -> None:
    m = _mapping(args)
    config = ExperimentConfig.from_mapping(m, "exp3")
    lattice = LatticeSpec(config.height, config.width)
    phi = EmissionParams(np.array([0.0, 1.0]), np.array([config.sigma, config.sigma]))
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(2)[0])
    table = build_table(
        config.table_size, _exp3_priors(config), lattice, phi, config.burnin, rng
    )
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    table.write_csv(out / "reference_table.csv")
    print(f"wrote {out / 'reference_table.csv'} ({table.size} rows)")


if __name__ == "__main__":
    sys.exit(main())
