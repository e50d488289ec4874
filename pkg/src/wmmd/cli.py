"""Command-line interface.

Subcommands: ``gen-data``, ``estimate``, ``verify-bounds``,
``fit-weights``, ``train``.  Every command accepts ``--config FILE``
with flat ``key=value`` lines (keys are the long option names); values
given on the command line override the file.  All randomness flows from
``--seed``.  Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bounds, dataio, flow, scenarios, weightmodel
from .errors import ContractError, InputError, NumericalError, ResourceError
from .estimators import ESTIMATOR_KINDS, EstimatorConfig, estimate
from .kernels import KernelSpec, linear_bounded, median_heuristic, rbf, rbf_mixture
from .samples import SampleSet
from .seeding import derive_seed


def _parse_kernel(text: str) -> KernelSpec | None:
    """Kernel flag syntax; None means "median heuristic on the data".

    rbf | rbf:GAMMA | rbf-mixture:G1,G2,...:W1,W2,... | linear-bounded:HALFWIDTH:DIM
    """
    parts = text.split(":")
    family = parts[0]
    if family == "rbf":
        if len(parts) == 1:
            return None
        if len(parts) == 2:
            return rbf(float(parts[1]))
    elif family == "rbf-mixture" and len(parts) == 3:
        gammas = [float(v) for v in parts[1].split(",")]
        weights = [float(v) for v in parts[2].split(",")]
        return rbf_mixture(gammas, weights)
    elif family == "linear-bounded" and len(parts) == 3:
        return linear_bounded(float(parts[1]), int(parts[2]))
    raise InputError(f"cannot parse kernel spec {text!r}")


def _resolve_kernel(text: str | None, points) -> tuple[KernelSpec, str]:
    """Kernel from the flag, falling back to the median heuristic."""
    spec = _parse_kernel(text) if text is not None else None
    if spec is not None:
        return spec, "fixed"
    return rbf(median_heuristic(points)), "median-heuristic"


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def _apply_config(args: argparse.Namespace, defaults: dict, types: dict) -> argparse.Namespace:
    """Fill unset options from --config, then from hard defaults."""
    if getattr(args, "config", None):
        for key, raw in dataio.read_config(args.config).items():
            dest = key.replace("-", "_")
            if dest not in defaults:
                raise InputError(f"unknown config key {key!r}")
            if getattr(args, dest, None) is None:
                setattr(args, dest, types.get(dest, str)(raw))
    for dest, value in defaults.items():
        if getattr(args, dest, None) is None:
            setattr(args, dest, value)
    return args


def _summary(kind: str, value: float) -> None:
    print(f"estimator={kind} value={dataio.format_float(value)}")


# -- gen-data ----------------------------------------------------------------

_GEN_DEFAULTS = {"scenario": None, "n": 256, "n_target": 512, "dim": 2, "seed": 0, "out": None}
_GEN_TYPES = {"n": int, "n_target": int, "dim": int, "seed": int}


def cmd_gen_data(args) -> int:
    _apply_config(args, _GEN_DEFAULTS, _GEN_TYPES)
    if args.scenario is None or args.out is None:
        raise InputError("gen-data requires --scenario and --out")
    spec = scenarios.ScenarioSpec(
        name=args.scenario,
        n_target=args.n_target,
        n_observed=args.n,
        dim=args.dim,
        seed=args.seed,
    )
    data = scenarios.sample_scenario(spec)
    target_path = f"{args.out}.target.csv"
    observed_path = f"{args.out}.observed.csv"
    dataio.write_samples(target_path, data.target)
    dataio.write_samples(observed_path, data.observed)
    print(
        f"scenario={spec.name} seed={spec.seed} n_target={data.target.n} "
        f"n_observed={data.observed.n} dim={data.target.dim}"
    )
    print(f"wrote {target_path}")
    print(f"wrote {observed_path}")
    if data.mapping is not None:
        mapping_path = f"{args.out}.mapping.csv"
        dataio.write_samples(mapping_path, SampleSet(data.mapping))
        print(f"wrote {mapping_path}")
    return 0


# -- estimate ----------------------------------------------------------------

_EST_DEFAULTS = {
    "estimator": "u", "kernel": None, "groups": 5, "seed": 0,
    "in_x": None, "in_y": None, "out": None,
}
_EST_TYPES = {"groups": int, "seed": int}


def cmd_estimate(args) -> int:
    _apply_config(args, _EST_DEFAULTS, _EST_TYPES)
    if args.in_x is None or args.in_y is None:
        raise InputError("estimate requires --in-x and --in-y")
    X = dataio.read_samples(args.in_x)
    Y = dataio.read_samples(args.in_y)
    spec, source = _resolve_kernel(args.kernel, X.points)
    if source == "median-heuristic":
        print(f"bandwidth={dataio.format_float(spec.bandwidths[0])} bandwidth_source=median-heuristic")
    config = EstimatorConfig(kind=args.estimator, groups=args.groups, seed=args.seed)
    report = estimate(spec, config, X, Y)
    if report.kind == "miw":
        print(f"groups={report.groups} dropped={report.dropped}")
    if args.out:
        rows = [
            ("estimator", report.kind),
            ("value", float(report.value)),
            ("n", X.n),
            ("m", Y.n),
            ("seed", args.seed),
        ]
        if report.group_values is not None:
            rows.append(("groups", report.groups))
            rows.append(("dropped", report.dropped))
            rows.extend(
                (f"group_value_{i}", float(v)) for i, v in enumerate(report.group_values)
            )
        dataio.write_table(args.out, ["key", "value"], rows)
    _summary(report.kind, report.value)
    return 0


# -- verify-bounds -----------------------------------------------------------

_VB_DEFAULTS = {
    "scenario": "thinned-gauss", "estimator": "iw", "t_grid": [0.05, 0.1, 0.2, 0.4, 0.8],
    "replicates": 1000, "m": 128, "seed": 0, "sigma2": "analytic",
    "pair_draws": 100_000, "out": None,
}
_VB_TYPES = {
    "t_grid": _float_list, "replicates": int, "m": int, "seed": int,
    "pair_draws": int,
}


def cmd_verify_bounds(args) -> int:
    _apply_config(args, _VB_DEFAULTS, _VB_TYPES)
    if args.out is None:
        raise InputError("verify-bounds requires --out")
    scenario = scenarios.tail_scenario(args.scenario)
    if args.estimator == "iw":
        rows = bounds.iw_tail_rows(scenario, args.t_grid, args.m, args.replicates, args.seed)
    elif args.estimator == "miw":
        if args.sigma2 == "analytic":
            sigma2 = None
        elif args.sigma2 == "mc":
            sigma2, se = bounds.estimate_pair_variance(scenario, args.pair_draws, args.seed)
            print(f"sigma2={dataio.format_float(sigma2)} sigma2_stderr={dataio.format_float(se)}")
        else:
            sigma2 = float(args.sigma2)
        rows = bounds.mom_tail_rows(
            scenario, args.t_grid, args.m, args.replicates, args.seed, sigma2=sigma2
        )
    else:
        raise InputError("verify-bounds supports estimators iw and miw")
    dataio.write_table(
        args.out,
        ["scenario", "estimator", "t", "empirical_p", "stderr", "bound"],
        [
            (r.scenario, r.estimator, r.t, r.empirical_p, r.stderr, r.bound)
            for r in rows
        ],
    )
    worst = max(r.empirical_p - r.bound - 2.0 * r.stderr for r in rows)
    print(f"rows={len(rows)} max_excess={dataio.format_float(worst)}")
    print(f"wrote {args.out}")
    return 0


# -- fit-weights -------------------------------------------------------------

_FW_DEFAULTS = {
    "labeled": None, "ridge": None, "bandwidth": None, "floor": weightmodel.DEFAULT_FLOOR,
    "in_data": None, "out": None,
}
_FW_TYPES = {"ridge": float, "bandwidth": float, "floor": float}


def cmd_fit_weights(args) -> int:
    _apply_config(args, _FW_DEFAULTS, _FW_TYPES)
    if args.labeled is None or args.in_data is None or args.out is None:
        raise InputError("fit-weights requires --labeled, --in and --out")
    labeled_set = dataio.read_samples(args.labeled)
    data = weightmodel.LabeledWeights(
        labeled_set.points, labeled_set.require_weights("the labeled subset")
    )
    model = weightmodel.fit(
        data, ridge=args.ridge, bandwidth=args.bandwidth, floor=args.floor
    )
    target = dataio.read_samples(args.in_data)
    predicted = weightmodel.predict(model, target.points)
    dataio.write_samples(args.out, SampleSet(target.points, weights=predicted))
    print(
        f"labeled={data.count} bandwidth={dataio.format_float(model.kernel.bandwidths[0])} "
        f"ridge={dataio.format_float(model.ridge)}"
    )
    print(f"predicted={predicted.shape[0]} wrote {args.out}")
    return 0


# -- train -------------------------------------------------------------------

_TR_DEFAULTS = {
    "scenario": None, "in_data": None, "in_target": None,
    "estimator": "iw", "generator": "particle", "kernel": None,
    "iters": 500, "lr": None, "seed": 0, "groups": 5,
    "gen_size": None, "batch": None, "eval_every": 10, "eval_size": 512,
    "n": 256, "n_target": 512, "dim": 2,
    "out_trace": None, "out_samples": None,
}
_TR_TYPES = {
    "iters": int, "lr": float, "seed": int, "groups": int, "gen_size": int,
    "batch": int, "eval_every": int, "eval_size": int, "n": int,
    "n_target": int, "dim": int,
}


def cmd_train(args) -> int:
    _apply_config(args, _TR_DEFAULTS, _TR_TYPES)
    init = None
    if args.scenario is not None:
        spec = scenarios.ScenarioSpec(
            name=args.scenario,
            n_target=args.n_target,
            n_observed=args.n,
            dim=args.dim,
            seed=args.seed,
        )
        data = scenarios.sample_scenario(spec)
        observed, target = data.observed, data.target
        default_kernel = data.train_kernel
    elif args.in_data is not None:
        if args.in_target is None:
            raise InputError("file-based training requires --in-target")
        observed = dataio.read_samples(args.in_data)
        target = dataio.read_samples(args.in_target)
        default_kernel = None
    else:
        raise InputError("train requires --scenario or --in")

    if args.kernel is not None:
        spec_k, source = _resolve_kernel(args.kernel, observed.points)
    elif default_kernel is not None:
        spec_k, source = default_kernel, "scenario-default"
    else:
        spec_k, source = _resolve_kernel(None, observed.points)
    if source == "median-heuristic":
        print(
            f"bandwidth={dataio.format_float(spec_k.bandwidths[0])} "
            "bandwidth_source=median-heuristic"
        )

    gen_size = args.gen_size
    if gen_size is None:
        gen_size = 128 if args.generator == "particle" else 256
    config = flow.TrainConfig(
        estimator=args.estimator,
        generator=args.generator,
        kernel=spec_k,
        lr=args.lr,
        iters=args.iters,
        batch_size=args.batch,
        gen_size=gen_size,
        groups=args.groups,
        seed=args.seed,
        eval_every=args.eval_every,
        eval_size=args.eval_size,
    )
    if args.scenario == scenarios.SCENARIO_FIG1 and args.generator == "particle":
        rng = np.random.default_rng(derive_seed(args.seed, 0))
        init = flow.particle_init(
            rng, gen_size, observed.dim,
            scenarios.FIG1_INIT_CENTER, scenarios.FIG1_INIT_SPREAD,
        )
    report = flow.train(config, observed, target, init=init)
    if args.out_trace:
        dataio.write_table(
            args.out_trace,
            ["iteration", "loss", "mmd2_to_target", "mmd2_to_observed"],
            [
                (row.iteration, row.loss, row.mmd2_to_target, row.mmd2_to_observed)
                for row in report.trace
            ],
        )
        print(f"wrote {args.out_trace}")
    if args.out_samples:
        dataio.write_samples(args.out_samples, SampleSet(report.final_points))
        print(f"wrote {args.out_samples}")
    print(
        f"final_mmd2_target={dataio.format_float(report.final_mmd2_target)} "
        f"final_mmd2_observed={dataio.format_float(report.final_mmd2_observed)}"
    )
    _summary(report.estimator, report.trace[-1].loss)
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wmmd",
        description="Weighted squared-MMD estimation, bound checks and training",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="sample a scenario to CSV files")
    p.add_argument("--scenario", choices=scenarios.SCENARIO_NAMES)
    p.add_argument("--n", type=int, help="observed sample size")
    p.add_argument("--n-target", type=int, dest="n_target")
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path prefix")
    p.add_argument("--config")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("estimate", help="run one estimator on CSV datasets")
    p.add_argument("--estimator", choices=ESTIMATOR_KINDS)
    p.add_argument("--kernel", help="rbf | rbf:G | rbf-mixture:G1,..:W1,.. | linear-bounded:H:D")
    p.add_argument("--groups", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--in-x", dest="in_x")
    p.add_argument("--in-y", dest="in_y")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify-bounds", help="empirical tails vs analytic bounds")
    p.add_argument("--scenario", choices=sorted(scenarios.TAIL_SCENARIOS))
    p.add_argument("--estimator", choices=("iw", "miw"))
    p.add_argument("--t-grid", dest="t_grid", type=_float_list)
    p.add_argument("--replicates", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma2", help="analytic | mc | <float> (miw only)")
    p.add_argument("--pair-draws", dest="pair_draws", type=int)
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser("fit-weights", help="propagate labeled weights to a dataset")
    p.add_argument("--labeled")
    p.add_argument("--lambda", dest="ridge", type=float)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--floor", type=float)
    p.add_argument("--in", dest="in_data")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_fit_weights)

    p = sub.add_parser("train", help="gradient-descent training on a weighted loss")
    p.add_argument("--scenario", choices=scenarios.SCENARIO_NAMES)
    p.add_argument("--in", dest="in_data", help="observed dataset CSV (file mode)")
    p.add_argument("--in-target", dest="in_target", help="target holdout CSV (file mode)")
    p.add_argument("--estimator", choices=flow.TRAIN_KINDS)
    p.add_argument("--generator", choices=("particle", "affine"))
    p.add_argument("--kernel")
    p.add_argument("--iters", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--groups", type=int)
    p.add_argument("--gen-size", dest="gen_size", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--eval-every", dest="eval_every", type=int)
    p.add_argument("--eval-size", dest="eval_size", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--n-target", dest="n_target", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--out-trace", dest="out_trace")
    p.add_argument("--out-samples", dest="out_samples")
    p.add_argument("--config")
    p.set_defaults(func=cmd_train)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ContractError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
