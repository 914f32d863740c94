"""Command-line front end: cv, rank, select, simulate, scree.

Exit codes: 0 success, 2 input/validation error, 3 numerical failure.
Machine-readable JSON uses 0-based feature indices with an explicit
"index_base" field; console summaries use 1-based indices.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from ._svg import render_scree_svg
from .core import (
    NumericalError,
    RiskRfeError,
    RunConfig,
    Task,
    ValidationError,
    load_dataset,
)
from .kernels import GAUSSIAN, LINEAR, KernelSpec
from .learner import LossSpec
from .rfe import RfeTrace, run_rfe, scree_csv_rows
from .simlab import ScenarioError, load_scenario_file, run_scenario, table_rows
from .stopping import (
    StoppingRule,
    change_point_selection,
    fit_change_point,
    scree_values,
)
from .tuning import CvConfig, cross_validate, cv_table_rows

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class _OutputDir:
    """Output-file handling: create the directory, refuse to overwrite
    existing result files unless --force."""

    def __init__(self, root: str, force: bool):
        self.root = Path(root)
        self.force = force
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        target = self.root / name
        if target.exists() and not self.force:
            raise ValidationError(f"refusing to overwrite {target} (use --force)")
        return target


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _task(args) -> Task:
    return Task(args.task)


def _loss_for_task(task: Task, epsilon: float) -> LossSpec:
    if task is Task.CLASSIFICATION:
        return LossSpec.hinge()
    return LossSpec.epsilon_insensitive(epsilon)


def _parse_grid(text: str | None, fallback) -> tuple[float, ...]:
    if text is None:
        return fallback
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ValidationError(f"bad grid value list: {text!r}")
    if not values:
        raise ValidationError(f"empty grid: {text!r}")
    return values


def _resolve_params(args, dataset) -> tuple[float, float | None]:
    """(lambda, gamma) from --params JSON or from explicit flags."""
    if args.params:
        path = Path(args.params)
        if not path.exists():
            raise ValidationError(f"params file not found: {path}")
        payload = json.loads(path.read_text(encoding="utf-8"))
        lam = payload.get("lambda")
        gamma = payload.get("gamma")
    else:
        lam = getattr(args, "lambda")
        gamma = args.gamma
    if lam is None:
        raise ValidationError("provide --lambda (or --params from `cv`)")
    if args.kernel == GAUSSIAN and gamma is None:
        raise ValidationError("the gaussian kernel needs --gamma (or --params)")
    return float(lam), None if gamma is None else float(gamma)


def _kernel_spec(kind: str, gamma: float | None) -> KernelSpec:
    if kind == LINEAR:
        return KernelSpec.linear()
    return KernelSpec.gaussian(gamma)


def _run_config(args, dataset, stopping: StoppingRule) -> RunConfig:
    lam, gamma = _resolve_params(args, dataset)
    return RunConfig(
        kernel=_kernel_spec(args.kernel, gamma),
        loss=_loss_for_task(_task(args), args.epsilon),
        lam=lam,
        stopping=stopping,
        seed=args.seed,
        cycle_size=args.cycle_size,
        learner=args.learner,
        fit_bias=True,
    )


def _one_based(indices) -> list[int]:
    return [int(i) + 1 for i in indices]


def cmd_cv(args) -> int:
    out = _OutputDir(args.out, args.force)
    dataset = load_dataset(args.data, _task(args), has_header=args.header)
    cv = CvConfig(
        folds=args.folds,
        grid_c=_parse_grid(args.grid_c, CvConfig().grid_c),
        grid_gamma=_parse_grid(args.grid_gamma, CvConfig().grid_gamma),
        seed=args.seed,
    )
    loss = _loss_for_task(_task(args), args.epsilon)
    result = cross_validate(dataset, args.kernel, loss, cv)
    _write_csv(out.path("cv_table.csv"), cv_table_rows(result))
    _write_json(
        out.path("chosen_params.json"),
        {
            "kernel": args.kernel,
            "g": result.g,
            "gamma": result.gamma,
            "lambda": result.lam,
            "mean_score": result.score,
        },
    )
    print(f"selected lambda={result.lam:g}" + (f", gamma={result.gamma:g}" if result.gamma else ""))
    return EXIT_OK


def _emit_rank_outputs(out: _OutputDir, trace, ranking) -> None:
    _write_json(out.path("trace.json"), trace.to_dict())
    _write_json(out.path("ranking.json"), ranking.to_dict())
    rows = [("cycle_index", "objective_after", "best_delta")]
    rows.extend(scree_csv_rows(trace))
    _write_csv(out.path("scree.csv"), rows)


def cmd_rank(args) -> int:
    out = _OutputDir(args.out, args.force)
    dataset = load_dataset(args.data, _task(args), has_header=args.header)
    config = _run_config(args, dataset, StoppingRule.rank_all())
    trace, ranking = run_rfe(dataset, config)
    _emit_rank_outputs(out, trace, ranking)
    print(f"removal order (1-based, first removed first): {_one_based(ranking.order)}")
    return EXIT_OK


def _stopping_rule(args) -> StoppingRule:
    if args.rule == "fixed":
        if args.delta is None:
            raise ValidationError("--rule fixed needs --delta")
        return StoppingRule.fixed_threshold(args.delta)
    if args.rule == "erm-rate":
        if args.c is None:
            raise ValidationError("--rule erm-rate needs --c")
        return StoppingRule.erm_rate(args.c)
    if args.rule == "svm-rate":
        if args.c is None or args.beta is None:
            raise ValidationError("--rule svm-rate needs --c and --beta")
        return StoppingRule.svm_rate(args.c, args.beta)
    return StoppingRule.change_point()


def cmd_select(args) -> int:
    out = _OutputDir(args.out, args.force)
    dataset = load_dataset(args.data, _task(args), has_header=args.header)
    rule = _stopping_rule(args)
    payload: dict = {"index_base": 0, "rule": rule.to_dict()}
    if rule.kind == "change-point":
        if dataset.d < rule.min_left + rule.min_right:
            raise ValidationError(
                f"change-point selection needs at least "
                f"{rule.min_left + rule.min_right} features, dataset has {dataset.d}"
            )
        config = _run_config(args, dataset, StoppingRule.rank_all())
        trace, _ = run_rfe(dataset, config)
        cp = fit_change_point(scree_values(trace), rule.min_left, rule.min_right)
        eliminated, retained = change_point_selection(trace, cp)
        payload.update(
            {
                "retained": list(retained),
                "eliminated": list(eliminated),
                "change_point": cp.to_dict(),
                "selection_note": (
                    "features removed in cycles <= change_index are eliminated "
                    "(declared contract)"
                ),
            }
        )
    else:
        config = _run_config(args, dataset, rule)
        trace, _ = run_rfe(dataset, config)
        payload.update(
            {
                "retained": list(trace.final_mask.active),
                "eliminated": list(trace.final_mask.removed),
                "stop_reason": trace.stop_reason,
                "stopped_early": trace.stopped_early,
            }
        )
    _write_json(out.path("selected_features.json"), payload)
    print(f"retained features (1-based): {_one_based(payload['retained'])}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    out = _OutputDir(args.out, args.force)
    scenarios, template = load_scenario_file(args.scenario)
    table_path = out.path("table1.csv")
    archive_path = out.path("archive.json")
    results = []
    archive = {"index_base": 0, "scenarios": []}
    try:
        for scenario in scenarios:
            result = run_scenario(scenario, template)
            results.append(result)
            archive["scenarios"].append(
                {
                    "d": scenario.d,
                    "d0": scenario.d0,
                    "n": scenario.n,
                    "replications": scenario.replications,
                    "seed": scenario.seed,
                    "proportions": {
                        "no_errors": result.tally.proportions[0],
                        "one_error": result.tally.proportions[1],
                        "many_errors": result.tally.proportions[2],
                    },
                    "records": list(result.records),
                }
            )
    except (ScenarioError, KeyboardInterrupt) as exc:
        archive["partial"] = True
        if isinstance(exc, ScenarioError):
            archive["error"] = str(exc)
            archive["scenarios"].append({"partial_records": exc.partial})
        _write_json(archive_path, archive)
        if results:
            _write_csv(table_path, table_rows(results))
        if isinstance(exc, KeyboardInterrupt):
            print("interrupted; partial results flushed", file=sys.stderr)
            return 130
        raise
    _write_csv(table_path, table_rows(results))
    _write_json(archive_path, archive)
    for res in results:
        props = res.tally.proportions
        print(
            f"n={res.scenario.n}: no-errors {props[0]:.3f}, one {props[1]:.3f}, "
            f"many {props[2]:.3f}"
        )
    return EXIT_OK


def cmd_scree(args) -> int:
    out = _OutputDir(args.out, args.force)
    path = Path(args.trace)
    if not path.exists():
        raise ValidationError(f"trace file not found: {path}")
    try:
        trace = RfeTrace.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValidationError(f"malformed trace JSON: {exc}") from exc
    scree = scree_values(trace)
    cp = fit_change_point(scree, args.min_left, args.min_right)
    _write_json(out.path("changepoint.json"), cp.to_dict())
    out.path("scree.svg").write_text(
        render_scree_svg(scree, cp, __version__), encoding="utf-8"
    )
    print(f"change point at cycle {cp.change_index} (sse={cp.sse:.6g})")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=".", help="output directory (created if absent)")
    parser.add_argument("--force", action="store_true", help="overwrite existing outputs")
    parser.add_argument("--seed", type=int, default=0)


def _add_data_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("data", help="CSV dataset, target in the last column")
    parser.add_argument(
        "--task", required=True, choices=[t.value for t in Task], help="learning task"
    )
    parser.add_argument("--kernel", required=True, choices=[GAUSSIAN, LINEAR])
    parser.add_argument("--header", action="store_true", help="first CSV row is a header")
    parser.add_argument(
        "--epsilon", type=float, default=0.1, help="epsilon-insensitive loss width"
    )


def _add_model_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--params", help="chosen_params.json from `cv`")
    parser.add_argument("--lambda", type=float, dest="lambda", default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--cycle-size", type=int, default=1, dest="cycle_size")
    parser.add_argument(
        "--learner",
        choices=["kernel", "linear-erm"],
        default="kernel",
        help="compared objective: regularized kernel fit or plain least-squares risk",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risk-rfe",
        description="Risk-based recursive feature elimination for kernel SVM/SVR and ERM.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_cv = sub.add_parser("cv", help="cross-validate (lambda, gamma) on the grid")
    _add_data_options(p_cv)
    _add_common(p_cv)
    p_cv.add_argument("--folds", type=int, default=5)
    p_cv.add_argument("--grid-c", dest="grid_c", help="comma-separated g values")
    p_cv.add_argument("--grid-gamma", dest="grid_gamma", help="comma-separated gamma values")
    p_cv.set_defaults(func=cmd_cv)

    p_rank = sub.add_parser("rank", help="rank all features by elimination order")
    _add_data_options(p_rank)
    _add_model_options(p_rank)
    _add_common(p_rank)
    p_rank.set_defaults(func=cmd_rank)

    p_sel = sub.add_parser("select", help="select features with a stopping rule")
    _add_data_options(p_sel)
    _add_model_options(p_sel)
    _add_common(p_sel)
    p_sel.add_argument(
        "--rule",
        required=True,
        choices=["fixed", "erm-rate", "svm-rate", "change-point"],
    )
    p_sel.add_argument("--delta", type=float, default=None, help="fixed threshold")
    p_sel.add_argument("--c", type=float, default=None, help="schedule constant")
    p_sel.add_argument("--beta", type=float, default=None, help="schedule exponent")
    p_sel.set_defaults(func=cmd_select)

    p_sim = sub.add_parser("simulate", help="run a Monte-Carlo scenario file")
    p_sim.add_argument("scenario", help="scenario JSON spec")
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_scree = sub.add_parser("scree", help="scree SVG + change-point report from a trace")
    p_scree.add_argument("trace", help="trace.json from `rank`")
    _add_common(p_scree)
    p_scree.add_argument("--min-left", type=int, default=2, dest="min_left")
    p_scree.add_argument("--min-right", type=int, default=3, dest="min_right")
    p_scree.set_defaults(func=cmd_scree)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RiskRfeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
