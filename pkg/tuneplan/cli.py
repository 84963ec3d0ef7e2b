# Copyright 2026 The Tuneplan Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Command-line entry point for tuning campaigns.

Run with:
  python -m tuneplan SUBCOMMAND CAMPAIGN [--seed=N] [--cutoff=C] \
      [--budget-multiplier=M] [--parallel=P] [--out=DIR]

SUBCOMMAND is one of
  sensitivity  measure the influence matrix
  insights     correlations and feature importance of the recorded evaluations
  plan         partition the parameters into searches
  run          execute the plan (continues from DIR/evals.db)
  compare      run the four search strategies side by side
  bench        compare on a bundled synthetic case (--case)
  report       print the reports already written to DIR

CAMPAIGN is a YAML campaign document; see tuneplan.orchestrator.campaign.
Every output goes to DIR with a fixed file name. Exit codes: 0 on success,
1 for a bad campaign, flag or missing file, 2 when evaluations fail.
"""

import argparse
import dataclasses
import json
import logging
import pathlib
import sys
from typing import Any, Dict, List, Optional, Sequence

from tuneplan.analysis import (
    InfluenceMatrix,
    summarize_insights,
    run_sensitivity,
)
from tuneplan.errors import (
    SEARCH_FAILURES,
    BaselineFailureError,
    CampaignError,
    ConfigMismatchError,
    CoverageError,
    SchemaMismatchError,
    ZeroBaselineError,
)
from tuneplan.objectives import TOTAL, EvaluationRecord
from tuneplan.orchestrator import (
    CampaignConfig,
    EvaluationDb,
    compare_strategies,
    execute_plan,
    load_bundled,
    load_records,
    warm_start,
)
from tuneplan.planner import SearchPlan, build_graph, emit_plan

logger = logging.getLogger(__name__)

INFLUENCE_MATRIX = "influence.matrix"
INFLUENCE_REPORT = "influence.report"
INSIGHTS_MACHINE = "insights.machine"
INSIGHTS_REPORT = "insights.report"
PLAN_MACHINE = "plan.machine"
PLAN_REPORT = "plan.report"
RESULT_MACHINE = "result.machine"
RESULT_REPORT = "result.report"
COMPARISON_MACHINE = "comparison.machine"
COMPARISON_REPORT = "comparison.report"
EVALS_DB = "evals.db"
REPORTS = (
    INFLUENCE_REPORT,
    INSIGHTS_REPORT,
    PLAN_REPORT,
    RESULT_REPORT,
    COMPARISON_REPORT,
)

DIGEST = "campaign_digest"
DEFAULT_REPEATS = 5
GLOBAL_TOP_K = 10

USER_ERRORS = (
    CampaignError,
    CoverageError,
    ConfigMismatchError,
    SchemaMismatchError,
    FileNotFoundError,
    BaselineFailureError,
    ZeroBaselineError,
)
RUNTIME_ERRORS = SEARCH_FAILURES


def _write(out: pathlib.Path, name: str, text: str) -> pathlib.Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def _read(path: pathlib.Path) -> str:
    return path.read_text(encoding="utf-8")


def _write_json(out: pathlib.Path, name: str, data: Dict[str, Any]) -> pathlib.Path:
    return _write(out, name, json.dumps(data, indent=2))


def _cached(path: pathlib.Path, digest: str, **expected) -> Optional[Dict[str, Any]]:
    """The machine file at `path` if the same campaign settings wrote it."""
    if not path.is_file():
        return None
    data = json.loads(path.read_text(encoding="utf-8"))
    if data.get(DIGEST) != digest:
        return None
    if any(data.get(k) != v for k, v in expected.items()):
        return None
    return data


def influence_report(matrix: InfluenceMatrix, top_k: int = GLOBAL_TOP_K) -> str:
    lines = [matrix.format_table(), "", "Strongest influences overall:"]
    for routine, parameter, value in matrix.global_ranking()[:top_k]:
        lines.append(f"  {parameter:<16} on {routine:<10} {100 * value:.2f}%")
    lines.extend(f"note: {n}" for n in matrix.notes)
    return "\n".join(lines)


def _sensitivity(campaign: CampaignConfig) -> InfluenceMatrix:
    path = campaign.out_dir / INFLUENCE_MATRIX
    data = _cached(path, campaign.digest)
    if data is not None:
        logger.info("Reusing %s", path)
        return InfluenceMatrix.from_dict(data)
    settings = dataclasses.replace(campaign.sensitivity, parallel=campaign.parallel)
    matrix = run_sensitivity(
        campaign.space, campaign.routines, settings, campaign.build_objective()
    )
    data = {DIGEST: campaign.digest, **matrix.to_dict()}
    _write_json(campaign.out_dir, INFLUENCE_MATRIX, data)
    _write(campaign.out_dir, INFLUENCE_REPORT, influence_report(matrix))
    return matrix


def _matrix(campaign: CampaignConfig, args: argparse.Namespace, measure: bool):
    """The influence matrix from --matrix, the campaign, or the output dir.

    Failing those, sensitivity analysis runs when `measure` is set.

    Raises:
        FileNotFoundError: no matrix is available and `measure` is unset.
    """
    if getattr(args, "matrix", None):
        with open(args.matrix, encoding="utf-8") as f:
            return InfluenceMatrix.from_dict(json.load(f))
    matrix = campaign.load_influence()
    if matrix is not None:
        return matrix
    path = campaign.out_dir / INFLUENCE_MATRIX
    if path.is_file() or not measure:
        with open(path, encoding="utf-8") as f:
            return InfluenceMatrix.from_dict(json.load(f))
    return _sensitivity(campaign)


def _plan(campaign: CampaignConfig, matrix: InfluenceMatrix) -> SearchPlan:
    plan = emit_plan(campaign.space, matrix, campaign.planner)
    graph = build_graph(matrix, campaign.space)
    report = "\n\n".join(
        [graph.format_dag(campaign.planner.cutoff), plan.format_table()]
    )
    _write_json(campaign.out_dir, PLAN_MACHINE, plan.to_dict())
    _write(campaign.out_dir, PLAN_REPORT, report)
    return plan


def cmd_sensitivity(args: argparse.Namespace, campaign: CampaignConfig) -> None:
    matrix = _sensitivity(campaign)
    print(influence_report(matrix))


def cmd_insights(args: argparse.Namespace, campaign: CampaignConfig) -> None:
    records: List[EvaluationRecord] = []
    matrix_path = campaign.out_dir / INFLUENCE_MATRIX
    db_path = campaign.out_dir / EVALS_DB
    if matrix_path.is_file():
        matrix = InfluenceMatrix.from_dict(json.loads(_read(matrix_path)))
        if matrix.baseline_record is not None:
            records.append(matrix.baseline_record)
        records.extend(matrix.sample_records)
    if db_path.is_file():
        records.extend(load_records(db_path))
    if not records:
        raise FileNotFoundError(
            f"No evaluations to analyse: neither {matrix_path} nor {db_path} exists"
        )
    targets = [args.target] if args.target else [*campaign.routines, TOTAL]
    reports = [
        summarize_insights(records, target, seed=campaign.seed, space=campaign.space)
        for target in targets
    ]
    _write_json(
        campaign.out_dir,
        INSIGHTS_MACHINE,
        {DIGEST: campaign.digest, "targets": [r.to_dict() for r in reports]},
    )
    text = "\n\n".join(r.format_report() for r in reports)
    _write(campaign.out_dir, INSIGHTS_REPORT, text)
    print(text)


def cmd_plan(args: argparse.Namespace, campaign: CampaignConfig) -> None:
    _plan(campaign, _matrix(campaign, args, measure=False))
    print(_read(campaign.out_dir / PLAN_REPORT), end="")


def cmd_run(args: argparse.Namespace, campaign: CampaignConfig) -> None:
    db_path = campaign.out_dir / EVALS_DB
    if args.resume and not db_path.is_file():
        raise FileNotFoundError(f"Nothing to resume: {db_path} does not exist")
    cached = _cached(campaign.out_dir / RESULT_MACHINE, campaign.digest)
    if cached is not None:
        logger.info("Campaign already finished; printing the stored result")
        print(_read(campaign.out_dir / RESULT_REPORT), end="")
        return
    plan = _plan(campaign, _matrix(campaign, args, measure=True))
    prior = None
    if args.warm_start:
        prior = warm_start(campaign.space, plan, load_records(args.warm_start))
    db = EvaluationDb(db_path, campaign.digest)
    if len(db):
        logger.info("Continuing from %d recorded evaluations", len(db))
    report = execute_plan(plan, campaign, db=db, prior=prior)
    _write_json(
        campaign.out_dir, RESULT_MACHINE, {DIGEST: campaign.digest, **report.to_dict()}
    )
    _write(campaign.out_dir, RESULT_REPORT, report.format_report())
    print(report.format_report())


def cmd_compare(args: argparse.Namespace, campaign: CampaignConfig) -> None:
    path = campaign.out_dir / COMPARISON_MACHINE
    if _cached(path, campaign.digest, repeats=args.repeats) is not None:
        logger.info("Comparison already finished; printing the stored result")
        print(_read(campaign.out_dir / COMPARISON_REPORT), end="")
        return
    db = EvaluationDb(campaign.out_dir / EVALS_DB, campaign.digest)
    if len(db):
        logger.info("Continuing from %d recorded evaluations", len(db))
    comparison = compare_strategies(
        campaign, args.repeats, matrix=_matrix(campaign, args, measure=True), db=db
    )
    _write_json(
        campaign.out_dir,
        COMPARISON_MACHINE,
        {DIGEST: campaign.digest, **comparison.to_dict()},
    )
    _write(campaign.out_dir, COMPARISON_REPORT, comparison.format_table())
    print(comparison.format_table())


def cmd_report(args: argparse.Namespace, campaign: CampaignConfig) -> None:
    found = [campaign.out_dir / n for n in REPORTS if (campaign.out_dir / n).is_file()]
    if not found:
        raise FileNotFoundError(f"No reports in {campaign.out_dir}")
    for path in found:
        print(f"== {path.name}")
        print(_read(path), end="")


HELP = {
    "sensitivity": "measure the influence matrix",
    "insights": "correlations and feature importance of recorded evaluations",
    "plan": "partition the parameters into searches",
    "run": "execute the plan",
    "compare": "compare the four search strategies",
    "report": "print the reports already written",
}

COMMANDS = {
    "sensitivity": cmd_sensitivity,
    "insights": cmd_insights,
    "plan": cmd_plan,
    "run": cmd_run,
    "compare": cmd_compare,
    "bench": cmd_compare,
    "report": cmd_report,
}


class ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors with exit status 1, like other campaign mistakes."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="campaign seed")
    common.add_argument("--cutoff", type=float, help="edge cut-off, 0.25 is 25%%")
    common.add_argument(
        "--budget-multiplier", type=float, help="evaluations per tuned parameter"
    )
    common.add_argument("--parallel", type=int, help="concurrent evaluations")
    common.add_argument("--out", type=str, help="output directory")
    common.add_argument("--verbose", action="store_true", help="log at DEBUG level")

    parser = ArgumentParser(
        prog="tuneplan", description="Plan and run multi-routine autotuning campaigns."
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, summary in HELP.items():
        sub = commands.add_parser(name, parents=[common], help=summary)
        sub.add_argument("campaign", type=str, help="path to the campaign document")
    bench = commands.add_parser(
        "bench", parents=[common], help="compare strategies on a synthetic case"
    )
    bench.add_argument("--case", type=int, required=True, choices=range(1, 6))

    for name in ("plan", "run", "compare", "bench"):
        commands.choices[name].add_argument(
            "--matrix", type=str, help="influence matrix file to plan with"
        )
    for name in ("compare", "bench"):
        commands.choices[name].add_argument(
            "--repeats", type=int, default=DEFAULT_REPEATS, help="runs per strategy"
        )
    commands.choices["run"].add_argument(
        "--resume", action="store_true", help="continue from an existing evals.db"
    )
    commands.choices["run"].add_argument(
        "--warm-start", type=str, help="evaluation db of an earlier campaign"
    )
    commands.choices["insights"].add_argument(
        "--target", type=str, help="routine to analyse (default: all and total)"
    )
    return parser


def load_campaign(args: argparse.Namespace) -> CampaignConfig:
    overrides = {
        "seed": args.seed,
        "cutoff": args.cutoff,
        "budget_multiplier": args.budget_multiplier,
        "parallel": args.parallel,
        "out": args.out,
    }
    if args.command == "bench":
        if args.seed is None:
            overrides["seed"] = 1
        return load_bundled(f"synthetic_case{args.case}.yaml", overrides)
    return CampaignConfig.load(args.campaign, overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        campaign = load_campaign(args)
        COMMANDS[args.command](args, campaign)
    except USER_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except RUNTIME_ERRORS as e:
        print(f"failed: {e}", file=sys.stderr)
        return 2
    return 0
