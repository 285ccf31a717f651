"""Command-line workflow wiring every stage into one tool.

Subcommands mirror the operational sequence: ingest → stats → assess →
rules → simulate → feedback → report. Each command reads earlier artifacts
from the output directory, verifies their provenance, and writes its own
artifacts with provenance attached. Exit codes: 0 success, 1 fatal,
2 success with warnings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from filelock import FileLock, Timeout

from . import alerts, ingest, pipeline, risk, stats
from .errors import AcaError, ArtifactError
from .library import (
    ThreatLibrary,
    default_library,
    load_library,
    save_library,
    MAPPING_INTERPRETATION_NOTE,
)
from .provenance import Provenance, records_checksum

BUNDLED_SNAPSHOT = "data/breach_snapshot_2009_2023.csv"

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_WARNINGS = 2

_CONFIG_KEYS = (
    "dataset",
    "library",
    "filter",
    "seed",
    "events",
    "benign_fraction",
    "out",
    "keywords",
    "responses",
)


@dataclass
class RunConfig:
    """Effective settings after merging config file, flags, and environment."""

    dataset_path: Path | None
    library_path: Path | None
    filter_spec: str
    seed: int
    n_events: int
    benign_fraction: float
    output_dir: Path
    keyword_rules_path: Path | None
    responses: bool


def bundled_snapshot_path() -> Path:
    return Path(str(resources.files("aca").joinpath(BUNDLED_SNAPSHOT)))


def _load_config_file(path: str) -> dict[str, Any]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ArtifactError(f"config {path}: expected a JSON object")
    unknown = sorted(set(raw) - set(_CONFIG_KEYS))
    if unknown:
        raise ArtifactError(f"config {path}: unknown keys {', '.join(unknown)}")
    return raw


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge precedence: ACA_OUT env > flags > config file > defaults."""
    file_cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}

    def pick(flag_name: str, default):
        flag_value = getattr(args, flag_name, None)
        if flag_value is not None:
            return flag_value
        return file_cfg.get(flag_name, default)

    out = pick("out", "aca_out")
    env_out = os.environ.get("ACA_OUT")
    if env_out:
        out = env_out

    dataset = pick("dataset", None)
    library = pick("library", None)
    keywords = pick("keywords", None)
    try:
        seed = int(pick("seed", 42))
        n_events = int(pick("events", 10000))
        benign_fraction = float(pick("benign_fraction", 0.5))
    except (TypeError, ValueError) as exc:
        raise ArtifactError(f"bad numeric setting: {exc}") from exc

    return RunConfig(
        dataset_path=Path(dataset) if dataset else None,
        library_path=Path(library) if library else None,
        filter_spec=str(pick("filter", "all")),
        seed=seed,
        n_events=n_events,
        benign_fraction=benign_fraction,
        output_dir=Path(out),
        keyword_rules_path=Path(keywords) if keywords else None,
        responses=bool(pick("responses", False)),
    )


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path} is not valid JSON: {exc}") from exc


def _write_csv(path: Path, payload: str, provenance: Provenance) -> None:
    path.write_text(f"# {provenance.comment_line()}\n" + payload, encoding="utf-8")


def _load_records(config: RunConfig) -> tuple[list[ingest.BreachRecord], list[ingest.ParseIssue], Path]:
    """Dataset resolution: --dataset, then a prior normalized export, then bundled."""
    if config.dataset_path is not None:
        source = config.dataset_path
    elif (config.output_dir / "normalized.csv").exists():
        source = config.output_dir / "normalized.csv"
    else:
        source = bundled_snapshot_path()
    if not source.exists():
        raise AcaError(f"dataset not found: {source}")
    records, issues = ingest.parse_breach_file(source)
    return records, issues, source


def _load_working_library(config: RunConfig) -> ThreatLibrary:
    """Library resolution: --library, then the output dir's library, then default."""
    if config.library_path is not None:
        return load_library(config.library_path)
    working = config.output_dir / "library.json"
    if working.exists():
        return load_library(working)
    return default_library()


def cmd_ingest(config: RunConfig) -> int:
    records, issues, source = _load_records(config)
    provenance = Provenance(snapshot_sha256=records_checksum(records))
    out = config.output_dir
    ingest.write_normalized_csv(records, out / "normalized.csv", [provenance.comment_line()])
    ingest.write_issues_csv(issues, out / "issues.csv", [provenance.comment_line()])
    rejects = sum(1 for issue in issues if issue.severity == "reject")
    warnings = len(issues) - rejects
    print(
        f"ingest: {len(records)} records from {source} "
        f"({rejects} rejected, {warnings} warnings)"
    )
    print(f"ingest: wrote {out / 'normalized.csv'} and {out / 'issues.csv'}")
    return EXIT_WARNINGS if rejects else EXIT_OK


def cmd_stats(config: RunConfig) -> int:
    records, _, _ = _load_records(config)
    provenance = Provenance(snapshot_sha256=records_checksum(records))
    out = config.output_dir

    entity_rows = stats.individuals_by_entity_type(records)
    yearly = stats.breaches_per_year(records)
    type_counts = stats.breaches_by_type(records)
    _write_csv(out / "stats_entity.csv", stats.entity_csv_text(entity_rows), provenance)
    _write_csv(out / "stats_yearly.csv", stats.yearly_csv_text(yearly), provenance)
    _write_csv(out / "stats_types.csv", stats.types_csv_text(type_counts), provenance)

    responses = None
    if config.responses or config.keyword_rules_path is not None:
        rules = stats.DEFAULT_KEYWORD_RULES
        if config.keyword_rules_path is not None:
            rules = stats.load_keyword_rules(config.keyword_rules_path)
        responses = stats.response_actions_by_entity(records, rules)
        _write_csv(out / "stats_responses.csv", stats.responses_csv_text(responses), provenance)

    _write_json(
        out / "stats.json",
        stats.stats_bundle(entity_rows, yearly, type_counts, responses, provenance.snapshot_sha256),
    )
    grand = stats.grand_total_individuals(records)
    print(f"stats: {len(records)} records, {grand} individuals affected overall")
    print(f"stats: wrote stats_entity/yearly/types{'/responses' if responses else ''}.csv and stats.json in {out}")
    return EXIT_OK


def cmd_assess(config: RunConfig) -> int:
    records, _, _ = _load_records(config)
    library = _load_working_library(config)
    filter_spec = pipeline.parse_filter_spec(config.filter_spec)
    result = pipeline.run_pipeline(records, library, filter_spec)
    scores = risk.score_patterns(list(result.patterns), library)

    out = config.output_dir
    pipeline.save_result(result, out / "pipeline_result.json")
    _write_csv(out / "risk_report.csv", risk.risk_csv_text(scores), result.provenance)
    doc = risk.risk_json_doc(scores, result.provenance)
    doc["notes"].append(MAPPING_INTERPRETATION_NOTE)
    _write_json(out / "risk_report.json", doc)

    top = f"{scores[0].pattern.entry_id} ({scores[0].pattern.actor})" if scores else "n/a"
    print(
        f"assess: {len(result.patterns)} patterns from {len(records)} records "
        f"({result.unclassified_count} unclassified), top risk: {top}"
    )
    print(f"assess: wrote pipeline_result.json, risk_report.csv, risk_report.json in {out}")
    return EXIT_OK


def _load_result(out: Path) -> pipeline.PipelineResult:
    path = out / "pipeline_result.json"
    if not path.exists():
        raise AcaError(f"{path} not found; run 'assess' first")
    return pipeline.load_result(path)


def cmd_rules(config: RunConfig) -> int:
    out = config.output_dir
    result = _load_result(out)
    library = _load_working_library(config)
    if library.version != result.provenance.library_version:
        raise AcaError(
            f"library version {library.version} does not match the assessment's "
            f"version {result.provenance.library_version}; re-run 'assess'"
        )
    scores = risk.score_patterns(list(result.patterns), library)
    rules = alerts.generate_rules(scores)
    _write_json(out / "rules.json", alerts.rules_doc(rules, result.provenance))
    blocking = sum(1 for rule in rules if rule.action is alerts.Action.ALERT_BLOCK)
    print(f"rules: {len(rules)} rules generated ({blocking} blocking); wrote {out / 'rules.json'}")
    return EXIT_OK


def cmd_simulate(config: RunConfig) -> int:
    out = config.output_dir
    result = _load_result(out)
    rules_path = out / "rules.json"
    if not rules_path.exists():
        raise AcaError(f"{rules_path} not found; run 'rules' first")
    rules, rules_provenance = alerts.rules_from_doc(_read_json(rules_path))
    if rules_provenance.to_dict() != result.provenance.to_dict():
        raise AcaError("rules.json provenance does not match pipeline_result.json; re-run 'rules'")

    events = alerts.synthesize_events(
        list(result.patterns), config.seed, config.n_events, config.benign_fraction
    )
    provenance = Provenance(
        snapshot_sha256=result.provenance.snapshot_sha256,
        library_version=result.provenance.library_version,
        seed=config.seed,
    )
    report = alerts.evaluate_rules(rules, events, provenance=provenance)
    _write_csv(out / "events.csv", alerts.events_csv_text(events), provenance)
    _write_json(out / "detection_report.json", report.to_dict())
    print(
        f"simulate: {report.events_total} events (seed {config.seed}), "
        f"detection_rate {report.detection_rate:.3f}, "
        f"attack_reduction {report.attack_reduction:.3f}"
    )
    print(f"simulate: wrote events.csv and detection_report.json in {out}")
    return EXIT_OK


def cmd_feedback(config: RunConfig) -> int:
    out = config.output_dir
    result = _load_result(out)
    report_path = out / "detection_report.json"
    if not report_path.exists():
        raise AcaError(f"{report_path} not found; run 'simulate' first")
    report = alerts.report_from_dict(_read_json(report_path))
    library = _load_working_library(config)

    updated, delta = alerts.feedback_update(library, report, result)
    save_library(updated, out / "library.json")
    _write_json(out / "feedback_delta.json", delta.to_dict())
    print(
        f"feedback: library v{delta.version_before} -> v{delta.version_after}, "
        f"{len(delta.changes)} entries reweighted"
    )
    print(f"feedback: wrote library.json and feedback_delta.json in {out}")
    return EXIT_OK


def _summary_sections(out: Path) -> list[str]:
    lines = ["# Breach analytics summary", ""]

    def section(title: str, path: Path, render) -> None:
        lines.append(f"## {title}")
        lines.append("")
        if not path.exists():
            lines.append("not run")
        else:
            render(_read_json(path) if path.suffix == ".json" else path)
        lines.append("")

    def render_stats(doc: dict) -> None:
        lines.append(f"- snapshot: `{doc['provenance']['snapshot_sha256']}`")
        lines.append(f"- individuals affected overall: {doc['grand_total_individuals']:,}")
        for row in doc["entity_impact"]:
            lines.append(
                f"- {row['entity_type']}: {row['total_individuals']:,} ({row['percent']}%)"
            )

    def render_risk(doc: dict) -> None:
        for note in doc.get("notes", []):
            lines.append(f"- note: {note}")
        lines.append("")
        lines.append("| rank | entry | actor | breach type | composite |")
        lines.append("| --- | --- | --- | --- | --- |")
        for score in doc["scores"][:5]:
            lines.append(
                f"| {score['rank']} | {score['entry_id']} | {score['actor']} "
                f"| {score['breach_type']} | {score['composite']:.4f} |"
            )

    def render_rules(doc: dict) -> None:
        by_severity: dict[str, int] = {}
        for rule in doc["rules"]:
            by_severity[rule["severity"]] = by_severity.get(rule["severity"], 0) + 1
        lines.append(f"- {len(doc['rules'])} rules")
        for severity in ("critical", "high", "medium", "low"):
            if severity in by_severity:
                lines.append(f"- {severity}: {by_severity[severity]}")

    def render_detection(doc: dict) -> None:
        lines.append(f"- events: {doc['events_total']} (attacks {doc['attacks_total']})")
        lines.append(f"- detection rate: {doc['detection_rate']:.3f}")
        lines.append(f"- false alert rate: {doc['false_alert_rate']:.3f}")
        lines.append(f"- attack reduction (impact-weighted): {doc['attack_reduction']:.3f}")
        lines.append(f"- attack reduction (by count): {doc['attack_reduction_by_count']:.3f}")

    def render_feedback(doc: dict) -> None:
        lines.append(f"- library v{doc['version_before']} -> v{doc['version_after']}")
        for entry_id, change in doc["changes"].items():
            lines.append(
                f"- {entry_id}: weight {change['before']:.4f} -> {change['after']:.4f} "
                f"(miss rate {change['miss_rate']:.3f})"
            )
        if not doc["changes"]:
            lines.append("- no missed entries; weights unchanged")

    section("Breach statistics", out / "stats.json", render_stats)
    section("Risk assessment", out / "risk_report.json", render_risk)
    section("Alert rules", out / "rules.json", render_rules)
    section("Detection", out / "detection_report.json", render_detection)
    section("Feedback", out / "feedback_delta.json", render_feedback)
    return lines


def cmd_report(config: RunConfig) -> int:
    out = config.output_dir
    lines = _summary_sections(out)
    (out / "summary.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"report: wrote {out / 'summary.md'}")
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "assess": cmd_assess,
    "rules": cmd_rules,
    "simulate": cmd_simulate,
    "feedback": cmd_feedback,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aca",
        description="Attacker-centric breach analytics: ingest, stats, risk, alerts, feedback.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("ingest", "parse a breach CSV and write the normalized export"),
        ("stats", "write descriptive statistics tables"),
        ("assess", "run the threat pipeline and risk scoring"),
        ("rules", "generate alert rules from the latest assessment"),
        ("simulate", "replay rules against a seeded synthetic event stream"),
        ("feedback", "feed detection misses back into the threat library"),
        ("report", "bundle artifacts into a human-readable summary"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--dataset", help="breach CSV to analyze (default: bundled snapshot)")
        cmd.add_argument("--library", help="threat library JSON (default: working library)")
        cmd.add_argument("--filter", help="comma-separated PHI locations, or 'all'")
        cmd.add_argument("--seed", type=int, help="simulation seed (default 42)")
        cmd.add_argument("--events", type=int, help="number of simulated events (default 10000)")
        cmd.add_argument(
            "--benign-fraction",
            dest="benign_fraction",
            type=float,
            help="fraction of benign events (default 0.5)",
        )
        cmd.add_argument("--out", help="output directory (default aca_out; env ACA_OUT overrides)")
        cmd.add_argument("--keywords", help="keyword rules JSON for response extraction")
        cmd.add_argument(
            "--responses",
            action="store_true",
            default=None,
            help="include response-action stats",
        )
        cmd.add_argument("--config", help="JSON config file; flags override its values")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = build_config(args)
        config.output_dir.mkdir(parents=True, exist_ok=True)
        lock = FileLock(str(config.output_dir / ".aca.lock"))
        try:
            with lock.acquire(timeout=30):
                return _COMMANDS[args.command](config)
        except Timeout:
            print(
                f"error: {config.output_dir} is in use by another invocation",
                file=sys.stderr,
            )
            return EXIT_FATAL
    except (AcaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
