"""Alert rules, synthetic event streams, detection scoring, and feedback.

The output stage turns prioritized risk scores into PHI-based alert rules,
replays them against a seeded synthetic event stream standing in for live
traffic, measures detection and impact reduction, and feeds missed entries
back into the threat library as weight increases.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

from .errors import ArtifactError, ProvenanceError, RiskInputError, SimulationError
from .ingest import BreachType, PhiLocation
from .library import AdjustWeights, ThreatCategory, ThreatLibrary, apply_update
from .pipeline import AttackPattern, PipelineResult
from .provenance import Provenance
from .risk import RiskScore


class Severity(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class Action(str, Enum):
    ALERT = "alert"
    ALERT_BLOCK = "alert+block"


def severity_for_composite(composite: float) -> Severity:
    """Quartile thresholds over the composite score's [0, 1] range."""
    if composite < 0.25:
        return Severity.LOW
    if composite < 0.5:
        return Severity.MEDIUM
    if composite < 0.75:
        return Severity.HIGH
    return Severity.CRITICAL


def action_for_severity(severity: Severity) -> Action:
    if severity in (Severity.HIGH, Severity.CRITICAL):
        return Action.ALERT_BLOCK
    return Action.ALERT


def _slug(text: str) -> str:
    out = []
    dash_pending = False
    for ch in text.lower():
        if ch.isalnum():
            if dash_pending and out:
                out.append("-")
            dash_pending = False
            out.append(ch)
        else:
            dash_pending = True
    return "".join(out)


@dataclass(frozen=True)
class RuleMatch:
    """The event fields a rule covers; sets match any member."""

    category: ThreatCategory
    breach_type: BreachType
    phi_locations: frozenset[PhiLocation]
    actors: frozenset[str]

    def covers(self, category: ThreatCategory, breach_type: BreachType,
               phi_location: PhiLocation, actor: str) -> bool:
        return (
            category is self.category
            and breach_type is self.breach_type
            and phi_location in self.phi_locations
            and actor in self.actors
        )


@dataclass(frozen=True)
class AlertRule:
    """One SIEM-exportable detection rule derived from a scored pattern."""

    id: str
    match: RuleMatch
    severity: Severity
    action: Action
    origin_entry_id: str
    origin_rank: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "match": {
                "category": self.match.category.value,
                "breach_type": self.match.breach_type.value,
                "phi_locations": sorted(loc.value for loc in self.match.phi_locations),
                "actors": sorted(self.match.actors),
            },
            "severity": self.severity.value,
            "action": self.action.value,
            "origin": {"entry_id": self.origin_entry_id, "rank": self.origin_rank},
        }


def generate_rules(prioritized: Sequence[RiskScore]) -> list[AlertRule]:
    """One rule per scored pattern, in rank order.

    Severity comes from the composite score's quartile; only high and
    critical rules block. Rule ids are deterministic slugs of the pattern
    coordinates.
    """
    if not prioritized:
        raise RiskInputError("no prioritized scores to generate rules from")
    rules = []
    for score in prioritized:
        pattern = score.pattern
        severity = severity_for_composite(score.composite)
        rules.append(
            AlertRule(
                id=f"{pattern.entry_id}--{_slug(pattern.breach_type.value)}--{_slug(pattern.actor)}",
                match=RuleMatch(
                    category=pattern.category,
                    breach_type=pattern.breach_type,
                    phi_locations=frozenset(pattern.phi_locations),
                    actors=frozenset({pattern.actor}),
                ),
                severity=severity,
                action=action_for_severity(severity),
                origin_entry_id=pattern.entry_id,
                origin_rank=score.rank,
            )
        )
    return rules


def rules_doc(rules: Sequence[AlertRule], provenance: Provenance) -> dict[str, Any]:
    return {"provenance": provenance.to_dict(), "rules": [rule.to_dict() for rule in rules]}


def _enum_by_value(enum_cls, value, where: str):
    try:
        return enum_cls(value)
    except ValueError:
        raise ArtifactError(f"{where}: unknown value {value!r}") from None


def rules_from_doc(doc: Mapping[str, Any]) -> tuple[list[AlertRule], Provenance]:
    """Rebuild rules plus their provenance from a rules.json document."""
    try:
        provenance = Provenance.from_dict(doc["provenance"])
        rules = []
        for raw in doc["rules"]:
            match = raw["match"]
            rules.append(
                AlertRule(
                    id=raw["id"],
                    match=RuleMatch(
                        category=_enum_by_value(ThreatCategory, match["category"], "rule category"),
                        breach_type=_enum_by_value(BreachType, match["breach_type"], "rule breach_type"),
                        phi_locations=frozenset(
                            _enum_by_value(PhiLocation, loc, "rule location")
                            for loc in match["phi_locations"]
                        ),
                        actors=frozenset(match["actors"]),
                    ),
                    severity=_enum_by_value(Severity, raw["severity"], "rule severity"),
                    action=_enum_by_value(Action, raw["action"], "rule action"),
                    origin_entry_id=raw["origin"]["entry_id"],
                    origin_rank=int(raw["origin"]["rank"]),
                )
            )
        return rules, provenance
    except (KeyError, TypeError) as exc:
        raise ArtifactError(f"malformed rules document: {exc!r}") from exc


@dataclass(frozen=True)
class SimEvent:
    """One synthetic tick: an attack drawn from a pattern, or benign noise.

    ``origin_entry_id`` names the threat entry an attack was drawn from; it
    is bookkeeping for feedback attribution and is not part of the CSV
    export.
    """

    tick: int
    category: ThreatCategory
    breach_type: BreachType
    phi_location: PhiLocation
    actor: str
    is_attack: bool
    impact: int
    origin_entry_id: str | None = None


def synthesize_events(
    patterns: Sequence[AttackPattern],
    seed: int,
    n: int,
    benign_fraction: float,
) -> list[SimEvent]:
    """Deterministically generate ``n`` events from the given seed.

    Attack events are drawn from the empirical pattern distribution
    (patterns weighted by incident count, locations by their observed
    multiset, impact = pattern mean impact). Benign events draw every field
    uniformly from the vocabulary and carry zero impact.
    """
    if not patterns:
        raise SimulationError("no attack patterns to simulate from")
    if n < 1:
        raise SimulationError(f"event count must be >= 1, got {n}")
    if not (0.0 <= benign_fraction <= 1.0):
        raise SimulationError(f"benign_fraction must be in [0, 1], got {benign_fraction}")

    rng = random.Random(seed)
    weights = [p.incident_count for p in patterns]
    location_choices = {
        id(p): (sorted(p.phi_locations, key=lambda loc: loc.value) or [PhiLocation.UNKNOWN])
        for p in patterns
    }
    location_weights = {
        id(p): [p.phi_locations.get(loc, 1) for loc in location_choices[id(p)]]
        for p in patterns
    }
    actor_vocab = sorted({p.actor for p in patterns})
    categories = list(ThreatCategory)
    breach_types = list(BreachType)
    locations = list(PhiLocation)

    events = []
    for tick in range(n):
        if rng.random() >= benign_fraction:
            pattern = rng.choices(patterns, weights=weights)[0]
            location = rng.choices(
                location_choices[id(pattern)], weights=location_weights[id(pattern)]
            )[0]
            events.append(
                SimEvent(
                    tick=tick,
                    category=pattern.category,
                    breach_type=pattern.breach_type,
                    phi_location=location,
                    actor=pattern.actor,
                    is_attack=True,
                    impact=pattern.total_impact // pattern.incident_count,
                    origin_entry_id=pattern.entry_id,
                )
            )
        else:
            events.append(
                SimEvent(
                    tick=tick,
                    category=rng.choice(categories),
                    breach_type=rng.choice(breach_types),
                    phi_location=rng.choice(locations),
                    actor=rng.choice(actor_vocab),
                    is_attack=False,
                    impact=0,
                )
            )
    return events


def events_csv_text(events: Sequence[SimEvent]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tick", "category", "breach_type", "location", "actor", "is_attack", "impact"])
    for event in events:
        writer.writerow(
            [
                event.tick,
                event.category.value,
                event.breach_type.value,
                event.phi_location.value,
                event.actor,
                "true" if event.is_attack else "false",
                event.impact,
            ]
        )
    return buf.getvalue()


@dataclass(frozen=True)
class EntryDetection:
    """Attack outcomes attributed to one threat entry."""

    attacks: int = 0
    detected: int = 0
    blocked: int = 0

    @property
    def missed(self) -> int:
        return self.attacks - self.detected

    @property
    def miss_rate(self) -> float:
        return self.missed / self.attacks if self.attacks else 0.0


@dataclass(frozen=True)
class DetectionReport:
    """Outcome of replaying rules against an event stream."""

    events_total: int
    attacks_total: int
    benign_total: int
    detected: int
    blocked: int
    false_alerts: int
    detection_rate: float
    false_alert_rate: float
    baseline_impact: int
    residual_impact: int
    attack_reduction: float  # impact-weighted blocked fraction
    attack_reduction_by_count: float  # plain blocked-attack fraction
    per_entry: dict[str, EntryDetection] = field(default_factory=dict)
    provenance: Provenance | None = None

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {}
        if self.provenance is not None:
            doc["provenance"] = self.provenance.to_dict()
        doc.update(
            {
                "events_total": self.events_total,
                "attacks_total": self.attacks_total,
                "benign_total": self.benign_total,
                "detected": self.detected,
                "blocked": self.blocked,
                "false_alerts": self.false_alerts,
                "detection_rate": self.detection_rate,
                "false_alert_rate": self.false_alert_rate,
                "baseline_impact": self.baseline_impact,
                "residual_impact": self.residual_impact,
                "attack_reduction": self.attack_reduction,
                "attack_reduction_by_count": self.attack_reduction_by_count,
                "per_entry": {
                    entry_id: {
                        "attacks": d.attacks,
                        "detected": d.detected,
                        "blocked": d.blocked,
                        "missed": d.missed,
                    }
                    for entry_id, d in sorted(self.per_entry.items())
                },
            }
        )
        return doc


def report_from_dict(raw: Mapping[str, Any]) -> DetectionReport:
    try:
        provenance = (
            Provenance.from_dict(raw["provenance"]) if "provenance" in raw else None
        )
        per_entry = {
            entry_id: EntryDetection(
                attacks=int(d["attacks"]), detected=int(d["detected"]), blocked=int(d["blocked"])
            )
            for entry_id, d in raw["per_entry"].items()
        }
        return DetectionReport(
            events_total=int(raw["events_total"]),
            attacks_total=int(raw["attacks_total"]),
            benign_total=int(raw["benign_total"]),
            detected=int(raw["detected"]),
            blocked=int(raw["blocked"]),
            false_alerts=int(raw["false_alerts"]),
            detection_rate=float(raw["detection_rate"]),
            false_alert_rate=float(raw["false_alert_rate"]),
            baseline_impact=int(raw["baseline_impact"]),
            residual_impact=int(raw["residual_impact"]),
            attack_reduction=float(raw["attack_reduction"]),
            attack_reduction_by_count=float(raw["attack_reduction_by_count"]),
            per_entry=per_entry,
            provenance=provenance,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed detection report: {exc!r}") from exc


def evaluate_rules(
    rules: Sequence[AlertRule],
    events: Sequence[SimEvent],
    provenance: Provenance | None = None,
) -> DetectionReport:
    """Replay events against rules and tally detection outcomes.

    An attack is detected when any rule covers its field tuple, and blocked
    when a covering rule blocks. A covered benign event is one false alert.
    Per-entry attribution uses each event's origin entry when present.
    """
    attacks_total = detected = blocked = false_alerts = 0
    baseline_impact = residual_impact = 0
    per_entry: dict[str, EntryDetection] = {}

    for event in events:
        covering = [
            rule
            for rule in rules
            if rule.match.covers(event.category, event.breach_type, event.phi_location, event.actor)
        ]
        if event.is_attack:
            attacks_total += 1
            baseline_impact += event.impact
            was_detected = bool(covering)
            was_blocked = any(rule.action is Action.ALERT_BLOCK for rule in covering)
            if was_detected:
                detected += 1
            if was_blocked:
                blocked += 1
            else:
                residual_impact += event.impact
            if event.origin_entry_id is not None:
                d = per_entry.get(event.origin_entry_id, EntryDetection())
                per_entry[event.origin_entry_id] = EntryDetection(
                    attacks=d.attacks + 1,
                    detected=d.detected + (1 if was_detected else 0),
                    blocked=d.blocked + (1 if was_blocked else 0),
                )
        elif covering:
            false_alerts += 1

    benign_total = len(events) - attacks_total
    return DetectionReport(
        events_total=len(events),
        attacks_total=attacks_total,
        benign_total=benign_total,
        detected=detected,
        blocked=blocked,
        false_alerts=false_alerts,
        detection_rate=detected / attacks_total if attacks_total else 0.0,
        false_alert_rate=false_alerts / benign_total if benign_total else 0.0,
        baseline_impact=baseline_impact,
        residual_impact=residual_impact,
        attack_reduction=(
            1.0 - residual_impact / baseline_impact if baseline_impact else 0.0
        ),
        attack_reduction_by_count=blocked / attacks_total if attacks_total else 0.0,
        per_entry=per_entry,
        provenance=provenance,
    )


@dataclass(frozen=True)
class WeightChange:
    before: float
    after: float
    miss_rate: float


@dataclass(frozen=True)
class FeedbackDelta:
    """Record of one feedback round: which weights moved and why."""

    version_before: int
    version_after: int
    changes: dict[str, WeightChange]
    provenance: Provenance | None = None

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {}
        if self.provenance is not None:
            doc["provenance"] = self.provenance.to_dict()
        doc.update(
            {
                "version_before": self.version_before,
                "version_after": self.version_after,
                "changes": {
                    entry_id: {
                        "before": change.before,
                        "after": change.after,
                        "miss_rate": change.miss_rate,
                    }
                    for entry_id, change in sorted(self.changes.items())
                },
            }
        )
        return doc


def feedback_update(
    library: ThreatLibrary,
    report: DetectionReport,
    pipeline_result: PipelineResult,
) -> tuple[ThreatLibrary, FeedbackDelta]:
    """Reweight missed entries by (1 + miss rate) in one library version bump.

    Refuses reports whose provenance does not match the pipeline result, so
    results from a different snapshot or library version can never be fed
    back.
    """
    if report.provenance is None:
        raise ProvenanceError("detection report carries no provenance; refusing feedback")
    expected = pipeline_result.provenance
    got = report.provenance
    if (got.snapshot_sha256, got.library_version) != (
        expected.snapshot_sha256,
        expected.library_version,
    ):
        raise ProvenanceError(
            "detection report provenance does not match the pipeline result "
            f"(report {got.snapshot_sha256[:12]}…/v{got.library_version}, "
            f"expected {expected.snapshot_sha256[:12]}…/v{expected.library_version})"
        )
    if library.version != expected.library_version:
        raise ProvenanceError(
            f"library is at version {library.version} but the pipeline result "
            f"was produced at version {expected.library_version}"
        )

    deltas: dict[str, float] = {}
    changes: dict[str, WeightChange] = {}
    for entry_id in sorted(report.per_entry):
        detection = report.per_entry[entry_id]
        if detection.missed <= 0:
            continue
        weight = library.entry(entry_id).likelihood_weight
        delta = weight * detection.miss_rate  # weight * (1 + miss_rate) as a delta
        deltas[entry_id] = delta
        changes[entry_id] = WeightChange(
            before=weight, after=weight + delta, miss_rate=detection.miss_rate
        )

    reason = (
        f"feedback from detection report (seed={got.seed}): "
        f"reweighted {len(deltas)} of {len(report.per_entry)} entries"
    )
    updated = apply_update(library, AdjustWeights(deltas=deltas), reason)
    delta_record = FeedbackDelta(
        version_before=library.version,
        version_after=updated.version,
        changes=changes,
        provenance=got,
    )
    return updated, delta_record
