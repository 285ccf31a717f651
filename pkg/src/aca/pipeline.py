"""Four-stage attacker-centric pipeline over breach records.

Input stage: profile the threat actors named in the library. Processing
stage: match records against known attack groupings. Filter stage: select
attack patterns by where PHI lived. Output stage: an immutable
:class:`PipelineResult` stamped with provenance, consumed by risk scoring
and the alert engine.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, Union

from .errors import ArtifactError, FilterError
from .ingest import BreachRecord, BreachType, PhiLocation, normalize_phi_location
from .library import (
    DEFAULT_MAPPING_TABLE,
    ThreatCategory,
    ThreatLibrary,
    map_breach_to_threat,
)
from .provenance import Provenance, records_checksum

MOTIVATIONS = ("financial", "espionage", "disruption", "negligence", "environmental")

# Actor → motivation tag. Overridable per call; actors not listed default to
# negligence (the weakest claim about intent).
DEFAULT_MOTIVATIONS: dict[str, str] = {
    "Cybercriminals": "financial",
    "Hackers": "financial",
    "Thieves": "financial",
    "State actors": "espionage",
    "Competitors": "espionage",
    "Vandalists": "disruption",
    "Intruders": "disruption",
    "Trespassers": "disruption",
    "Employees": "negligence",
    "Insiders": "negligence",
    "Contractors": "negligence",
    "Business Associates": "negligence",
    "Supply Chain Issues": "negligence",
    "Utility Providers": "negligence",
    "Natural conditions": "environmental",
}


@dataclass(frozen=True)
class ActorProfile:
    """One threat actor: where they sit in the taxonomy and what they have done."""

    actor: str
    categories: frozenset[ThreatCategory]
    motivation: str
    tactics: tuple[BreachType, ...]  # breach types observed for this actor

    def to_dict(self) -> dict[str, Any]:
        return {
            "actor": self.actor,
            "categories": sorted(c.value for c in self.categories),
            "motivation": self.motivation,
            "tactics": [bt.value for bt in self.tactics],
        }


@dataclass(frozen=True)
class AttackPattern:
    """Aggregated evidence for one (threat entry, breach type, actor) combination.

    ``phi_locations`` is a multiset: every location mention across the
    grouped records, with multiplicity.
    """

    entry_id: str
    actor: str
    category: ThreatCategory
    breach_type: BreachType
    phi_locations: dict[PhiLocation, int]
    incident_count: int
    total_impact: int
    first_seen: int
    last_seen: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "entry_id": self.entry_id,
            "actor": self.actor,
            "category": self.category.value,
            "breach_type": self.breach_type.value,
            "phi_locations": {
                loc.value: n
                for loc, n in sorted(self.phi_locations.items(), key=lambda kv: kv[0].value)
            },
            "incident_count": self.incident_count,
            "total_impact": self.total_impact,
            "first_seen": self.first_seen,
            "last_seen": self.last_seen,
        }


@dataclass(frozen=True)
class PipelineResult:
    """Everything the downstream stages need, stamped with its inputs."""

    profiles: tuple[ActorProfile, ...]
    patterns: tuple[AttackPattern, ...]
    unclassified_count: int
    provenance: Provenance
    filter_spec: str  # "all" or comma-joined location labels

    def classified_count(self) -> int:
        """Incident count summed over distinct groups (actor expansion undone)."""
        groups = {(p.entry_id, p.breach_type): p.incident_count for p in self.patterns}
        return sum(groups.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "provenance": self.provenance.to_dict(),
            "filter": self.filter_spec,
            "unclassified_count": self.unclassified_count,
            "profiles": [p.to_dict() for p in self.profiles],
            "patterns": [p.to_dict() for p in self.patterns],
        }


def profile_actors(
    library: ThreatLibrary,
    records: Sequence[BreachRecord],
    motivations: Mapping[str, str] = DEFAULT_MOTIVATIONS,
    table: Mapping[BreachType, tuple[ThreatCategory, str]] = DEFAULT_MAPPING_TABLE,
) -> list[ActorProfile]:
    """One profile per distinct actor string in the library.

    Tactics are the primary breach types of records whose mapping lands on
    an entry listing the actor; empty record lists give empty tactics.
    """
    tactics_by_entry: dict[str, set[BreachType]] = {}
    for record in records:
        mapping = map_breach_to_threat(record, library, table)
        if mapping.is_classified:
            tactics_by_entry.setdefault(mapping.entry_id, set()).add(record.primary_breach_type)

    profiles = []
    for actor in library.actors():
        categories = set()
        tactics: set[BreachType] = set()
        for entry in library.entries:
            if actor in entry.actors:
                categories.add(entry.category)
                tactics |= tactics_by_entry.get(entry.id, set())
        profiles.append(
            ActorProfile(
                actor=actor,
                categories=frozenset(categories),
                motivation=motivations.get(actor, "negligence"),
                tactics=tuple(sorted(tactics, key=lambda bt: bt.value)),
            )
        )
    return profiles


def _pattern_sort_key(pattern: AttackPattern) -> tuple:
    return (-pattern.incident_count, pattern.entry_id, pattern.breach_type.value, pattern.actor)


def match_known_attacks(
    profiles: Sequence[ActorProfile],
    records: Sequence[BreachRecord],
    library: ThreatLibrary,
    table: Mapping[BreachType, tuple[ThreatCategory, str]] = DEFAULT_MAPPING_TABLE,
) -> list[AttackPattern]:
    """Group classified records by (entry, breach type), one pattern per actor.

    Counts, impacts, location multisets, and year spans aggregate per group;
    the per-actor expansion copies the group aggregates onto each actor the
    entry names.
    """
    groups: dict[tuple[str, BreachType], dict[str, Any]] = {}
    for record in records:
        mapping = map_breach_to_threat(record, library, table)
        if not mapping.is_classified:
            continue
        key = (mapping.entry_id, record.primary_breach_type)
        group = groups.setdefault(
            key,
            {"count": 0, "impact": 0, "locations": Counter(), "first": None, "last": None},
        )
        group["count"] += 1
        if record.individuals_affected is not None:
            group["impact"] += record.individuals_affected
        group["locations"].update(record.locations)
        year = record.submission_year
        group["first"] = year if group["first"] is None else min(group["first"], year)
        group["last"] = year if group["last"] is None else max(group["last"], year)

    patterns = []
    for (entry_id, breach_type), group in groups.items():
        entry = library.entry(entry_id)
        for actor in entry.actors:
            patterns.append(
                AttackPattern(
                    entry_id=entry_id,
                    actor=actor,
                    category=entry.category,
                    breach_type=breach_type,
                    phi_locations=dict(group["locations"]),
                    incident_count=group["count"],
                    total_impact=group["impact"],
                    first_seen=group["first"],
                    last_seen=group["last"],
                )
            )
    patterns.sort(key=_pattern_sort_key)
    return patterns


FilterSpec = Union[str, set[PhiLocation], frozenset[PhiLocation]]


def parse_filter_spec(text: str) -> FilterSpec:
    """Parse a CLI filter argument: "all" or a comma list of location labels."""
    if text.strip().lower() == "all":
        return "all"
    locations = set()
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        location = normalize_phi_location(token)
        if location is PhiLocation.UNKNOWN and token.lower() != "unknown":
            raise FilterError(f"unknown PHI location {token!r}")
        locations.add(location)
    if not locations:
        raise FilterError("empty filter; pass 'all' to keep every pattern")
    return locations


def filter_spec_label(filter_spec: FilterSpec) -> str:
    """Canonical string form of a filter spec, for provenance and artifacts."""
    if isinstance(filter_spec, str):
        return "all"
    return ",".join(sorted(loc.value for loc in filter_spec))


def phi_filter(patterns: Sequence[AttackPattern], filter_spec: FilterSpec) -> list[AttackPattern]:
    """Retain patterns whose PHI locations intersect the filter.

    The string "all" is the identity filter. An empty location set is
    rejected as ambiguous: dropping everything is never what a caller wants
    silently. Filtering selects patterns whole; it never rescales counts.
    """
    if isinstance(filter_spec, str):
        if filter_spec != "all":
            raise FilterError(f"filter must be a location set or 'all', got {filter_spec!r}")
        return list(patterns)
    if not filter_spec:
        raise FilterError("empty filter set is ambiguous; pass 'all' explicitly")
    return [p for p in patterns if any(loc in filter_spec for loc in p.phi_locations)]


def run_pipeline(
    records: Sequence[BreachRecord],
    library: ThreatLibrary,
    filter_spec: FilterSpec = "all",
    motivations: Mapping[str, str] = DEFAULT_MOTIVATIONS,
    table: Mapping[BreachType, tuple[ThreatCategory, str]] = DEFAULT_MAPPING_TABLE,
) -> PipelineResult:
    """Compose the profile, match, and filter stages and stamp provenance."""
    profiles = profile_actors(library, records, motivations, table)
    patterns = phi_filter(match_known_attacks(profiles, records, library, table), filter_spec)
    unclassified = sum(
        1 for r in records if not map_breach_to_threat(r, library, table).is_classified
    )
    return PipelineResult(
        profiles=tuple(profiles),
        patterns=tuple(patterns),
        unclassified_count=unclassified,
        provenance=Provenance(
            snapshot_sha256=records_checksum(records), library_version=library.version
        ),
        filter_spec=filter_spec_label(filter_spec),
    )


def _enum_by_value(enum_cls, value, where: str):
    try:
        return enum_cls(value)
    except ValueError:
        raise ArtifactError(f"{where}: unknown value {value!r}") from None


def result_from_dict(raw: Mapping[str, Any]) -> PipelineResult:
    """Rebuild a PipelineResult from its JSON document."""
    try:
        provenance = Provenance.from_dict(raw["provenance"])
        profiles = tuple(
            ActorProfile(
                actor=p["actor"],
                categories=frozenset(
                    _enum_by_value(ThreatCategory, c, "profile category") for c in p["categories"]
                ),
                motivation=p["motivation"],
                tactics=tuple(
                    _enum_by_value(BreachType, t, "profile tactic") for t in p["tactics"]
                ),
            )
            for p in raw["profiles"]
        )
        patterns = tuple(
            AttackPattern(
                entry_id=p["entry_id"],
                actor=p["actor"],
                category=_enum_by_value(ThreatCategory, p["category"], "pattern category"),
                breach_type=_enum_by_value(BreachType, p["breach_type"], "pattern breach_type"),
                phi_locations={
                    _enum_by_value(PhiLocation, loc, "pattern location"): int(n)
                    for loc, n in p["phi_locations"].items()
                },
                incident_count=int(p["incident_count"]),
                total_impact=int(p["total_impact"]),
                first_seen=int(p["first_seen"]),
                last_seen=int(p["last_seen"]),
            )
            for p in raw["patterns"]
        )
        return PipelineResult(
            profiles=profiles,
            patterns=patterns,
            unclassified_count=int(raw["unclassified_count"]),
            provenance=provenance,
            filter_spec=raw["filter"],
        )
    except (KeyError, TypeError) as exc:
        raise ArtifactError(f"malformed pipeline result: {exc!r}") from exc


def save_result(result: PipelineResult, path: Union[str, Path]) -> None:
    Path(path).write_text(
        json.dumps(result.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def load_result(path: Union[str, Path]) -> PipelineResult:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ArtifactError(f"cannot read pipeline result {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"pipeline result {path} is not valid JSON: {exc}") from exc
    return result_from_dict(raw)
