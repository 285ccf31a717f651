"""Versioned threat library and the breach-record-to-threat mapping.

The library is a small taxonomy: nine seed threat entries across four
categories (Physical, Third Party, External, Internal), each with a
description, the actors known to drive it, and a likelihood weight that the
feedback loop adjusts over time. Libraries are immutable values; every
mutation returns a new library with the version bumped and the reason
appended to the changelog.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence, Union

from .errors import LibraryError, LibraryFormatError, LibraryVersionError, UnknownEntryError
from .ingest import BreachRecord, BreachType


class ThreatCategory(str, Enum):
    """Top-level threat grouping; a default library has exactly these four."""

    PHYSICAL = "Physical"
    THIRD_PARTY = "ThirdParty"
    EXTERNAL = "External"
    INTERNAL = "Internal"


@dataclass(frozen=True)
class ThreatEntry:
    """One threat type: what it is, who drives it, and how likely we weight it."""

    id: str
    category: ThreatCategory
    threat_type: str
    description: str
    actors: tuple[str, ...]
    likelihood_weight: float = 1.0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "category": self.category.value,
            "threat_type": self.threat_type,
            "description": self.description,
            "actors": list(self.actors),
            "likelihood_weight": self.likelihood_weight,
        }


@dataclass(frozen=True)
class ThreatLibrary:
    """A versioned set of threat entries with a changelog.

    ``version`` strictly increases on every mutation via
    :func:`apply_update`; ``changelog`` holds (version, description) pairs in
    application order.
    """

    version: int
    created: str
    entries: tuple[ThreatEntry, ...]
    changelog: tuple[tuple[int, str], ...] = ()

    def entry(self, entry_id: str) -> ThreatEntry:
        for entry in self.entries:
            if entry.id == entry_id:
                return entry
        raise UnknownEntryError(f"no threat entry with id {entry_id!r}")

    def has_entry(self, entry_id: str) -> bool:
        return any(entry.id == entry_id for entry in self.entries)

    def entry_ids(self) -> list[str]:
        return [entry.id for entry in self.entries]

    def actors(self) -> list[str]:
        """Distinct actor strings across all entries, in first-seen order."""
        seen: dict[str, None] = {}
        for entry in self.entries:
            for actor in entry.actors:
                seen.setdefault(actor)
        return list(seen)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "created": self.created,
            "entries": [entry.to_dict() for entry in self.entries],
            "changelog": [
                {"version": v, "description": text} for v, text in self.changelog
            ],
        }


DEFAULT_CREATED = "2024-01-01T00:00:00Z"

_DEFAULT_ENTRIES = (
    ThreatEntry(
        id="natural-disasters",
        category=ThreatCategory.PHYSICAL,
        threat_type="Natural Disasters",
        description="Events like floods, fires, etc., that disrupt healthcare systems",
        actors=("Natural conditions",),
    ),
    ThreatEntry(
        id="unauthorized-access",
        category=ThreatCategory.PHYSICAL,
        threat_type="Unauthorized Access",
        description="Physical breach allowing unauthorized entry to secure areas",
        actors=("Intruders", "Trespassers"),
    ),
    ThreatEntry(
        id="theft-or-vandalism",
        category=ThreatCategory.PHYSICAL,
        threat_type="Theft or Vandalism",
        description="Theft of physical devices or data, or vandalism disrupting operations",
        actors=("Thieves", "Vandalists"),
    ),
    ThreatEntry(
        id="supply-chain-disruptions",
        category=ThreatCategory.THIRD_PARTY,
        threat_type="Supply Chain Disruptions",
        description="Interruptions in third-party services affecting healthcare system operations",
        actors=("Business Associates", "Supply Chain Issues"),
    ),
    ThreatEntry(
        id="utility-failures",
        category=ThreatCategory.THIRD_PARTY,
        threat_type="Utility Failures",
        description="Disruption of essential services like electricity or telecom",
        actors=("Utility Providers",),
    ),
    ThreatEntry(
        id="hacking-it-incident",
        category=ThreatCategory.EXTERNAL,
        threat_type="Hacking/IT Incident",
        description="Cyberattacks targeting digital healthcare systems, such as ransomware",
        actors=("Cybercriminals", "Hackers"),
    ),
    ThreatEntry(
        id="espionage",
        category=ThreatCategory.EXTERNAL,
        threat_type="Espionage",
        description="Covert efforts to gather sensitive healthcare information",
        actors=("State actors", "Competitors"),
    ),
    ThreatEntry(
        id="unauthorized-access-disclosure",
        category=ThreatCategory.INTERNAL,
        threat_type="Unauthorized Access/Disclosure",
        description="Internal actors gaining unauthorized access to confidential healthcare information",
        actors=("Employees", "Insiders"),
    ),
    ThreatEntry(
        id="insider-threats",
        category=ThreatCategory.INTERNAL,
        threat_type="Insider Threats",
        description="Malicious or unintentional actions by employees affecting data security",
        actors=("Contractors", "Employees"),
    ),
)


def default_library() -> ThreatLibrary:
    """The nine seed threat entries, version 1, all weights 1."""
    return ThreatLibrary(version=1, created=DEFAULT_CREATED, entries=_DEFAULT_ENTRIES)


def canonical_json(library: ThreatLibrary) -> str:
    """Byte-stable serialization used for golden comparisons and persistence."""
    return json.dumps(library.to_dict(), indent=2, ensure_ascii=False) + "\n"


def _require(condition: bool, field: str, problem: str) -> None:
    if not condition:
        raise LibraryFormatError(f"library field {field!r}: {problem}")


def library_from_dict(raw: Mapping) -> ThreatLibrary:
    """Validate and build a library from parsed JSON, naming the bad field on error."""
    _require(isinstance(raw, Mapping), "<root>", "expected a JSON object")
    for required in ("version", "created", "entries", "changelog"):
        _require(required in raw, required, "missing")
    _require(isinstance(raw["version"], int) and raw["version"] >= 1, "version", "must be a positive integer")
    _require(isinstance(raw["created"], str), "created", "must be a string timestamp")
    _require(isinstance(raw["entries"], list), "entries", "must be a list")

    entries = []
    seen_ids: set[str] = set()
    categories = {c.value: c for c in ThreatCategory}
    for i, item in enumerate(raw["entries"]):
        where = f"entries[{i}]"
        _require(isinstance(item, Mapping), where, "must be an object")
        for required in ("id", "category", "threat_type", "description", "actors", "likelihood_weight"):
            _require(required in item, f"{where}.{required}", "missing")
        entry_id = item["id"]
        _require(isinstance(entry_id, str) and bool(entry_id), f"{where}.id", "must be a non-empty string")
        _require(entry_id not in seen_ids, f"{where}.id", f"duplicate id {entry_id!r}")
        seen_ids.add(entry_id)
        _require(item["category"] in categories, f"{where}.category", f"unknown category {item['category']!r}")
        _require(isinstance(item["threat_type"], str), f"{where}.threat_type", "must be a string")
        _require(isinstance(item["description"], str), f"{where}.description", "must be a string")
        actors = item["actors"]
        _require(
            isinstance(actors, list) and len(actors) > 0 and all(isinstance(a, str) for a in actors),
            f"{where}.actors",
            "must be a non-empty list of strings",
        )
        weight = item["likelihood_weight"]
        _require(
            isinstance(weight, (int, float)) and not isinstance(weight, bool) and weight >= 0,
            f"{where}.likelihood_weight",
            "must be a non-negative number",
        )
        entries.append(
            ThreatEntry(
                id=entry_id,
                category=categories[item["category"]],
                threat_type=item["threat_type"],
                description=item["description"],
                actors=tuple(actors),
                likelihood_weight=float(weight),
            )
        )

    _require(isinstance(raw["changelog"], list), "changelog", "must be a list")
    changelog = []
    for i, item in enumerate(raw["changelog"]):
        where = f"changelog[{i}]"
        _require(isinstance(item, Mapping), where, "must be an object")
        _require(isinstance(item.get("version"), int), f"{where}.version", "must be an integer")
        _require(isinstance(item.get("description"), str), f"{where}.description", "must be a string")
        changelog.append((item["version"], item["description"]))

    return ThreatLibrary(
        version=raw["version"],
        created=raw["created"],
        entries=tuple(entries),
        changelog=tuple(changelog),
    )


def load_library(path: Union[str, Path]) -> ThreatLibrary:
    """Load and validate a library JSON file."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise LibraryError(f"cannot read library {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LibraryFormatError(f"library {path} is not valid JSON: {exc}") from exc
    return library_from_dict(raw)


def save_library(library: ThreatLibrary, path: Union[str, Path]) -> None:
    """Write the canonical serialization, refusing to clobber a newer version."""
    target = Path(path)
    if target.exists():
        try:
            existing = json.loads(target.read_text(encoding="utf-8"))
            existing_version = existing.get("version")
        except (OSError, json.JSONDecodeError, AttributeError):
            existing_version = None
        if isinstance(existing_version, int) and existing_version > library.version:
            raise LibraryVersionError(
                f"refusing to overwrite {path} at version {existing_version} "
                f"with older version {library.version}"
            )
    target.write_text(canonical_json(library), encoding="utf-8")


@dataclass(frozen=True)
class AddEntry:
    """Library change: add one new entry under a fresh id."""

    entry: ThreatEntry


@dataclass(frozen=True)
class ModifyEntry:
    """Library change: replace fields of an existing entry (None = keep)."""

    entry_id: str
    category: ThreatCategory | None = None
    threat_type: str | None = None
    description: str | None = None
    actors: tuple[str, ...] | None = None
    likelihood_weight: float | None = None


@dataclass(frozen=True)
class AdjustWeights:
    """Library change: add deltas to the likelihood weights of named entries."""

    deltas: Mapping[str, float]


LibraryChange = Union[AddEntry, ModifyEntry, AdjustWeights]


def apply_update(library: ThreatLibrary, change: LibraryChange, reason: str) -> ThreatLibrary:
    """Apply one change, bump the version, and append ``reason`` to the changelog.

    Weights that would go negative are clamped to 0 and the clamp is noted in
    the changelog entry. Unknown entry ids raise without touching the
    library.
    """
    if isinstance(change, AddEntry):
        if library.has_entry(change.entry.id):
            raise LibraryError(f"entry id {change.entry.id!r} already exists")
        if change.entry.likelihood_weight < 0:
            raise LibraryError("new entries must have a non-negative likelihood_weight")
        new_entries = library.entries + (change.entry,)
        note = reason
    elif isinstance(change, ModifyEntry):
        current = library.entry(change.entry_id)  # raises UnknownEntryError
        updates = {
            name: value
            for name, value in (
                ("category", change.category),
                ("threat_type", change.threat_type),
                ("description", change.description),
                ("actors", change.actors),
                ("likelihood_weight", change.likelihood_weight),
            )
            if value is not None
        }
        modified = replace(current, **updates)
        if modified.likelihood_weight < 0:
            modified = replace(modified, likelihood_weight=0.0)
            note = f"{reason} (weight clamped to 0 for {change.entry_id})"
        else:
            note = reason
        new_entries = tuple(
            modified if entry.id == change.entry_id else entry for entry in library.entries
        )
    elif isinstance(change, AdjustWeights):
        for entry_id in change.deltas:
            library.entry(entry_id)  # raises UnknownEntryError
        clamped = []
        new_entries = []
        for entry in library.entries:
            if entry.id in change.deltas:
                new_weight = entry.likelihood_weight + change.deltas[entry.id]
                if new_weight < 0:
                    new_weight = 0.0
                    clamped.append(entry.id)
                entry = replace(entry, likelihood_weight=new_weight)
            new_entries.append(entry)
        new_entries = tuple(new_entries)
        note = reason
        if clamped:
            note = f"{reason} (weight clamped to 0 for {', '.join(clamped)})"
    else:
        raise LibraryError(f"unsupported change type {type(change).__name__}")

    new_version = library.version + 1
    return ThreatLibrary(
        version=new_version,
        created=library.created,
        entries=new_entries,
        changelog=library.changelog + ((new_version, note),),
    )


UNCLASSIFIED_ID = "unclassified"


@dataclass(frozen=True)
class ThreatMapping:
    """Where one breach record lands in the library.

    ``category`` is None only for the unclassified bucket. ``ba_override``
    marks records pushed into ThirdParty by the business-associate flag; the
    base entry id is retained as secondary evidence.
    """

    category: ThreatCategory | None
    entry_id: str
    ba_override: bool = False

    @property
    def is_classified(self) -> bool:
        return self.entry_id != UNCLASSIFIED_ID


# Primary breach type → (category, entry id). Other/Unknown intentionally
# absent: they land in the unclassified bucket.
DEFAULT_MAPPING_TABLE: dict[BreachType, tuple[ThreatCategory, str]] = {
    BreachType.HACKING_IT_INCIDENT: (ThreatCategory.EXTERNAL, "hacking-it-incident"),
    BreachType.THEFT: (ThreatCategory.PHYSICAL, "theft-or-vandalism"),
    BreachType.LOSS: (ThreatCategory.PHYSICAL, "theft-or-vandalism"),
    BreachType.IMPROPER_DISPOSAL: (ThreatCategory.INTERNAL, "insider-threats"),
    BreachType.UNAUTHORIZED_ACCESS_DISCLOSURE: (
        ThreatCategory.INTERNAL,
        "unauthorized-access-disclosure",
    ),
}

MAPPING_INTERPRETATION_NOTE = (
    "records typed Unauthorized Access/Disclosure map to the Internal "
    "category (the library's physical Unauthorized Access entry covers "
    "facility intrusion, which the dataset does not distinguish)"
)


def load_mapping_table(path: Union[str, Path]) -> dict[BreachType, tuple[ThreatCategory, str]]:
    """Load a mapping-table JSON file: breach type → {category, entry_id}."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise LibraryFormatError(f"cannot read mapping table {path}: {exc}") from exc
    _require(isinstance(raw, Mapping), "<mapping root>", "expected a JSON object")
    types = {bt.value: bt for bt in BreachType}
    categories = {c.value: c for c in ThreatCategory}
    table: dict[BreachType, tuple[ThreatCategory, str]] = {}
    for type_name, target in raw.items():
        _require(type_name in types, f"mapping[{type_name!r}]", "unknown breach type")
        _require(isinstance(target, Mapping), f"mapping[{type_name!r}]", "must be an object")
        _require("category" in target and "entry_id" in target, f"mapping[{type_name!r}]", "needs category and entry_id")
        _require(target["category"] in categories, f"mapping[{type_name!r}].category", f"unknown category {target['category']!r}")
        _require(isinstance(target["entry_id"], str), f"mapping[{type_name!r}].entry_id", "must be a string")
        table[types[type_name]] = (categories[target["category"]], target["entry_id"])
    return table


def map_breach_to_threat(
    record: BreachRecord,
    library: ThreatLibrary,
    table: Mapping[BreachType, tuple[ThreatCategory, str]] = DEFAULT_MAPPING_TABLE,
) -> ThreatMapping:
    """Map one record to its threat entry by primary breach type.

    The business-associate flag overrides the category to ThirdParty while
    keeping the entry id. Types absent from the table (Other, Unknown) go to
    the unclassified bucket. Depends only on the primary breach type and the
    BA flag.
    """
    target = table.get(record.primary_breach_type)
    if target is None:
        return ThreatMapping(category=None, entry_id=UNCLASSIFIED_ID)
    category, entry_id = target
    if not library.has_entry(entry_id):
        raise UnknownEntryError(
            f"mapping targets entry {entry_id!r} which is not in the library"
        )
    if record.business_associate_present:
        return ThreatMapping(category=ThreatCategory.THIRD_PARTY, entry_id=entry_id, ba_override=True)
    return ThreatMapping(category=category, entry_id=entry_id)
