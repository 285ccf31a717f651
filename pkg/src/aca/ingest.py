"""Parse and normalize HHS OCR breach-portal CSV exports.

The breach portal publishes one row per reported incident. Cells are messy:
multi-valued breach types and PHI locations packed into one field, dates in
``M/D/YYYY`` form, blank or garbled impact counts, and occasional stray
punctuation. This module turns that export into validated
:class:`BreachRecord` values plus a :class:`ParseIssue` list that accounts
for every row we could not keep and every value we had to repair.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date, datetime
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator, Union

from .errors import IngestError


class EntityType(str, Enum):
    """HIPAA covered-entity classification of the reporting organization."""

    HEALTHCARE_PROVIDER = "Healthcare Provider"
    HEALTH_PLAN = "Health Plan"
    BUSINESS_ASSOCIATE = "Business Associate"
    HEALTHCARE_CLEARINGHOUSE = "Healthcare Clearinghouse"
    UNKNOWN = "Unknown"


class BreachType(str, Enum):
    """How the breach happened, in the portal's vocabulary."""

    HACKING_IT_INCIDENT = "Hacking/IT Incident"
    IMPROPER_DISPOSAL = "Improper Disposal"
    LOSS = "Loss"
    THEFT = "Theft"
    UNAUTHORIZED_ACCESS_DISCLOSURE = "Unauthorized Access/Disclosure"
    OTHER = "Other"
    UNKNOWN = "Unknown"


class PhiLocation(str, Enum):
    """Where the breached PHI lived (the portal's "Location of Breached Information")."""

    NETWORK_SERVER = "Network Server"
    EMAIL = "Email"
    ELECTRONIC_MEDICAL_RECORD = "Electronic Medical Record"
    LAPTOP = "Laptop"
    DESKTOP_COMPUTER = "Desktop Computer"
    OTHER_PORTABLE_DEVICE = "Other Portable Electronic Device"
    PAPER_FILMS = "Paper/Films"
    OTHER = "Other"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class BreachRecord:
    """One normalized incident row.

    ``breach_types`` is never empty; its first element is the primary
    attribution used by frequency counts. ``individuals_affected`` is None
    when the source cell was blank or unusable (such rows still count for
    frequencies but are excluded from impact sums). ``source_row`` is the
    1-based row in the source CSV, counting the header as row 1 and ignoring
    leading ``#`` comment lines.
    """

    entity_name: str
    state: str
    entity_type: EntityType
    individuals_affected: int | None
    submission_date: date
    breach_types: tuple[BreachType, ...]
    locations: tuple[PhiLocation, ...]
    business_associate_present: bool
    web_description: str
    source_row: int

    @property
    def primary_breach_type(self) -> BreachType:
        return self.breach_types[0]

    @property
    def submission_year(self) -> int:
        return self.submission_date.year


@dataclass(frozen=True)
class ParseIssue:
    """One problem found while parsing; ``reject`` issues mean the row was dropped."""

    source_row: int
    column: str
    raw_value: str
    severity: str  # "warning" | "reject"
    message: str


REQUIRED_COLUMNS = (
    "Name of Covered Entity",
    "State",
    "Covered Entity Type",
    "Individuals Affected",
    "Breach Submission Date",
    "Type of Breach",
    "Location of Breached Information",
    "Business Associate Present",
    "Web Description",
)

MIN_SUBMISSION_DATE = date(1900, 1, 1)

# Tokens that may not be split on internal punctuation when a cell packs
# several values into one field.
_PROTECTED_TOKENS = ("Hacking/IT Incident",)


def _fold(raw: str) -> str:
    """Fold a label for alias lookup: lowercase, alphanumerics only."""
    return "".join(ch for ch in raw.lower() if ch.isalnum())


_ENTITY_ALIASES = {
    _fold(member.value): member
    for member in EntityType
}
_ENTITY_ALIASES.update(
    {
        "healthcareclearinghouse": EntityType.HEALTHCARE_CLEARINGHOUSE,  # covers "Clearing House"
        "healthcareproviders": EntityType.HEALTHCARE_PROVIDER,
        "healthplans": EntityType.HEALTH_PLAN,
        "businessassociates": EntityType.BUSINESS_ASSOCIATE,
    }
)

_BREACH_TYPE_ALIASES = {
    _fold(member.value): member
    for member in BreachType
}
_BREACH_TYPE_ALIASES.update(
    {
        "hackingitincidents": BreachType.HACKING_IT_INCIDENT,
        "unauthorizedaccessordisclosure": BreachType.UNAUTHORIZED_ACCESS_DISCLOSURE,
    }
)

_LOCATION_ALIASES = {
    _fold(member.value): member
    for member in PhiLocation
}
_LOCATION_ALIASES.update(
    {
        "emailaccount": PhiLocation.EMAIL,
        "emails": PhiLocation.EMAIL,
        "electronicmedicalrecords": PhiLocation.ELECTRONIC_MEDICAL_RECORD,
        "emr": PhiLocation.ELECTRONIC_MEDICAL_RECORD,
        "laptops": PhiLocation.LAPTOP,
        "desktop": PhiLocation.DESKTOP_COMPUTER,
        "otherportabledevice": PhiLocation.OTHER_PORTABLE_DEVICE,
        "paper": PhiLocation.PAPER_FILMS,
        "paperfilm": PhiLocation.PAPER_FILMS,
        "networkservers": PhiLocation.NETWORK_SERVER,
    }
)

_TRUE_TOKENS = {"yes", "y", "true", "1"}
_FALSE_TOKENS = {"no", "n", "false", "0", ""}


def normalize_entity_type(raw: str) -> EntityType:
    """Map raw covered-entity text to an :class:`EntityType` (Unknown fallback)."""
    return _ENTITY_ALIASES.get(_fold(raw), EntityType.UNKNOWN)


def normalize_breach_type(raw_token: str) -> BreachType:
    """Map one breach-type token to a :class:`BreachType` (Unknown fallback)."""
    return _BREACH_TYPE_ALIASES.get(_fold(raw_token), BreachType.UNKNOWN)


def normalize_phi_location(raw_token: str) -> PhiLocation:
    """Map one PHI-location token to a :class:`PhiLocation` (Unknown fallback)."""
    return _LOCATION_ALIASES.get(_fold(raw_token), PhiLocation.UNKNOWN)


def split_multivalue(raw: str) -> list[str]:
    """Split a packed multi-value cell on commas, protecting known compound tokens.

    Tokens are trimmed and empty tokens dropped; order is preserved.
    """
    masked = raw
    sentinels: dict[str, str] = {}
    for i, token in enumerate(_PROTECTED_TOKENS):
        sentinel = f"\x00{i}\x00"
        sentinels[sentinel] = token
        masked = masked.replace(token, sentinel)
    parts = []
    for piece in masked.split(","):
        piece = piece.strip()
        for sentinel, token in sentinels.items():
            piece = piece.replace(sentinel, token)
        if piece:
            parts.append(piece)
    return parts


def _parse_submission_date(raw: str) -> date | None:
    for fmt in ("%m/%d/%Y", "%Y-%m-%d"):
        try:
            return datetime.strptime(raw.strip(), fmt).date()
        except ValueError:
            continue
    return None


def _strip_leading_comments(lines: Iterable[str]) -> Iterator[str]:
    # Comment lines ('#' first) are only recognized before the header so that
    # quoted fields spanning lines can never be corrupted mid-file.
    at_start = True
    for line in lines:
        if at_start and line.lstrip().startswith("#"):
            continue
        at_start = False
        yield line


def parse_breach_csv(
    source: Union[str, IO[str], Iterable[str]],
) -> tuple[list[BreachRecord], list[ParseIssue]]:
    """Parse a breach-portal CSV export into records plus issues.

    Every data row yields exactly one record or one ``reject`` issue;
    ``warning`` issues repair values without dropping the row. Raises
    :class:`IngestError` when the file is empty or required header columns
    are missing.
    """
    if isinstance(source, str):
        source = io.StringIO(source)

    reader = csv.reader(_strip_leading_comments(source))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty input: no header row found") from None

    header = [h.strip().lstrip("﻿") for h in header]
    missing = [col for col in REQUIRED_COLUMNS if col not in header]
    if missing:
        raise IngestError(f"missing required columns: {', '.join(missing)}")
    col = {name: header.index(name) for name in REQUIRED_COLUMNS}

    records: list[BreachRecord] = []
    issues: list[ParseIssue] = []
    row_no = 1  # header row
    for row in reader:
        row_no += 1
        if not row:
            continue  # blank line, not a data row

        if len(row) > len(header):
            issues.append(
                ParseIssue(
                    source_row=row_no,
                    column="",
                    raw_value="",
                    severity="reject",
                    message=f"row has {len(row)} fields, expected {len(header)}",
                )
            )
            continue
        row_issues: list[ParseIssue] = []
        if len(row) < len(header):
            row_issues.append(
                ParseIssue(
                    source_row=row_no,
                    column="",
                    raw_value="",
                    severity="warning",
                    message=f"row has {len(row)} fields, expected {len(header)}; "
                    "missing cells treated as empty",
                )
            )
            row = row + [""] * (len(header) - len(row))

        def cell(name: str) -> str:
            return row[col[name]]

        raw_date = cell("Breach Submission Date")
        submitted = _parse_submission_date(raw_date)
        if submitted is None:
            issues.append(
                ParseIssue(
                    source_row=row_no,
                    column="Breach Submission Date",
                    raw_value=raw_date,
                    severity="reject",
                    message="unparseable submission date",
                )
            )
            continue
        if not (MIN_SUBMISSION_DATE <= submitted <= date.today()):
            issues.append(
                ParseIssue(
                    source_row=row_no,
                    column="Breach Submission Date",
                    raw_value=raw_date,
                    severity="reject",
                    message="submission date outside accepted range",
                )
            )
            continue

        raw_state = cell("State").strip().upper()
        state = raw_state
        if raw_state and not (len(raw_state) == 2 and raw_state.isalpha()):
            row_issues.append(
                ParseIssue(
                    source_row=row_no,
                    column="State",
                    raw_value=cell("State"),
                    severity="warning",
                    message="not a 2-letter state code; cleared",
                )
            )
            state = ""

        raw_count = cell("Individuals Affected").strip().replace(",", "")
        individuals: int | None
        if not raw_count:
            individuals = None
        else:
            try:
                individuals = int(raw_count)
            except ValueError:
                individuals = None
                row_issues.append(
                    ParseIssue(
                        source_row=row_no,
                        column="Individuals Affected",
                        raw_value=cell("Individuals Affected"),
                        severity="warning",
                        message="not an integer; treated as unknown",
                    )
                )
            else:
                if individuals < 0:
                    row_issues.append(
                        ParseIssue(
                            source_row=row_no,
                            column="Individuals Affected",
                            raw_value=cell("Individuals Affected"),
                            severity="warning",
                            message="negative count; treated as unknown",
                        )
                    )
                    individuals = None

        raw_types = cell("Type of Breach")
        type_tokens = split_multivalue(raw_types)
        breach_types: list[BreachType] = []
        if not type_tokens:
            breach_types = [BreachType.UNKNOWN]
            row_issues.append(
                ParseIssue(
                    source_row=row_no,
                    column="Type of Breach",
                    raw_value=raw_types,
                    severity="warning",
                    message="empty breach type; recorded as Unknown",
                )
            )
        else:
            for token in type_tokens:
                normalized = normalize_breach_type(token)
                if normalized is BreachType.UNKNOWN and _fold(token) != "unknown":
                    row_issues.append(
                        ParseIssue(
                            source_row=row_no,
                            column="Type of Breach",
                            raw_value=token,
                            severity="warning",
                            message="unrecognized breach type token",
                        )
                    )
                breach_types.append(normalized)

        locations: list[PhiLocation] = []
        for token in split_multivalue(cell("Location of Breached Information")):
            normalized_loc = normalize_phi_location(token)
            if normalized_loc is PhiLocation.UNKNOWN and _fold(token) != "unknown":
                row_issues.append(
                    ParseIssue(
                        source_row=row_no,
                        column="Location of Breached Information",
                        raw_value=token,
                        severity="warning",
                        message="unrecognized PHI location token",
                    )
                )
            locations.append(normalized_loc)

        raw_ba = cell("Business Associate Present").strip().lower()
        if raw_ba in _TRUE_TOKENS:
            ba_present = True
        elif raw_ba in _FALSE_TOKENS:
            ba_present = False
        else:
            ba_present = False
            row_issues.append(
                ParseIssue(
                    source_row=row_no,
                    column="Business Associate Present",
                    raw_value=cell("Business Associate Present"),
                    severity="warning",
                    message="unrecognized flag; treated as No",
                )
            )

        records.append(
            BreachRecord(
                entity_name=cell("Name of Covered Entity").strip(),
                state=state,
                entity_type=normalize_entity_type(cell("Covered Entity Type")),
                individuals_affected=individuals,
                submission_date=submitted,
                breach_types=tuple(breach_types),
                locations=tuple(locations),
                business_associate_present=ba_present,
                web_description=cell("Web Description").strip(),
                source_row=row_no,
            )
        )
        issues.extend(row_issues)

    return records, issues


def parse_breach_file(path: Union[str, Path]) -> tuple[list[BreachRecord], list[ParseIssue]]:
    """Parse a breach CSV from disk, tolerating invalid UTF-8 with a warning."""
    raw = Path(path).read_bytes()
    issues: list[ParseIssue] = []
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        bad_line = raw[: exc.start].count(b"\n") + 1
        issues.append(
            ParseIssue(
                source_row=bad_line,
                column="",
                raw_value="",
                severity="warning",
                message="invalid UTF-8 bytes replaced",
            )
        )
        text = raw.decode("utf-8", errors="replace").lstrip("﻿")
    records, parse_issues = parse_breach_csv(io.StringIO(text))
    return records, issues + parse_issues


def _format_bool(flag: bool) -> str:
    return "Yes" if flag else "No"


def _record_row(record: BreachRecord) -> list[str]:
    return [
        record.entity_name,
        record.state,
        record.entity_type.value,
        "" if record.individuals_affected is None else str(record.individuals_affected),
        record.submission_date.isoformat(),
        ", ".join(bt.value for bt in record.breach_types),
        ", ".join(loc.value for loc in record.locations),
        _format_bool(record.business_associate_present),
        record.web_description,
    ]


def normalized_csv_text(records: Iterable[BreachRecord]) -> str:
    """Canonical re-export payload: interface columns, ISO dates, enum labels.

    Excludes provenance comments so the same record list always serializes to
    the same bytes; re-parsing this text reproduces the records.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS)
    for record in records:
        writer.writerow(_record_row(record))
    return buf.getvalue()


def write_normalized_csv(
    records: Iterable[BreachRecord],
    dest: Union[str, Path, IO[str]],
    comment_lines: Iterable[str] = (),
) -> None:
    """Write the normalized re-export, with optional leading comment lines."""
    payload = normalized_csv_text(records)
    text = "".join(f"# {line}\n" for line in comment_lines) + payload
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)


def issues_csv_text(issues: Iterable[ParseIssue]) -> str:
    """Issues export payload with columns row, column, severity, message."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["row", "column", "severity", "message"])
    for issue in issues:
        writer.writerow([issue.source_row, issue.column, issue.severity, issue.message])
    return buf.getvalue()


def write_issues_csv(
    issues: Iterable[ParseIssue],
    dest: Union[str, Path, IO[str]],
    comment_lines: Iterable[str] = (),
) -> None:
    text = "".join(f"# {line}\n" for line in comment_lines) + issues_csv_text(issues)
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)
