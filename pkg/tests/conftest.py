"""Shared fixtures: the bundled snapshot (parsed once) and a record factory."""

from __future__ import annotations

from datetime import date

import pytest

from aca.cli import bundled_snapshot_path
from aca.ingest import (
    BreachRecord,
    BreachType,
    EntityType,
    PhiLocation,
    parse_breach_file,
)


def make_record(
    entity_name: str = "Sample Medical Center 0001",
    state: str = "CA",
    entity_type: EntityType = EntityType.HEALTHCARE_PROVIDER,
    individuals_affected: int | None = 1000,
    submission_date: date = date(2020, 6, 15),
    breach_types: tuple[BreachType, ...] = (BreachType.HACKING_IT_INCIDENT,),
    locations: tuple[PhiLocation, ...] = (PhiLocation.NETWORK_SERVER,),
    business_associate_present: bool = False,
    web_description: str = "",
    source_row: int = 2,
) -> BreachRecord:
    return BreachRecord(
        entity_name=entity_name,
        state=state,
        entity_type=entity_type,
        individuals_affected=individuals_affected,
        submission_date=submission_date,
        breach_types=breach_types,
        locations=locations,
        business_associate_present=business_associate_present,
        web_description=web_description,
        source_row=source_row,
    )


@pytest.fixture(scope="session")
def snapshot_parse():
    return parse_breach_file(bundled_snapshot_path())


@pytest.fixture(scope="session")
def snapshot_records(snapshot_parse):
    records, _ = snapshot_parse
    return records


@pytest.fixture(scope="session")
def snapshot_issues(snapshot_parse):
    _, issues = snapshot_parse
    return issues
