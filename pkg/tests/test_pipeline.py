"""Pipeline stages: actor profiling, attack matching, PHI filter, composition."""

from __future__ import annotations

import json
from datetime import date

import pytest
from hypothesis import given, strategies as st

from aca.errors import ArtifactError, FilterError
from aca.ingest import BreachType, PhiLocation
from aca.library import ThreatCategory, default_library
from aca.pipeline import (
    DEFAULT_MOTIVATIONS,
    MOTIVATIONS,
    AttackPattern,
    load_result,
    match_known_attacks,
    parse_filter_spec,
    phi_filter,
    profile_actors,
    result_from_dict,
    run_pipeline,
    save_result,
)
from aca.provenance import records_checksum

from conftest import make_record


@pytest.fixture(scope="module")
def snapshot_result(snapshot_records):
    return run_pipeline(snapshot_records, default_library())


class TestProfiles:
    def test_one_profile_per_actor(self):
        profiles = profile_actors(default_library(), [])
        assert len(profiles) == 15
        assert len({p.actor for p in profiles}) == 15

    def test_empty_records_give_empty_tactics(self):
        assert all(p.tactics == () for p in profile_actors(default_library(), []))

    def test_motivations_all_known_tags(self):
        for profile in profile_actors(default_library(), []):
            assert profile.motivation in MOTIVATIONS

    def test_cybercriminals_profile(self):
        records = [make_record(breach_types=(BreachType.HACKING_IT_INCIDENT,))]
        profiles = {p.actor: p for p in profile_actors(default_library(), records)}
        cyber = profiles["Cybercriminals"]
        assert cyber.categories == frozenset({ThreatCategory.EXTERNAL})
        assert cyber.motivation == "financial"
        assert cyber.tactics == (BreachType.HACKING_IT_INCIDENT,)
        # the same record teaches nothing about physical-theft actors
        assert profiles["Thieves"].tactics == ()

    def test_natural_conditions_environmental(self):
        profiles = {p.actor: p for p in profile_actors(default_library(), [])}
        natural = profiles["Natural conditions"]
        assert natural.motivation == "environmental"
        assert natural.categories == frozenset({ThreatCategory.PHYSICAL})

    def test_actor_in_two_entries_merges_tactics(self):
        records = [
            make_record(breach_types=(BreachType.UNAUTHORIZED_ACCESS_DISCLOSURE,)),
            make_record(breach_types=(BreachType.IMPROPER_DISPOSAL,)),
        ]
        profiles = {p.actor: p for p in profile_actors(default_library(), records)}
        assert profiles["Employees"].tactics == (
            BreachType.IMPROPER_DISPOSAL,
            BreachType.UNAUTHORIZED_ACCESS_DISCLOSURE,
        )
        assert profiles["Employees"].categories == frozenset({ThreatCategory.INTERNAL})

    def test_motivation_override_and_default(self):
        profiles = {p.actor: p for p in profile_actors(default_library(), [], motivations={})}
        assert all(p.motivation == "negligence" for p in profiles.values())

    def test_default_motivations_cover_every_actor(self):
        assert set(DEFAULT_MOTIVATIONS) == set(default_library().actors())


class TestMatch:
    def _theft_records(self):
        return [
            make_record(
                breach_types=(BreachType.THEFT,),
                locations=(PhiLocation.LAPTOP,),
                individuals_affected=10,
                submission_date=date(2015, 3, 1),
            ),
            make_record(
                breach_types=(BreachType.THEFT,),
                locations=(PhiLocation.LAPTOP, PhiLocation.PAPER_FILMS),
                individuals_affected=20,
                submission_date=date(2017, 8, 9),
            ),
        ]

    def test_two_theft_records_one_group_two_actors(self):
        lib = default_library()
        profiles = profile_actors(lib, self._theft_records())
        patterns = match_known_attacks(profiles, self._theft_records(), lib)
        assert len(patterns) == 2
        assert {p.actor for p in patterns} == {"Thieves", "Vandalists"}
        for pattern in patterns:
            assert pattern.entry_id == "theft-or-vandalism"
            assert pattern.category is ThreatCategory.PHYSICAL
            assert pattern.breach_type is BreachType.THEFT
            assert pattern.incident_count == 2
            assert pattern.total_impact == 30
            assert pattern.phi_locations == {PhiLocation.LAPTOP: 2, PhiLocation.PAPER_FILMS: 1}
            assert pattern.first_seen == 2015
            assert pattern.last_seen == 2017

    def test_unknown_impact_counts_but_adds_nothing(self):
        lib = default_library()
        records = [
            make_record(breach_types=(BreachType.THEFT,), individuals_affected=None),
            make_record(breach_types=(BreachType.THEFT,), individuals_affected=7),
        ]
        patterns = match_known_attacks(profile_actors(lib, records), records, lib)
        assert patterns[0].incident_count == 2
        assert patterns[0].total_impact == 7

    def test_unclassified_records_ignored(self):
        lib = default_library()
        records = [make_record(breach_types=(BreachType.OTHER,))]
        assert match_known_attacks(profile_actors(lib, records), records, lib) == []

    def test_sorted_by_incident_count_then_entry(self):
        lib = default_library()
        records = [
            make_record(breach_types=(BreachType.HACKING_IT_INCIDENT,)),
            make_record(breach_types=(BreachType.HACKING_IT_INCIDENT,)),
            make_record(breach_types=(BreachType.THEFT,)),
        ]
        patterns = match_known_attacks(profile_actors(lib, records), records, lib)
        counts = [p.incident_count for p in patterns]
        assert counts == sorted(counts, reverse=True)
        assert patterns[0].entry_id == "hacking-it-incident"

    def test_actor_expansion_shares_group_aggregates(self, snapshot_records):
        lib = default_library()
        patterns = match_known_attacks(
            profile_actors(lib, snapshot_records), snapshot_records, lib
        )
        by_group: dict = {}
        for pattern in patterns:
            key = (pattern.entry_id, pattern.breach_type)
            by_group.setdefault(key, []).append(pattern)
        for (entry_id, _), group in by_group.items():
            assert len(group) == len(lib.entry(entry_id).actors)
            assert len({(p.incident_count, p.total_impact) for p in group}) == 1


class TestFilter:
    def test_all_spec(self):
        assert parse_filter_spec("all") == "all"
        assert parse_filter_spec(" ALL ") == "all"

    def test_location_list(self):
        assert parse_filter_spec("Email, Laptop") == {PhiLocation.EMAIL, PhiLocation.LAPTOP}

    def test_unknown_location_rejected(self):
        with pytest.raises(FilterError):
            parse_filter_spec("Email, Floppy Disk")

    def test_blank_spec_rejected(self):
        with pytest.raises(FilterError):
            parse_filter_spec(" , ,")

    def test_explicit_unknown_token_allowed(self):
        assert parse_filter_spec("Unknown") == {PhiLocation.UNKNOWN}

    def test_all_is_identity(self, snapshot_result):
        assert phi_filter(snapshot_result.patterns, "all") == list(snapshot_result.patterns)

    def test_empty_set_rejected(self):
        with pytest.raises(FilterError):
            phi_filter([], set())

    def test_intersection_semantics(self):
        lib = default_library()
        records = [
            make_record(breach_types=(BreachType.THEFT,), locations=(PhiLocation.LAPTOP,)),
            make_record(
                breach_types=(BreachType.HACKING_IT_INCIDENT,),
                locations=(PhiLocation.NETWORK_SERVER,),
            ),
        ]
        patterns = match_known_attacks(profile_actors(lib, records), records, lib)
        kept = phi_filter(patterns, {PhiLocation.LAPTOP})
        assert kept and all(p.entry_id == "theft-or-vandalism" for p in kept)

    def test_filter_keeps_counts_intact(self):
        # selection is whole-pattern: a kept pattern's numbers never change
        lib = default_library()
        records = [
            make_record(
                breach_types=(BreachType.THEFT,),
                locations=(PhiLocation.LAPTOP, PhiLocation.EMAIL),
                individuals_affected=50,
            )
        ]
        patterns = match_known_attacks(profile_actors(lib, records), records, lib)
        kept = phi_filter(patterns, {PhiLocation.EMAIL})
        assert kept == patterns


class TestRunPipeline:
    def test_empty_records(self):
        result = run_pipeline([], default_library())
        assert result.patterns == ()
        assert result.unclassified_count == 0
        assert result.classified_count() == 0
        assert len(result.profiles) == 15
        assert result.filter_spec == "all"
        assert result.provenance.snapshot_sha256 == records_checksum([])
        assert result.provenance.library_version == 1
        assert result.provenance.seed is None

    def test_conservation_on_snapshot(self, snapshot_result, snapshot_records):
        total = snapshot_result.classified_count() + snapshot_result.unclassified_count
        assert total == len(snapshot_records)

    def test_deterministic(self, snapshot_records):
        lib = default_library()
        assert run_pipeline(snapshot_records, lib) == run_pipeline(snapshot_records, lib)

    def test_filter_composes(self, snapshot_records, snapshot_result):
        spec = {PhiLocation.NETWORK_SERVER}
        filtered = run_pipeline(snapshot_records, default_library(), filter_spec=spec)
        assert list(filtered.patterns) == phi_filter(snapshot_result.patterns, spec)
        assert filtered.filter_spec == "Network Server"
        # unclassified tally is about the mapping, not the filter
        assert filtered.unclassified_count == snapshot_result.unclassified_count

    def test_snapshot_dominated_by_hacking(self, snapshot_result):
        top = snapshot_result.patterns[0]
        assert top.entry_id == "hacking-it-incident"
        assert top.incident_count == max(p.incident_count for p in snapshot_result.patterns)
        assert top.last_seen >= 2019

    def test_snapshot_year_spans_inside_window(self, snapshot_result):
        for pattern in snapshot_result.patterns:
            assert 2009 <= pattern.first_seen <= pattern.last_seen <= 2023


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        records = [
            make_record(breach_types=(BreachType.THEFT,), locations=(PhiLocation.LAPTOP,)),
            make_record(breach_types=(BreachType.OTHER,)),
        ]
        result = run_pipeline(records, default_library())
        path = tmp_path / "pipeline_result.json"
        save_result(result, path)
        assert load_result(path) == result

    def test_snapshot_round_trip(self, snapshot_result, tmp_path):
        path = tmp_path / "pipeline_result.json"
        save_result(snapshot_result, path)
        assert load_result(path) == snapshot_result

    def test_missing_key_fails(self):
        with pytest.raises(ArtifactError):
            result_from_dict({"profiles": []})

    def test_unknown_enum_value_fails(self, tmp_path):
        result = run_pipeline([make_record()], default_library())
        doc = result.to_dict()
        doc["patterns"][0]["breach_type"] = "Arson"
        with pytest.raises(ArtifactError):
            result_from_dict(doc)

    def test_invalid_json_fails(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("not json", encoding="utf-8")
        with pytest.raises(ArtifactError):
            load_result(path)


def _pattern(locations: dict[PhiLocation, int]) -> AttackPattern:
    return AttackPattern(
        entry_id="theft-or-vandalism",
        actor="Thieves",
        category=ThreatCategory.PHYSICAL,
        breach_type=BreachType.THEFT,
        phi_locations=locations,
        incident_count=max(1, sum(locations.values())),
        total_impact=100,
        first_seen=2010,
        last_seen=2020,
    )


location_sets = st.dictionaries(
    st.sampled_from(list(PhiLocation)), st.integers(1, 5), min_size=1, max_size=4
)


@given(
    patterns=st.lists(location_sets.map(_pattern), max_size=8),
    small=st.sets(st.sampled_from(list(PhiLocation)), min_size=1, max_size=3),
    extra=st.sets(st.sampled_from(list(PhiLocation)), max_size=3),
)
def test_phi_filter_monotone_in_filter_set(patterns, small, extra):
    kept_small = phi_filter(patterns, small)
    kept_big = phi_filter(patterns, small | extra)
    # widening the filter never drops a pattern, and keeps selection exact
    assert set(map(id, kept_small)) <= set(map(id, kept_big))
    for pattern in kept_small:
        assert set(pattern.phi_locations) & small
    for pattern in patterns:
        if pattern not in kept_big:
            assert not set(pattern.phi_locations) & (small | extra)
