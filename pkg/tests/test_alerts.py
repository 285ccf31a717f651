"""Alert rules, event synthesis, detection scoring, and library feedback."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from aca.alerts import (
    Action,
    AlertRule,
    DetectionReport,
    EntryDetection,
    RuleMatch,
    Severity,
    SimEvent,
    action_for_severity,
    evaluate_rules,
    events_csv_text,
    feedback_update,
    generate_rules,
    report_from_dict,
    rules_doc,
    rules_from_doc,
    severity_for_composite,
    synthesize_events,
)
from aca.errors import (
    ArtifactError,
    ProvenanceError,
    RiskInputError,
    SimulationError,
)
from aca.ingest import BreachType, PhiLocation
from aca.library import ThreatCategory, default_library
from aca.pipeline import AttackPattern, PipelineResult, run_pipeline
from aca.provenance import Provenance
from aca.risk import RiskScore, score_patterns


@pytest.fixture(scope="module")
def snapshot_scores(snapshot_records):
    result = run_pipeline(snapshot_records, default_library())
    return score_patterns(result.patterns, default_library())


def _pattern(**overrides) -> AttackPattern:
    fields = dict(
        entry_id="hacking-it-incident",
        actor="Cybercriminals",
        category=ThreatCategory.EXTERNAL,
        breach_type=BreachType.HACKING_IT_INCIDENT,
        phi_locations={PhiLocation.NETWORK_SERVER: 2, PhiLocation.EMAIL: 1},
        incident_count=3,
        total_impact=3000,
        first_seen=2015,
        last_seen=2023,
    )
    fields.update(overrides)
    return AttackPattern(**fields)


def _score(pattern: AttackPattern, composite: float, rank: int = 1) -> RiskScore:
    return RiskScore(
        pattern=pattern, likelihood=composite, impact=1.0, composite=composite, rank=rank
    )


class TestSeverity:
    @pytest.mark.parametrize(
        "composite,expected",
        [
            (0.0, Severity.LOW),
            (0.2499, Severity.LOW),
            (0.25, Severity.MEDIUM),
            (0.49, Severity.MEDIUM),
            (0.5, Severity.HIGH),
            (0.74, Severity.HIGH),
            (0.75, Severity.CRITICAL),
            (1.0, Severity.CRITICAL),
        ],
    )
    def test_bands(self, composite, expected):
        assert severity_for_composite(composite) is expected

    def test_actions(self):
        assert action_for_severity(Severity.LOW) is Action.ALERT
        assert action_for_severity(Severity.MEDIUM) is Action.ALERT
        assert action_for_severity(Severity.HIGH) is Action.ALERT_BLOCK
        assert action_for_severity(Severity.CRITICAL) is Action.ALERT_BLOCK


class TestGenerateRules:
    def test_empty_scores_rejected(self):
        with pytest.raises(RiskInputError):
            generate_rules([])

    def test_fields_copied_from_pattern(self):
        rule = generate_rules([_score(_pattern(), composite=0.8)])[0]
        assert rule.id == "hacking-it-incident--hacking-it-incident--cybercriminals"
        assert rule.match.category is ThreatCategory.EXTERNAL
        assert rule.match.breach_type is BreachType.HACKING_IT_INCIDENT
        assert rule.match.phi_locations == frozenset(
            {PhiLocation.NETWORK_SERVER, PhiLocation.EMAIL}
        )
        assert rule.match.actors == frozenset({"Cybercriminals"})
        assert rule.severity is Severity.CRITICAL
        assert rule.action is Action.ALERT_BLOCK
        assert rule.origin_entry_id == "hacking-it-incident"
        assert rule.origin_rank == 1

    def test_actor_slug_in_id(self):
        pattern = _pattern(entry_id="espionage", actor="State actors")
        rule = generate_rules([_score(pattern, composite=0.1)])[0]
        assert rule.id == "espionage--hacking-it-incident--state-actors"

    def test_low_composite_alerts_without_blocking(self):
        rule = generate_rules([_score(_pattern(), composite=0.2)])[0]
        assert rule.severity is Severity.LOW
        assert rule.action is Action.ALERT

    def test_snapshot_rules_unique_ids_and_ranks(self, snapshot_scores):
        rules = generate_rules(snapshot_scores)
        assert len(rules) == len(snapshot_scores)
        assert len({rule.id for rule in rules}) == len(rules)
        assert [rule.origin_rank for rule in rules] == list(range(1, len(rules) + 1))

    def test_rules_doc_round_trip(self, snapshot_scores):
        rules = generate_rules(snapshot_scores)
        provenance = Provenance(snapshot_sha256="b" * 64, library_version=1)
        loaded, loaded_prov = rules_from_doc(rules_doc(rules, provenance))
        assert loaded == rules
        assert loaded_prov == provenance

    def test_rules_from_doc_unknown_severity(self):
        doc = rules_doc(
            generate_rules([_score(_pattern(), 0.5)]),
            Provenance(snapshot_sha256="c" * 64),
        )
        doc["rules"][0]["severity"] = "catastrophic"
        with pytest.raises(ArtifactError):
            rules_from_doc(doc)

    def test_rules_from_doc_missing_key(self):
        with pytest.raises(ArtifactError):
            rules_from_doc({"rules": [{}]})


class TestSynthesize:
    def test_deterministic_for_seed(self):
        patterns = [_pattern()]
        assert synthesize_events(patterns, 42, 200, 0.5) == synthesize_events(
            patterns, 42, 200, 0.5
        )

    def test_seed_changes_stream(self):
        patterns = [_pattern()]
        assert synthesize_events(patterns, 1, 200, 0.5) != synthesize_events(
            patterns, 2, 200, 0.5
        )

    def test_event_count_and_ticks(self):
        events = synthesize_events([_pattern()], 7, 50, 0.5)
        assert len(events) == 50
        assert [e.tick for e in events] == list(range(50))

    def test_all_benign_when_fraction_one(self):
        events = synthesize_events([_pattern()], 3, 100, 1.0)
        assert all(not e.is_attack for e in events)
        assert all(e.impact == 0 and e.origin_entry_id is None for e in events)

    def test_all_attacks_when_fraction_zero(self):
        pattern = _pattern()
        events = synthesize_events([pattern], 3, 100, 0.0)
        assert all(e.is_attack for e in events)
        for event in events:
            assert event.category is pattern.category
            assert event.breach_type is pattern.breach_type
            assert event.actor == pattern.actor
            assert event.impact == pattern.total_impact // pattern.incident_count
            assert event.origin_entry_id == pattern.entry_id
            assert event.phi_location in pattern.phi_locations

    def test_benign_actors_from_pattern_vocabulary(self):
        patterns = [_pattern(), _pattern(entry_id="theft-or-vandalism", actor="Thieves")]
        events = synthesize_events(patterns, 11, 300, 1.0)
        assert {e.actor for e in events} <= {"Cybercriminals", "Thieves"}

    def test_attack_mix_follows_incident_counts(self):
        patterns = [
            _pattern(incident_count=9, total_impact=900),
            _pattern(entry_id="theft-or-vandalism", actor="Thieves", incident_count=1),
        ]
        events = synthesize_events(patterns, 5, 4000, 0.0)
        share = sum(1 for e in events if e.actor == "Cybercriminals") / len(events)
        assert share == pytest.approx(0.9, abs=0.05)

    def test_location_mix_follows_multiset(self):
        pattern = _pattern(phi_locations={PhiLocation.LAPTOP: 3, PhiLocation.EMAIL: 1})
        events = synthesize_events([pattern], 9, 4000, 0.0)
        share = sum(1 for e in events if e.phi_location is PhiLocation.LAPTOP) / len(events)
        assert share == pytest.approx(0.75, abs=0.05)

    def test_validation_errors(self):
        with pytest.raises(SimulationError):
            synthesize_events([], 1, 10, 0.5)
        with pytest.raises(SimulationError):
            synthesize_events([_pattern()], 1, 0, 0.5)
        with pytest.raises(SimulationError):
            synthesize_events([_pattern()], 1, 10, 1.5)

    def test_csv_export(self):
        events = synthesize_events([_pattern()], 21, 4, 0.5)
        lines = events_csv_text(events).splitlines()
        assert lines[0] == "tick,category,breach_type,location,actor,is_attack,impact"
        assert len(lines) == 5
        assert "origin" not in lines[0]
        assert all(line.split(",")[-2] in ("true", "false") for line in lines[1:])


def _oracle_rules() -> list[AlertRule]:
    blocking = AlertRule(
        id="hacking-it-incident--hacking-it-incident--cybercriminals",
        match=RuleMatch(
            category=ThreatCategory.EXTERNAL,
            breach_type=BreachType.HACKING_IT_INCIDENT,
            phi_locations=frozenset({PhiLocation.NETWORK_SERVER, PhiLocation.EMAIL}),
            actors=frozenset({"Cybercriminals"}),
        ),
        severity=Severity.HIGH,
        action=Action.ALERT_BLOCK,
        origin_entry_id="hacking-it-incident",
        origin_rank=1,
    )
    alerting = AlertRule(
        id="theft-or-vandalism--theft--thieves",
        match=RuleMatch(
            category=ThreatCategory.PHYSICAL,
            breach_type=BreachType.THEFT,
            phi_locations=frozenset({PhiLocation.LAPTOP}),
            actors=frozenset({"Thieves"}),
        ),
        severity=Severity.LOW,
        action=Action.ALERT,
        origin_entry_id="theft-or-vandalism",
        origin_rank=2,
    )
    return [blocking, alerting]


def _oracle_events() -> list[SimEvent]:
    return [
        SimEvent(0, ThreatCategory.EXTERNAL, BreachType.HACKING_IT_INCIDENT,
                 PhiLocation.NETWORK_SERVER, "Cybercriminals", True, 100,
                 origin_entry_id="hacking-it-incident"),
        SimEvent(1, ThreatCategory.PHYSICAL, BreachType.THEFT,
                 PhiLocation.LAPTOP, "Thieves", True, 100,
                 origin_entry_id="theft-or-vandalism"),
        SimEvent(2, ThreatCategory.EXTERNAL, BreachType.HACKING_IT_INCIDENT,
                 PhiLocation.LAPTOP, "Cybercriminals", True, 0,
                 origin_entry_id="hacking-it-incident"),
        SimEvent(3, ThreatCategory.INTERNAL, BreachType.UNAUTHORIZED_ACCESS_DISCLOSURE,
                 PhiLocation.EMAIL, "Employees", True, 0,
                 origin_entry_id="unauthorized-access-disclosure"),
        SimEvent(4, ThreatCategory.EXTERNAL, BreachType.HACKING_IT_INCIDENT,
                 PhiLocation.EMAIL, "Cybercriminals", False, 0),
        SimEvent(5, ThreatCategory.PHYSICAL, BreachType.LOSS,
                 PhiLocation.LAPTOP, "Thieves", False, 0),
    ]


class TestEvaluate:
    def test_hand_checked_totals(self):
        report = evaluate_rules(_oracle_rules(), _oracle_events())
        assert report.events_total == 6
        assert report.attacks_total == 4
        assert report.benign_total == 2
        assert report.detected == 2
        assert report.blocked == 1
        assert report.false_alerts == 1
        assert report.detection_rate == pytest.approx(0.5)
        assert report.false_alert_rate == pytest.approx(0.5)
        assert report.baseline_impact == 200
        assert report.residual_impact == 100
        assert report.attack_reduction == pytest.approx(0.5)
        assert report.attack_reduction_by_count == pytest.approx(0.25)

    def test_hand_checked_per_entry(self):
        report = evaluate_rules(_oracle_rules(), _oracle_events())
        assert set(report.per_entry) == {
            "hacking-it-incident",
            "theft-or-vandalism",
            "unauthorized-access-disclosure",
        }
        hacking = report.per_entry["hacking-it-incident"]
        assert (hacking.attacks, hacking.detected, hacking.blocked) == (2, 1, 1)
        assert hacking.missed == 1
        assert hacking.miss_rate == pytest.approx(0.5)
        theft = report.per_entry["theft-or-vandalism"]
        assert (theft.attacks, theft.detected, theft.blocked) == (1, 1, 0)
        assert theft.miss_rate == 0.0
        uad = report.per_entry["unauthorized-access-disclosure"]
        assert (uad.attacks, uad.detected, uad.blocked) == (1, 0, 0)
        assert uad.miss_rate == pytest.approx(1.0)

    def test_no_rules_detect_nothing(self):
        report = evaluate_rules([], _oracle_events())
        assert report.detected == 0
        assert report.blocked == 0
        assert report.false_alerts == 0
        assert report.residual_impact == report.baseline_impact
        assert report.attack_reduction == 0.0

    def test_empty_events(self):
        report = evaluate_rules(_oracle_rules(), [])
        assert report.events_total == 0
        assert report.detection_rate == 0.0
        assert report.false_alert_rate == 0.0
        assert report.attack_reduction == 0.0

    def test_total_blocking_gives_full_reduction(self):
        rules = [_oracle_rules()[0]]
        events = [_oracle_events()[0]] * 5
        report = evaluate_rules(rules, events)
        assert report.blocked == 5
        assert report.residual_impact == 0
        assert report.attack_reduction == 1.0
        assert report.attack_reduction_by_count == 1.0

    def test_report_round_trip(self):
        provenance = Provenance(snapshot_sha256="d" * 64, library_version=3, seed=9)
        report = evaluate_rules(_oracle_rules(), _oracle_events(), provenance)
        assert report_from_dict(report.to_dict()) == report

    def test_report_round_trip_without_provenance(self):
        report = evaluate_rules(_oracle_rules(), _oracle_events())
        assert report.provenance is None
        assert report_from_dict(report.to_dict()) == report

    def test_malformed_report_rejected(self):
        with pytest.raises(ArtifactError):
            report_from_dict({"events_total": 1})


event_strategy = st.builds(
    SimEvent,
    tick=st.integers(0, 999),
    category=st.sampled_from(list(ThreatCategory)),
    breach_type=st.sampled_from(list(BreachType)),
    phi_location=st.sampled_from(list(PhiLocation)),
    actor=st.sampled_from(["Cybercriminals", "Thieves", "Employees"]),
    is_attack=st.booleans(),
    impact=st.integers(0, 1000),
    origin_entry_id=st.sampled_from(
        [None, "hacking-it-incident", "theft-or-vandalism"]
    ),
)


@given(events=st.lists(event_strategy, max_size=40))
def test_evaluate_invariants(events):
    report = evaluate_rules(_oracle_rules(), events)
    assert report.events_total == len(events)
    assert report.attacks_total + report.benign_total == report.events_total
    assert 0 <= report.blocked <= report.detected <= report.attacks_total
    assert 0 <= report.false_alerts <= report.benign_total
    assert 0 <= report.residual_impact <= report.baseline_impact
    assert 0.0 <= report.detection_rate <= 1.0
    assert 0.0 <= report.false_alert_rate <= 1.0
    assert 0.0 <= report.attack_reduction_by_count <= 1.0
    for detection in report.per_entry.values():
        assert 0 <= detection.blocked <= detection.detected <= detection.attacks
    assert sum(d.attacks for d in report.per_entry.values()) <= report.attacks_total


def _result_with(provenance: Provenance) -> PipelineResult:
    return PipelineResult(
        profiles=(), patterns=(), unclassified_count=0, provenance=provenance, filter_spec="all"
    )


def _report_with(
    per_entry: dict[str, EntryDetection], provenance: Provenance | None
) -> DetectionReport:
    attacks = sum(d.attacks for d in per_entry.values())
    detected = sum(d.detected for d in per_entry.values())
    return DetectionReport(
        events_total=attacks,
        attacks_total=attacks,
        benign_total=0,
        detected=detected,
        blocked=sum(d.blocked for d in per_entry.values()),
        false_alerts=0,
        detection_rate=detected / attacks if attacks else 0.0,
        false_alert_rate=0.0,
        baseline_impact=0,
        residual_impact=0,
        attack_reduction=0.0,
        attack_reduction_by_count=0.0,
        per_entry=per_entry,
        provenance=provenance,
    )


class TestFeedback:
    PROV = Provenance(snapshot_sha256="e" * 64, library_version=1, seed=42)

    def test_missed_entries_reweighted(self):
        per_entry = {
            "hacking-it-incident": EntryDetection(attacks=2, detected=1, blocked=1),
            "theft-or-vandalism": EntryDetection(attacks=1, detected=1, blocked=0),
            "unauthorized-access-disclosure": EntryDetection(attacks=1, detected=0, blocked=0),
        }
        library = default_library()
        updated, delta = feedback_update(
            library, _report_with(per_entry, self.PROV), _result_with(self.PROV)
        )
        assert updated.version == 2
        assert updated.entry("hacking-it-incident").likelihood_weight == pytest.approx(1.5)
        assert updated.entry("unauthorized-access-disclosure").likelihood_weight == pytest.approx(2.0)
        assert updated.entry("theft-or-vandalism").likelihood_weight == 1.0
        assert delta.version_before == 1
        assert delta.version_after == 2
        assert set(delta.changes) == {"hacking-it-incident", "unauthorized-access-disclosure"}
        assert delta.changes["hacking-it-incident"].miss_rate == pytest.approx(0.5)
        assert delta.changes["hacking-it-incident"].after == pytest.approx(1.5)
        # input library untouched
        assert library.entry("hacking-it-incident").likelihood_weight == 1.0

    def test_zero_miss_round_still_versions_once(self):
        per_entry = {"hacking-it-incident": EntryDetection(attacks=3, detected=3, blocked=3)}
        updated, delta = feedback_update(
            default_library(), _report_with(per_entry, self.PROV), _result_with(self.PROV)
        )
        assert updated.version == 2
        assert delta.changes == {}
        assert all(e.likelihood_weight == 1.0 for e in updated.entries)
        assert len(updated.changelog) == 1

    def test_weights_never_decrease(self):
        per_entry = {
            entry.id: EntryDetection(attacks=4, detected=1, blocked=0)
            for entry in default_library().entries
        }
        updated, _ = feedback_update(
            default_library(), _report_with(per_entry, self.PROV), _result_with(self.PROV)
        )
        for entry in default_library().entries:
            assert updated.entry(entry.id).likelihood_weight >= entry.likelihood_weight

    def test_changelog_names_the_round(self):
        per_entry = {"hacking-it-incident": EntryDetection(attacks=2, detected=1, blocked=0)}
        updated, _ = feedback_update(
            default_library(), _report_with(per_entry, self.PROV), _result_with(self.PROV)
        )
        version, description = updated.changelog[-1]
        assert version == 2
        assert "seed=42" in description
        assert "1 of 1" in description

    def test_report_without_provenance_rejected(self):
        per_entry = {"hacking-it-incident": EntryDetection(attacks=1, detected=0, blocked=0)}
        with pytest.raises(ProvenanceError):
            feedback_update(
                default_library(), _report_with(per_entry, None), _result_with(self.PROV)
            )

    def test_snapshot_mismatch_rejected(self):
        per_entry = {"hacking-it-incident": EntryDetection(attacks=1, detected=0, blocked=0)}
        other = Provenance(snapshot_sha256="f" * 64, library_version=1, seed=42)
        with pytest.raises(ProvenanceError):
            feedback_update(
                default_library(), _report_with(per_entry, other), _result_with(self.PROV)
            )

    def test_stale_library_rejected(self):
        prov_v2 = Provenance(snapshot_sha256="e" * 64, library_version=2, seed=42)
        per_entry = {"hacking-it-incident": EntryDetection(attacks=1, detected=0, blocked=0)}
        with pytest.raises(ProvenanceError):
            feedback_update(
                default_library(), _report_with(per_entry, prov_v2), _result_with(prov_v2)
            )

    def test_second_round_compounds(self):
        per_entry = {"hacking-it-incident": EntryDetection(attacks=2, detected=1, blocked=0)}
        library = default_library()
        library, _ = feedback_update(
            library, _report_with(per_entry, self.PROV), _result_with(self.PROV)
        )
        prov_v2 = Provenance(snapshot_sha256="e" * 64, library_version=2, seed=43)
        library, delta = feedback_update(
            library, _report_with(per_entry, prov_v2), _result_with(prov_v2)
        )
        assert library.version == 3
        # 1.0 -> 1.5 -> 2.25: the proportional bump applies to the current weight
        assert library.entry("hacking-it-incident").likelihood_weight == pytest.approx(2.25)
        assert delta.changes["hacking-it-incident"].before == pytest.approx(1.5)
