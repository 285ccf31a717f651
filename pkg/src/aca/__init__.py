"""Attacker-centric threat analytics for healthcare breach data.

Ingests HHS OCR breach-portal exports, reproduces the headline breach
statistics, maps incidents into a versioned threat library, scores risk,
generates PHI-aware alert rules, evaluates them on synthetic event streams,
and feeds detection misses back into the library.
"""

from .alerts import (
    Action,
    AlertRule,
    DetectionReport,
    FeedbackDelta,
    Severity,
    SimEvent,
    evaluate_rules,
    feedback_update,
    generate_rules,
    synthesize_events,
)
from .errors import AcaError
from .ingest import (
    BreachRecord,
    BreachType,
    EntityType,
    ParseIssue,
    PhiLocation,
    parse_breach_csv,
    parse_breach_file,
)
from .library import (
    AddEntry,
    AdjustWeights,
    ModifyEntry,
    ThreatCategory,
    ThreatEntry,
    ThreatLibrary,
    apply_update,
    default_library,
    load_library,
    map_breach_to_threat,
    save_library,
)
from .pipeline import (
    ActorProfile,
    AttackPattern,
    PipelineResult,
    phi_filter,
    profile_actors,
    match_known_attacks,
    run_pipeline,
)
from .provenance import Provenance, records_checksum
from .risk import RiskScore, impact, likelihood, prioritize, score_patterns
from .stats import (
    EntityImpactRow,
    ImpactSummary,
    ResponseAction,
    YearlySeries,
    breaches_by_type,
    breaches_per_year,
    grand_total_individuals,
    impact_distribution,
    individuals_by_entity_type,
    response_actions_by_entity,
)

__version__ = "0.1.0"

__all__ = [
    "AcaError",
    "Action",
    "ActorProfile",
    "AddEntry",
    "AdjustWeights",
    "AlertRule",
    "AttackPattern",
    "BreachRecord",
    "BreachType",
    "DetectionReport",
    "EntityImpactRow",
    "EntityType",
    "FeedbackDelta",
    "ImpactSummary",
    "ModifyEntry",
    "ParseIssue",
    "PhiLocation",
    "PipelineResult",
    "Provenance",
    "ResponseAction",
    "RiskScore",
    "Severity",
    "SimEvent",
    "ThreatCategory",
    "ThreatEntry",
    "ThreatLibrary",
    "YearlySeries",
    "apply_update",
    "breaches_by_type",
    "breaches_per_year",
    "default_library",
    "evaluate_rules",
    "feedback_update",
    "generate_rules",
    "grand_total_individuals",
    "impact",
    "impact_distribution",
    "individuals_by_entity_type",
    "likelihood",
    "load_library",
    "map_breach_to_threat",
    "match_known_attacks",
    "parse_breach_csv",
    "parse_breach_file",
    "phi_filter",
    "prioritize",
    "profile_actors",
    "records_checksum",
    "response_actions_by_entity",
    "run_pipeline",
    "save_library",
    "score_patterns",
    "synthesize_events",
]
