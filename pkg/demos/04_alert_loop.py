"""
Alert rules, simulated detection, and the feedback loop
=======================================================

The output stage compiles the prioritized patterns into alert rules, replays
them against a seeded synthetic event stream, and feeds the misses back into
the threat library as likelihood-weight increases. With the full rule set
every attack is covered by construction, so this script also degrades the
rules (dropping one entry's coverage) to show what a miss does to the
library on the next feedback round.
"""

from aca.alerts import evaluate_rules, feedback_update, generate_rules, synthesize_events
from aca.cli import bundled_snapshot_path
from aca.ingest import parse_breach_file
from aca.library import default_library
from aca.pipeline import run_pipeline
from aca.provenance import Provenance
from aca.risk import score_patterns

SEED = 42
N_EVENTS = 10_000

records, _ = parse_breach_file(bundled_snapshot_path())
library = default_library()
result = run_pipeline(records, library)
scores = score_patterns(list(result.patterns), library)

rules = generate_rules(scores)
blocking = sum(1 for rule in rules if rule.action.value == "alert+block")
print(f"{len(rules)} rules ({blocking} blocking) from {len(scores)} scored patterns")
for rule in rules[:3]:
    print(f"  {rule.id}: severity {rule.severity.value}, action {rule.action.value}")
print("  ...\n")

events = synthesize_events(list(result.patterns), SEED, N_EVENTS, benign_fraction=0.5)
provenance = Provenance(
    snapshot_sha256=result.provenance.snapshot_sha256,
    library_version=result.provenance.library_version,
    seed=SEED,
)
report = evaluate_rules(rules, events, provenance=provenance)
print(f"replay of {report.events_total} events (seed {SEED}): "
      f"{report.attacks_total} attacks, {report.benign_total} benign")
print(f"  detection rate    {report.detection_rate:.3f}")
print(f"  false alert rate  {report.false_alert_rate:.3f}")
print(f"  attack reduction  {report.attack_reduction:.3f} impact-weighted, "
      f"{report.attack_reduction_by_count:.3f} by count")
print("  (low-severity rules alert without blocking, so reduction stays 0 here)\n")

# feedback with zero misses still versions the library, but moves no weights
updated, delta = feedback_update(library, report, result)
print(f"feedback round: library v{delta.version_before} -> v{delta.version_after}, "
      f"{len(delta.changes)} weights changed\n")

# now drop one entry's rules to force misses and run the loop again
dropped = "unauthorized-access-disclosure"
degraded_rules = [rule for rule in rules if rule.origin_entry_id != dropped]
degraded_report = evaluate_rules(degraded_rules, events, provenance=provenance)
print(f"same events with {dropped!r} rules removed:")
print(f"  detection rate drops to {degraded_report.detection_rate:.3f}")

updated, delta = feedback_update(library, degraded_report, result)
print(f"  feedback: library v{delta.version_before} -> v{delta.version_after}")
for entry_id, change in delta.changes.items():
    print(f"  {entry_id}: weight {change.before:.2f} -> {change.after:.2f} "
          f"(miss rate {change.miss_rate:.3f})")

# the raised weight lifts that entry's likelihood share on the next assessment
def pattern_key(score):
    p = score.pattern
    return (p.entry_id, p.breach_type, p.actor)

rescored = score_patterns(list(result.patterns), updated)
old = {pattern_key(s): s for s in scores}
print(f"\nre-scoring under library v{updated.version}:")
for score in rescored:
    if score.pattern.entry_id == dropped:
        was = old[pattern_key(score)]
        print(f"  {score.pattern.entry_id} / {score.pattern.actor}: likelihood "
              f"{was.likelihood:.3f} -> {score.likelihood:.3f}, rank {score.rank}")

moved = [(s, old[pattern_key(s)].rank) for s in rescored
         if old[pattern_key(s)].rank != s.rank]
if moved:
    for score, was in moved:
        print(f"  {score.pattern.entry_id} / {score.pattern.actor}: "
              f"rank {was} -> {score.rank}")
else:
    print("  ranks are unchanged: the impact term still favors the top entry,")
    print("  even though the missed entry now carries the largest likelihood share")
