"""
Breach statistics from the bundled snapshot
===========================================

This walk-through loads the bundled 2009-2023 breach snapshot (synthetic,
shaped to match published aggregate figures) and reproduces the headline
descriptive statistics: individuals affected per entity type, the yearly
breach counts, the breach-type mix, and keyword-extracted response actions.
"""

from aca.cli import bundled_snapshot_path
from aca.ingest import parse_breach_file
from aca.stats import (
    breaches_by_type,
    breaches_per_year,
    grand_total_individuals,
    impact_distribution,
    individuals_by_entity_type,
    response_actions_by_entity,
)

records, issues = parse_breach_file(bundled_snapshot_path())
print(f"parsed {len(records)} records, {len(issues)} issues\n")

# individuals affected by entity type, largest first
print("individuals affected by entity type")
for row in individuals_by_entity_type(records):
    print(f"  {row.entity_type.value:<26} {row.total_individuals:>12,}  {row.percent_display:>6}%")
print(f"  {'total':<26} {grand_total_individuals(records):>12,}\n")

# yearly counts; the gap years, if any, show up as zeros
series = breaches_per_year(records)
peak = max(series.counts.values())
print("breaches per year")
for year in series.years:
    bar = "#" * round(40 * series.counts[year] / peak)
    print(f"  {year}  {series.counts[year]:>4}  {bar}")
print(f"  least-squares slope: {series.slope():+.1f} breaches/year\n")

# breach-type mix, attributed to each record's primary type
print("breaches by primary type")
for breach_type, count in sorted(breaches_by_type(records).items(), key=lambda kv: -kv[1]):
    print(f"  {breach_type.value:<32} {count:>5}")
print()

# response actions are keyword hits in the web descriptions, counted at most
# once per action per record, so they are indicative rather than exact
counts = response_actions_by_entity(records)
print("response actions by entity type (keyword extraction)")
for entity_type in counts.entity_types():
    print(f"  {entity_type.value:<26} {counts.total_for_entity(entity_type):>5}")
print()

# impact distribution over all records with a known individuals count
summary = impact_distribution(records, "overall")
print(
    f"impact per breach: min {summary.min:,}, median {summary.median:,.0f}, "
    f"mean {summary.mean:,.0f}, max {summary.max:,}"
)
