"""
The threat library and the breach-to-threat mapping
===================================================

The threat library is a small versioned taxonomy: nine entries across four
attacker categories (Physical, ThirdParty, External, Internal), each with a
description and the actors behind it. This script prints the library, shows
how individual breach records map onto it, and demonstrates the
business-associate override and the unclassified bucket.
"""

from collections import Counter

from aca.cli import bundled_snapshot_path
from aca.ingest import parse_breach_file
from aca.library import default_library, map_breach_to_threat
from aca.pipeline import profile_actors

library = default_library()
print(f"threat library v{library.version}, {len(library.entries)} entries\n")
for entry in library.entries:
    print(f"  [{entry.category.value}] {entry.threat_type}  (id: {entry.id})")
    print(f"      {entry.description}")
    print(f"      actors: {', '.join(entry.actors)}")
print()

records, _ = parse_breach_file(bundled_snapshot_path())

# each record maps by its primary breach type; a business associate in the
# middle moves the category to ThirdParty while keeping the entry
example = next(r for r in records if not r.business_associate_present and
               map_breach_to_threat(r, library).is_classified)
mapping = map_breach_to_threat(example, library)
print(f"example: {example.entity_name} / {example.primary_breach_type.value}")
print(f"  -> entry {mapping.entry_id}, category {mapping.category.value}, "
      f"ba_override={mapping.ba_override}\n")

ba_example = next(r for r in records if r.business_associate_present and
                  map_breach_to_threat(r, library).is_classified)
ba_mapping = map_breach_to_threat(ba_example, library)
print(f"with business associate: {ba_example.entity_name} / "
      f"{ba_example.primary_breach_type.value}")
print(f"  -> entry {ba_mapping.entry_id}, category {ba_mapping.category.value}, "
      f"ba_override={ba_mapping.ba_override}\n")

# where the whole snapshot lands
by_entry = Counter()
unclassified = 0
for record in records:
    m = map_breach_to_threat(record, library)
    if m.is_classified:
        by_entry[m.entry_id] += 1
    else:
        unclassified += 1
print("snapshot mapping totals")
for entry_id, count in by_entry.most_common():
    print(f"  {entry_id:<34} {count:>5}")
print(f"  {'(unclassified: Other/Unknown)':<34} {unclassified:>5}  "
      f"({100 * unclassified / len(records):.2f}%)\n")

# actor profiles: category membership, motivation tag, observed tactics
print("actor profiles")
for profile in profile_actors(library, records):
    categories = "/".join(sorted(c.value for c in profile.categories))
    tactics = ", ".join(t.value for t in profile.tactics) or "none observed"
    print(f"  {profile.actor:<22} {categories:<12} {profile.motivation:<13} {tactics}")
