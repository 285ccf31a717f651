#!/usr/bin/env python3
"""Generate the bundled synthetic breach snapshot.

The repository ships a synthetic stand-in for the HHS OCR breach-portal
export: 4,753 rows over 2009-2023 whose per-entity individuals-affected
totals, yearly trend shape, and breach-type era mix match the published
aggregate figures exactly. Entity names are unmistakably fictitious
("Sample ... 0123"); no row describes a real filing.

The build is fully deterministic (fixed seed) and self-verifying: the rows
are parsed back through the package and every pinned aggregate is asserted
before anything is written.
"""

from __future__ import annotations

import argparse
import csv
import io
import random
import sys
from pathlib import Path

SRC = Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from aca import ingest, stats  # noqa: E402
from aca.library import default_library, map_breach_to_threat  # noqa: E402

SEED = 20240117

DEFAULT_OUT = SRC / "aca" / "data" / "breach_snapshot_2009_2023.csv"

HEADER_COMMENTS = [
    "synthetic breach snapshot: statistically shaped sample data, not real HHS OCR filings",
    "entity names are fictitious; aggregate totals match published 2009-2023 figures",
]

# (row count, individuals-affected total, lognormal sigma) per entity type
ENTITY_PLAN = {
    "Healthcare Provider": (3420, 128_119_527, 2.0),
    "Health Plan": (610, 124_591_430, 2.4),
    "Business Associate": (710, 68_094_158, 2.2),
    "Healthcare Clearinghouse": (13, 83_486, 1.0),
}

MIN_IMPACT = 500  # the portal only publishes breaches of 500+ individuals

YEARS = range(2009, 2024)


def year_weight(year: int) -> int:
    return 60 + 12 * (year - 2009) + (80 if year >= 2019 else 0)


# Era-dependent primary breach-type mix (weights, not probabilities).
TYPE_MIX = {
    "early": {  # 2009-2014: device theft era
        "Theft": 45, "Loss": 15, "Unauthorized Access/Disclosure": 20,
        "Improper Disposal": 6, "Hacking/IT Incident": 12, "Other": 2,
    },
    "middle": {  # 2015-2018
        "Hacking/IT Incident": 35, "Unauthorized Access/Disclosure": 35,
        "Theft": 15, "Loss": 8, "Improper Disposal": 5, "Other": 2,
    },
    "late": {  # 2019-2023: hacking dominates
        "Hacking/IT Incident": 68, "Unauthorized Access/Disclosure": 22,
        "Theft": 4, "Loss": 3, "Improper Disposal": 2, "Other": 1,
    },
}

SECONDARY_TYPES = {
    "Theft": ["Loss"],
    "Loss": ["Theft"],
    "Hacking/IT Incident": ["Unauthorized Access/Disclosure"],
    "Unauthorized Access/Disclosure": ["Theft", "Loss"],
    "Improper Disposal": ["Loss"],
    "Other": [],
}

LOCATION_MIX = {
    "Hacking/IT Incident": {
        "Network Server": 45, "Email": 35, "Electronic Medical Record": 8,
        "Desktop Computer": 6, "Other": 4, "Other Portable Electronic Device": 2,
    },
    "Theft": {
        "Laptop": 40, "Other Portable Electronic Device": 20, "Desktop Computer": 15,
        "Paper/Films": 15, "Other": 8, "Network Server": 2,
    },
    "Loss": {
        "Paper/Films": 30, "Other Portable Electronic Device": 30, "Laptop": 25,
        "Other": 10, "Email": 5,
    },
    "Unauthorized Access/Disclosure": {
        "Paper/Films": 25, "Email": 25, "Electronic Medical Record": 25,
        "Network Server": 10, "Other": 8, "Desktop Computer": 7,
    },
    "Improper Disposal": {
        "Paper/Films": 70, "Other": 15, "Desktop Computer": 10,
        "Other Portable Electronic Device": 5,
    },
    "Other": {
        "Other": 50, "Paper/Films": 20, "Network Server": 10, "Email": 10, "Laptop": 10,
    },
}

BA_PRESENT_RATE = {
    "Healthcare Provider": 0.18,
    "Health Plan": 0.25,
    "Business Associate": 0.85,
    "Healthcare Clearinghouse": 0.30,
}

STATES = {
    "CA": 11, "TX": 9, "NY": 8, "FL": 8, "IL": 6, "PA": 6, "OH": 5, "GA": 4,
    "NC": 4, "MI": 4, "NJ": 3, "VA": 3, "WA": 3, "MA": 3, "TN": 3, "IN": 3,
    "MO": 3, "MN": 2, "AZ": 2, "WI": 2, "CO": 2, "MD": 2, "KY": 2, "OR": 2,
}

NAME_PARTS = {
    "Healthcare Provider": (
        ("Sample", "Example", "Demo", "Test"),
        ("Medical Center", "Health Clinic", "Hospital", "Family Practice",
         "Health System", "Care Group", "Surgery Center", "Wellness Center"),
    ),
    "Health Plan": (
        ("Sample", "Example", "Demo", "Test"),
        ("Health Plan", "Benefit Plan", "Insurance Group", "Managed Care Plan"),
    ),
    "Business Associate": (
        ("Sample", "Example", "Demo", "Test"),
        ("Billing Services", "Data Services", "IT Solutions", "Records Management",
         "Claims Processing", "Transcription Services"),
    ),
    "Healthcare Clearinghouse": (
        ("Sample", "Example"),
        ("Clearinghouse", "Claims Clearinghouse"),
    ),
}

INCIDENT_SENTENCES = {
    "Hacking/IT Incident": [
        "An unauthorized party gained access to systems containing protected health information.",
        "A ransomware incident affected systems storing patient data.",
        "A phishing message led to unauthorized access to an email account.",
        "Suspicious network activity was identified on a server holding patient records.",
    ],
    "Theft": [
        "A device containing patient information was stolen from the facility.",
        "An unencrypted laptop was stolen from an employee{APOS}s vehicle.",
        "Computer equipment holding health records was taken during a break-in.",
    ],
    "Loss": [
        "A portable device containing patient information could not be located.",
        "Paper records were lost in transit between facilities.",
        "A backup drive containing health information went missing.",
    ],
    "Unauthorized Access/Disclosure": [
        "A workforce member accessed records without a permissible purpose.",
        "Patient information was disclosed to an unintended recipient.",
        "Records were viewable by individuals without authorization for a period of time.",
    ],
    "Improper Disposal": [
        "Paper records were discarded without shredding.",
        "Documents containing patient information were found in an unsecured disposal bin.",
    ],
    "Other": [
        "An incident involving patient information was reported.",
        "A privacy incident affecting health records was identified.",
    ],
}

RESPONSE_PHRASES = {
    "safeguards": [
        "implemented additional technical safeguards",
        "put new administrative safeguards in place",
    ],
    "notify": [
        "notified all affected individuals by mail",
        "provided notification to individuals and prominent media",
    ],
    "training": [
        "retrained workforce members on privacy requirements",
        "conducted additional security awareness training",
    ],
    "policies": [
        "revised its policies and procedures",
        "updated access control procedures",
    ],
    "encryption": [
        "deployed encryption on portable devices",
        "encrypted the affected systems",
    ],
}

FILLER_SENTENCES = [
    "The incident was reported to law enforcement.",
    "A third-party forensic firm assisted with the investigation.",
    "The organization{APOS}s incident response team contained the issue.",
    "Access to the affected system was suspended during the review.",
]


def apportion(total: int, weights: dict) -> dict:
    """Largest-remainder apportionment of ``total`` across weighted keys."""
    weight_sum = sum(weights.values())
    raw = {key: total * w / weight_sum for key, w in weights.items()}
    counts = {key: int(q) for key, q in raw.items()}
    leftover = total - sum(counts.values())
    by_fraction = sorted(weights, key=lambda k: (-(raw[k] - counts[k]), str(k)))
    for key in by_fraction[:leftover]:
        counts[key] += 1
    return counts


def impact_list(rng: random.Random, n: int, target: int, sigma: float) -> list[int]:
    """n values >= MIN_IMPACT summing exactly to target, lognormal-shaped."""
    budget = target - MIN_IMPACT * n
    assert budget > 0, "target too small for row count"
    extras = [rng.lognormvariate(8.0, sigma) for _ in range(n)]
    scale = budget / sum(extras)
    values = [MIN_IMPACT + int(extra * scale) for extra in extras]
    residual = target - sum(values)
    values[values.index(max(values))] += residual
    return values


def pick(rng: random.Random, table: dict):
    keys = list(table)
    return rng.choices(keys, weights=[table[k] for k in keys])[0]


def era(year: int) -> str:
    if year <= 2014:
        return "early"
    if year <= 2018:
        return "middle"
    return "late"


def smart_punct(rng: random.Random, text: str) -> str:
    # A slice of rows uses typographic apostrophes, as the real export does.
    return text.replace("{APOS}", "’" if rng.random() < 0.5 else "'")


def build_description(rng: random.Random, breach_type: str, entity_type: str) -> str:
    present_rate = 0.75 if entity_type == "Healthcare Provider" else 0.65
    if rng.random() > present_rate:
        return ""
    sentences = [smart_punct(rng, rng.choice(INCIDENT_SENTENCES[breach_type]))]
    if rng.random() < 0.35:
        sentences.append(smart_punct(rng, rng.choice(FILLER_SENTENCES)))
    n_weights = (15, 35, 35, 15) if entity_type == "Healthcare Provider" else (25, 40, 30, 5)
    n_actions = rng.choices((0, 1, 2, 3), weights=n_weights)[0]
    actions = rng.sample(sorted(RESPONSE_PHRASES), k=n_actions)
    if actions:
        phrases = [rng.choice(RESPONSE_PHRASES[a]) for a in actions]
        if len(phrases) == 1:
            joined = phrases[0]
        else:
            joined = ", ".join(phrases[:-1]) + " and " + phrases[-1]
        sentences.append(f"In response, the organization {joined}.")
    return " ".join(sentences)


def build_rows(rng: random.Random) -> list[list[str]]:
    entity_labels: list[str] = []
    impacts: dict[str, list[int]] = {}
    for entity_type, (count, target, sigma) in ENTITY_PLAN.items():
        entity_labels.extend([entity_type] * count)
        impacts[entity_type] = impact_list(rng, count, target, sigma)
    rng.shuffle(entity_labels)

    total_rows = len(entity_labels)
    year_quota = apportion(total_rows, {year: year_weight(year) for year in YEARS})
    year_labels = [year for year in YEARS for _ in range(year_quota[year])]

    name_seq = {entity_type: 0 for entity_type in ENTITY_PLAN}
    impact_idx = {entity_type: 0 for entity_type in ENTITY_PLAN}
    rows = []
    for entity_type, year in zip(entity_labels, year_labels):
        breach_type = pick(rng, TYPE_MIX[era(year)])
        type_cell = breach_type
        if rng.random() < 0.03 and SECONDARY_TYPES[breach_type]:
            type_cell = f"{breach_type}, {rng.choice(SECONDARY_TYPES[breach_type])}"

        location = pick(rng, LOCATION_MIX[breach_type])
        location_cell = location
        if rng.random() < 0.04:
            extra = pick(rng, LOCATION_MIX[breach_type])
            if extra != location:
                location_cell = f"{location}, {extra}"

        name_seq[entity_type] += 1
        prefixes, kinds = NAME_PARTS[entity_type]
        name = (
            f"{prefixes[name_seq[entity_type] % len(prefixes)]} "
            f"{kinds[name_seq[entity_type] % len(kinds)]} "
            f"{name_seq[entity_type]:04d}"
        )
        if rng.random() < 0.05:
            name += ", Inc." if rng.random() < 0.5 else ", LLC"

        impact = impacts[entity_type][impact_idx[entity_type]]
        impact_idx[entity_type] += 1

        rows.append(
            [
                name,
                pick(rng, STATES),
                entity_type,
                str(impact),
                f"{rng.randint(1, 12)}/{rng.randint(1, 28)}/{year}",
                type_cell,
                location_cell,
                "Yes" if rng.random() < BA_PRESENT_RATE[entity_type] else "No",
                build_description(rng, breach_type, entity_type),
            ]
        )

    # Portal exports list newest first; sort key covers the full row for determinism.
    def sort_key(row: list[str]) -> tuple:
        month, day, year = row[4].split("/")
        return (-int(year), -int(month), -int(day), row[0])

    rows.sort(key=sort_key)
    return rows


def render_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    for comment in HEADER_COMMENTS:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ingest.REQUIRED_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def verify(text: str) -> None:
    """Parse the rendered CSV back and assert every pinned aggregate."""
    records, issues = ingest.parse_breach_csv(io.StringIO(text))
    assert len(records) == 4753, f"expected 4753 records, got {len(records)}"
    assert not issues, f"expected a clean parse, got {len(issues)} issues"

    rows = stats.individuals_by_entity_type(records)
    expected = {
        "Healthcare Provider": (128_119_527, "39.93"),
        "Health Plan": (124_591_430, "38.83"),
        "Business Associate": (68_094_158, "21.22"),
        "Healthcare Clearinghouse": (83_486, "0.03"),
    }
    assert len(rows) == 4
    for row in rows:
        total, percent = expected[row.entity_type.value]
        assert row.total_individuals == total, (row.entity_type, row.total_individuals)
        assert row.percent_display == percent, (row.entity_type, row.percent_display)
    assert stats.grand_total_individuals(records) == 320_888_601

    yearly = stats.breaches_per_year(records)
    assert yearly.years == list(YEARS)
    early = sum(yearly.count(y) for y in (2009, 2010, 2011))
    late = sum(yearly.count(y) for y in (2019, 2020, 2021))
    assert late > early, (early, late)
    assert yearly.slope() > 0

    late_records = [r for r in records if r.submission_year >= 2019]
    late_counts = stats.breaches_by_type(late_records)
    assert max(late_counts, key=late_counts.get) is ingest.BreachType.HACKING_IT_INCIDENT

    responses = stats.response_actions_by_entity(records)
    totals = {et: responses.total_for_entity(et) for et in responses.entity_types()}
    top_entity = max(totals, key=totals.get)
    assert top_entity is ingest.EntityType.HEALTHCARE_PROVIDER, totals

    library = default_library()
    unclassified = sum(
        1 for r in records if not map_breach_to_threat(r, library).is_classified
    )
    assert unclassified / len(records) < 0.05, unclassified

    assert all(
        r.individuals_affected is not None and r.individuals_affected >= MIN_IMPACT
        for r in records
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = parser.parse_args()

    rng = random.Random(SEED)
    text = render_csv(build_rows(rng))
    verify(text)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(text, encoding="utf-8")
    print(f"wrote {args.out} ({text.count(chr(10)) - len(HEADER_COMMENTS) - 1} data rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
