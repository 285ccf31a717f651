"""Provenance stamps tying derived artifacts back to their inputs.

Every artifact the toolkit writes records which dataset snapshot (by content
hash), threat-library version, and RNG seed produced it, so any number in a
report can be traced to exact inputs and reruns can be verified
byte-for-byte.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .errors import ProvenanceError
from .ingest import BreachRecord, normalized_csv_text


@dataclass(frozen=True)
class Provenance:
    """Inputs that produced an artifact; None fields did not apply."""

    snapshot_sha256: str
    library_version: int | None = None
    seed: int | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"snapshot_sha256": self.snapshot_sha256}
        if self.library_version is not None:
            out["library_version"] = self.library_version
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Provenance":
        try:
            snapshot = raw["snapshot_sha256"]
        except KeyError:
            raise ProvenanceError("provenance missing snapshot_sha256") from None
        if not isinstance(snapshot, str):
            raise ProvenanceError("snapshot_sha256 must be a string")
        version = raw.get("library_version")
        if version is not None and not isinstance(version, int):
            raise ProvenanceError("library_version must be an integer")
        seed = raw.get("seed")
        if seed is not None and not isinstance(seed, int):
            raise ProvenanceError("seed must be an integer")
        return cls(snapshot_sha256=snapshot, library_version=version, seed=seed)

    def comment_line(self) -> str:
        """One-line form used as a leading ``#`` comment in CSV artifacts."""
        parts = [f"snapshot_sha256={self.snapshot_sha256}"]
        if self.library_version is not None:
            parts.append(f"library_version={self.library_version}")
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        return "provenance: " + " ".join(parts)


def records_checksum(records: Iterable[BreachRecord]) -> str:
    """SHA-256 over the canonical normalized-CSV payload of ``records``.

    Hashing the canonical re-export rather than the raw file makes the
    checksum independent of source formatting quirks (BOM, comment lines,
    date style): two files that parse to the same records hash the same.
    """
    payload = normalized_csv_text(records)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def parse_comment_line(line: str) -> Provenance:
    """Parse a ``provenance:`` comment line back into a :class:`Provenance`."""
    text = line.strip().lstrip("#").strip()
    if not text.startswith("provenance:"):
        raise ProvenanceError(f"not a provenance comment: {line!r}")
    fields: dict[str, str] = {}
    for token in text[len("provenance:"):].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise ProvenanceError(f"malformed provenance field: {token!r}")
        fields[key] = value
    raw: dict[str, Any] = {}
    if "snapshot_sha256" in fields:
        raw["snapshot_sha256"] = fields["snapshot_sha256"]
    for int_key in ("library_version", "seed"):
        if int_key in fields:
            try:
                raw[int_key] = int(fields[int_key])
            except ValueError:
                raise ProvenanceError(
                    f"provenance field {int_key} is not an integer: {fields[int_key]!r}"
                ) from None
    return Provenance.from_dict(raw)
