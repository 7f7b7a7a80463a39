"""Entity database: per-domain tables, constraint queries, match buckets,
deterministic booking."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .belief import DOMAINS

# Slots a DB query filters on; booking slots (people, time, stay, ...) are
# not record attributes in most domains and must not reach the query.
QUERYABLE_SLOTS = {
    "restaurant": ("name", "food", "pricerange", "area"),
    "hotel": ("name", "type", "pricerange", "area", "stars", "parking", "internet"),
    "attraction": ("name", "type", "area"),
    "train": ("departure", "destination", "day", "leave", "arrive"),
    "taxi": ("departure", "destination"),
    "police": ("name",),
    "hospital": ("department",),
}

REQUIRED_BOOKING_SLOTS = {
    "restaurant": ("time", "day", "people"),
    "hotel": ("day", "stay", "people"),
    "train": ("people",),
}

# Entity attributes echoed into BookingResult.fields, in display order.
BOOKING_FIELDS = {
    "restaurant": ("name", "time", "day", "people"),
    "hotel": ("name", "day", "stay", "people"),
    "train": ("departure", "destination", "leave", "people", "price"),
}

_REF_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"


class UnknownDomain(KeyError):
    """Queried domain has no table in the database."""


@dataclass(frozen=True)
class EntityRecord:
    domain: str
    attributes: dict[str, str]

    def get(self, slot: str) -> str | None:
        return self.attributes.get(slot)


@dataclass(frozen=True)
class DbMatch:
    count: int

    @property
    def bucket(self) -> str:
        return str(self.count) if self.count <= 3 else ">3"


@dataclass(frozen=True)
class BookingResult:
    success: bool
    ref: str = ""
    fields: dict[str, str] = field(default_factory=dict)


class Database:
    """Immutable per-domain entity tables loaded from JSON files."""

    def __init__(self, tables: dict[str, list[EntityRecord]]):
        self.tables = tables

    @classmethod
    def load(cls, db_dir: str | Path) -> "Database":
        """Load every ``<domain>_db.json`` file found in db_dir."""
        tables: dict[str, list[EntityRecord]] = {}
        for domain in DOMAINS:
            path = Path(db_dir) / f"{domain}_db.json"
            if not path.exists():
                continue
            rows = json.loads(path.read_text(encoding="utf-8"))
            tables[domain] = [
                EntityRecord(domain, {k: str(v).lower() for k, v in row.items()})
                for row in rows
            ]
        return cls(tables)

    def domains(self) -> list[str]:
        return list(self.tables)

    def _table(self, domain: str) -> list[EntityRecord]:
        try:
            return self.tables[domain]
        except KeyError:
            raise UnknownDomain(domain) from None

    def query(
        self, domain: str, constraints: dict[str, str]
    ) -> tuple[DbMatch, list[EntityRecord]]:
        """Return the match bucket and all records satisfying constraints.

        A record matches iff every constraint slot equals its attribute;
        the value "dontcare" matches anything; a constraint slot absent
        from the record fails the match.
        """
        matches = [
            rec
            for rec in self._table(domain)
            if all(
                value == "dontcare" or rec.get(slot) == value
                for slot, value in constraints.items()
            )
        ]
        return DbMatch(len(matches)), matches

    def book(
        self,
        domain: str,
        constraints: dict[str, str],
        booking_slots: dict[str, str],
        rng_seed: int = 0,
    ) -> BookingResult:
        """Book the first matching record; the reference is a pure function
        of (seed, domain, record id)."""
        _, matches = self.query(domain, constraints)
        if not matches:
            return BookingResult(success=False)
        record = matches[0]
        record_id = record.get("id") or record.get("name") or "0"
        digest = hashlib.sha256(
            f"{rng_seed}:{domain}:{record_id}".encode()
        ).digest()
        ref = "".join(_REF_ALPHABET[b % len(_REF_ALPHABET)] for b in digest[:8])
        fields = {}
        for slot in BOOKING_FIELDS.get(domain, ()):
            value = booking_slots.get(slot) or record.get(slot)
            if value:
                fields[slot] = value
        fields["ref"] = ref
        return BookingResult(success=True, ref=ref, fields=fields)

    def distinct_values(self, domain: str, slot: str) -> list[str]:
        """Unique values of slot across the domain table, in table order."""
        seen: dict[str, None] = {}
        for rec in self._table(domain):
            value = rec.get(slot)
            if value is not None:
                seen.setdefault(value, None)
        return list(seen)
