"""Domain-adaptive delexicalization of system utterances.

Surface values are abstracted into placeholders of the form
``[value_<slot>]``; the same slot uses the same placeholder in every
domain.  Relexicalization fills placeholders back in from the booking
result, DB records and belief state (in that precedence).
"""

from __future__ import annotations

import re

from .belief import BeliefState
from .kb import BookingResult, EntityRecord
from .text import tokenize

DELEX_SLOTS = (
    "name",
    "type",
    "area",
    "pricerange",
    "food",
    "day",
    "time",
    "people",
    "stay",
    "ref",
    "phone",
    "address",
    "postcode",
    "id",
    "price",
    "departure",
    "destination",
    "leave",
    "arrive",
)

PLACEHOLDER = re.compile(r"\[value_([a-z_]+)\]")

# (slot, surface value) pairs in utterance order.
ValueMap = list[tuple[str, str]]


class UnfilledPlaceholder(ValueError):
    """A template placeholder has no value to fill it with."""


def placeholders(template: str) -> list[str]:
    return PLACEHOLDER.findall(template)


def _is_count(value: str) -> bool:
    return value.isdigit()


def _surface_variants(value: str) -> list[str]:
    # crude plural so "guesthouse" also abstracts "guesthouses"
    if value and value[-1].isalpha() and not value.endswith("s"):
        return [value, value + "s"]
    return [value]


def _candidate_values(
    belief: BeliefState, records: list[EntityRecord]
) -> list[tuple[list[str], str]]:
    """Collect (value tokens, slot) pairs worth abstracting."""
    pairs: list[tuple[str, str]] = []
    for rec in records:
        for slot, value in rec.attributes.items():
            pairs.append((slot, value))
    for slots in belief.values():
        for slot, value in slots.items():
            pairs.append((slot, value))
    out = []
    seen = set()
    for slot, value in pairs:
        if slot not in DELEX_SLOTS or value == "dontcare" or _is_count(value):
            continue
        for variant in _surface_variants(value):
            key = (slot, variant)
            if key not in seen:
                seen.add(key)
                out.append((tokenize(variant), slot))
    return out


def delexicalize(
    utterance: str,
    belief: BeliefState,
    records: list[EntityRecord],
) -> tuple[str, ValueMap]:
    """Abstract known surface values out of a system utterance.

    Matching is longest-first then left-to-right on token boundaries,
    without overlaps.  Bare counts are left literal.  Returns the
    template and the ordered (slot, surface) pairs it abstracted.
    """
    tokens = tokenize(utterance)
    candidates = _candidate_values(belief, records)
    matches: list[tuple[int, int, str]] = []  # (start, length, slot)
    for value_tokens, slot in candidates:
        n = len(value_tokens)
        for start in range(len(tokens) - n + 1):
            if tokens[start : start + n] == value_tokens:
                matches.append((start, n, slot))
    matches.sort(key=lambda m: (-m[1], m[0]))
    taken = [False] * len(tokens)
    chosen: list[tuple[int, int, str]] = []
    for start, n, slot in matches:
        if any(taken[start : start + n]):
            continue
        for i in range(start, start + n):
            taken[i] = True
        chosen.append((start, n, slot))
    chosen.sort()
    out: list[str] = []
    value_map: ValueMap = []
    pos = 0
    for start, n, slot in chosen:
        out.extend(tokens[pos:start])
        out.append(f"[value_{slot}]")
        value_map.append((slot, " ".join(tokens[start : start + n])))
        pos = start + n
    out.extend(tokens[pos:])
    return " ".join(out), value_map


def validate_template(template: str, available: set[str]) -> list[str]:
    """Placeholder slots that cannot be filled from `available`."""
    missing = []
    for slot in placeholders(template):
        if slot not in available and slot not in missing:
            missing.append(slot)
    return missing


def _ordered_unique(values: list[str]) -> list[str]:
    seen: dict[str, None] = {}
    for v in values:
        seen.setdefault(v, None)
    return list(seen)


def relexicalize(
    template: str,
    belief: BeliefState,
    domain: str,
    record: EntityRecord | list[EntityRecord] | None = None,
    booking: BookingResult | None = None,
    values: ValueMap | None = None,
    return_values: bool = False,
):
    """Fill template placeholders back in.

    With an explicit ValueMap the stored surface strings are consumed in
    order (exact inverse of delexicalize).  Otherwise lookup precedence
    is booking > record > belief[domain]; repeated placeholders of one
    slot consume distinct candidates when several exist.

    With return_values=True the result is (text, filled ValueMap).
    """
    filled: ValueMap = []
    if values is not None:
        queue = list(values)

        def fill_exact(m: re.Match) -> str:
            slot = m.group(1)
            for i, (s, surface) in enumerate(queue):
                if s == slot:
                    queue.pop(i)
                    filled.append((slot, surface))
                    return surface
            raise UnfilledPlaceholder(slot)

        text = PLACEHOLDER.sub(fill_exact, template)
        return (text, filled) if return_values else text

    records = record if isinstance(record, list) else [record] if record else []
    candidates: dict[str, list[str]] = {}
    for slot in set(placeholders(template)):
        pool: list[str] = []
        if booking is not None and slot in booking.fields:
            pool.append(booking.fields[slot])
        for rec in records:
            v = rec.get(slot)
            if v is not None:
                pool.append(v)
        v = belief.get(domain, {}).get(slot)
        if v is not None and v != "dontcare":
            pool.append(v)
        candidates[slot] = _ordered_unique(pool)

    counters: dict[str, int] = {}

    def fill(m: re.Match) -> str:
        slot = m.group(1)
        pool = candidates.get(slot) or []
        if not pool:
            raise UnfilledPlaceholder(slot)
        i = counters.get(slot, 0)
        counters[slot] = i + 1
        value = pool[min(i, len(pool) - 1)]
        filled.append((slot, value))
        return value

    text = PLACEHOLDER.sub(fill, template)
    return (text, filled) if return_values else text
