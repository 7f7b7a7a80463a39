"""Belief-state grammar (parse / repair / serialize) and turn-domain tracking.

A belief state is a per-domain map of slot constraints.  The canonical
surface form is::

    restaurant { time = 13:00 , people = 4 } train { day = tuesday }

The parser additionally accepts ``:`` as the pair separator and blocks
without a leading domain name.
"""

from __future__ import annotations

import re

DOMAINS = (
    "restaurant",
    "hotel",
    "attraction",
    "train",
    "taxi",
    "police",
    "hospital",
    "general",
)

# Canonical slot ordering used by serialize_belief.  Slots not listed are
# appended alphabetically.
SLOT_ORDER = (
    "name",
    "food",
    "pricerange",
    "type",
    "area",
    "stars",
    "parking",
    "internet",
    "departure",
    "destination",
    "day",
    "leave",
    "arrive",
    "time",
    "people",
    "stay",
    "department",
)

BeliefState = dict[str, dict[str, str]]


class MalformedBelief(ValueError):
    """Raised when a belief string cannot be parsed."""


def _slot_key(slot: str):
    try:
        return (0, SLOT_ORDER.index(slot))
    except ValueError:
        return (1, slot)


def _split_blocks(text: str) -> list[tuple[str, str]]:
    """Split into (domain_or_empty, block_body) pairs.

    The domain of a bare ``{...}`` block is the word immediately before
    it, or empty when there is none.
    """
    depth = 0
    for ch in text:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if depth not in (0, 1):
            raise MalformedBelief(f"unbalanced braces in belief: {text!r}")
    if depth != 0:
        raise MalformedBelief(f"unbalanced braces in belief: {text!r}")

    blocks = []
    pos = 0
    for m in re.finditer(r"([a-z_]+)?\s*\{([^{}]*)\}", text):
        between = text[pos : m.start()].strip()
        if between:
            raise MalformedBelief(f"stray text {between!r} in belief")
        blocks.append((m.group(1) or "", m.group(2)))
        pos = m.end()
    if text[pos:].strip():
        raise MalformedBelief(f"stray text {text[pos:].strip()!r} in belief")
    return blocks


def _parse_pair(fragment: str) -> tuple[str, str]:
    m = re.search(r"[=:]", fragment)
    if m is None:
        raise MalformedBelief(f"fragment {fragment!r} is not a slot-value pair")
    slot = fragment[: m.start()].strip()
    value = fragment[m.end() :].strip()
    if not slot or not value:
        raise MalformedBelief(f"empty slot or value in fragment {fragment!r}")
    return slot, value


def parse_belief(text: str, default_domain: str = "general") -> BeliefState:
    """Parse a belief string into a per-domain constraint map.

    Blocks without an explicit domain name are attributed to
    ``default_domain``.  Raises MalformedBelief on unbalanced braces or
    fragments that are not ``slot = value`` / ``slot : value`` pairs.
    """
    state: BeliefState = {}
    for domain, body in _split_blocks(text.strip()):
        domain = domain or default_domain
        if domain not in DOMAINS:
            raise MalformedBelief(f"unknown domain {domain!r}")
        slots = state.setdefault(domain, {})
        body = body.strip()
        if not body:
            continue
        for fragment in body.split(","):
            slot, value = _parse_pair(fragment)
            slots[slot] = value
    return {d: s for d, s in state.items() if s}


def repair_belief(text: str) -> str:
    """Best-effort repair of a malformed belief string.

    Comma-separated fragments inside a block that do not look like a
    slot-value pair are rejoined into the preceding value.  Returns the
    input unchanged when the result still does not parse.
    """
    try:
        parse_belief(text)
        return text
    except MalformedBelief:
        pass

    def rejoin(body: str) -> str:
        fragments: list[str] = []
        for frag in body.split(","):
            if re.search(r"[=:]", frag) is None and fragments:
                fragments[-1] = fragments[-1].rstrip() + " " + frag.strip()
            else:
                fragments.append(frag.strip())
        return " , ".join(fragments)

    try:
        repaired = re.sub(
            r"\{([^{}]*)\}", lambda m: "{ " + rejoin(m.group(1)) + " }", text
        )
    except re.error:  # pragma: no cover
        return text
    try:
        parse_belief(repaired)
        return repaired
    except MalformedBelief:
        return text


def serialize_belief(state: BeliefState) -> str:
    """Render a belief state in canonical form.

    Domains follow the fixed enumeration order, slots the fixed slot
    order; pairs use ``=``.  The empty state serializes to "".
    """
    parts = []
    for domain in DOMAINS:
        slots = state.get(domain)
        if not slots:
            continue
        pairs = " , ".join(
            f"{s} = {slots[s]}" for s in sorted(slots, key=_slot_key)
        )
        parts.append(f"{domain} {{ {pairs} }}")
    return " ".join(parts)


def _changed_slots(prev: dict[str, str], cur: dict[str, str]) -> int:
    changed = sum(1 for s, v in cur.items() if prev.get(s) != v)
    deleted = sum(1 for s in prev if s not in cur)
    return changed + deleted


def compute_turn_domain(
    prev: BeliefState, cur: BeliefState, prev_domain: str = "general"
) -> str:
    """Derive the turn domain from the belief-state delta.

    Every domain in ``cur`` with a non-empty constraint map that is new
    or differs from ``prev`` is a candidate.  With no candidates the
    previous turn domain is inherited.  Among several candidates the one
    with the most added/updated/deleted slots wins, remaining ties break
    by the fixed domain order.
    """
    candidates = [
        d
        for d in cur
        if cur[d] and (d not in prev or prev[d] != cur[d])
    ]
    if not candidates:
        return prev_domain
    return max(
        candidates,
        key=lambda d: (_changed_slots(prev.get(d, {}), cur[d]), -DOMAINS.index(d)),
    )
