"""User-visible response polishing.

Two rewrite rules applied to the raw system response before it is shown
to the user: booking-information expansion and option suggestion.  The
polished text never enters the dialog history; the raw response does.
"""

from __future__ import annotations

from .engine import SystemTurn
from .kb import Database

_FIELD_LABELS = {
    "leave": "leave time",
    "arrive": "arrive time",
}

# trigger keyword -> slot whose example values get suggested
OPTION_KEYWORDS = (
    ("price range", "pricerange"),
    ("area", "area"),
    ("food", "food"),
    ("type", "type"),
)

_QUESTION_STARTS = ("which", "what", "where")


def _booking_expansion(turn: SystemTurn) -> str:
    parts = [
        f"{_FIELD_LABELS.get(slot, slot)}: {value}"
        for slot, value in turn.booking.fields.items()
        if slot != "ref"
    ]
    parts.append(f"reference number: {turn.booking.ref}")
    return (
        "booking was successful . "
        + ", ".join(parts)
        + " . is there anything else i can help with ?"
    )


def _option_examples(values: list[str]) -> str:
    if len(values) == 1:
        return values[0]
    if len(values) == 2:
        return f"{values[0]} or {values[1]}"
    return f"{values[0]}, {values[1]}, or {values[2]}"


def _option_suggestion(turn: SystemTurn, db: Database) -> str | None:
    text = turn.raw_response.strip()
    if not text.endswith("?"):
        return None
    first = text.split(" ", 1)[0]
    if first not in _QUESTION_STARTS:
        return None
    for keyword, slot in OPTION_KEYWORDS:
        if keyword in text:
            if turn.domain not in db.tables:
                return None
            values = db.distinct_values(turn.domain, slot)[:3]
            if not values:
                return None
            return f"{turn.raw_response} for example {_option_examples(values)} ?"
    return None


def polish(turn: SystemTurn, db: Database) -> str:
    """Return the user-visible form of a system turn's response."""
    if turn.booking is not None and turn.booking.success:
        return _booking_expansion(turn)
    suggested = _option_suggestion(turn, db)
    if suggested is not None:
        return suggested
    return turn.raw_response
