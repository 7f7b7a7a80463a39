"""Corpus loading, cleaning and training-sample construction.

Raw dialogs arrive as ordered speaker events (JSONL, one dialog per
line).  Cleaning lowercases everything, merges consecutive same-speaker
utterances, aligns the events into strict (user, system) turns and
normalizes slot aliases in the belief annotations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .belief import BeliefState, compute_turn_domain, parse_belief, serialize_belief
from .kb import Database, DbMatch, QUERYABLE_SLOTS
from .lexicon import delexicalize
from .seqmodel import TurnSample, flatten
from .text import tokenize

DEFAULT_ALIASES = {
    "pickup_location": "departure",
    "leaveat": "leave",
    "leave_at": "leave",
    "arriveby": "arrive",
    "arrive_by": "arrive",
    "price_range": "pricerange",
    "addr": "address",
    "post": "postcode",
    "trainid": "id",
    "train_id": "id",
    "reference": "ref",
    "dropoff_location": "destination",
    "book_people": "people",
    "book_day": "day",
    "book_time": "time",
    "book_stay": "stay",
}


class EmptyDialog(ValueError):
    """No complete (user, system) pair survived normalization."""


@dataclass(frozen=True)
class RawEvent:
    speaker: str  # "user" or "system"
    text: str
    belief: str | None = None


@dataclass(frozen=True)
class RawDialog:
    id: str
    events: list[RawEvent]


@dataclass(frozen=True)
class DialogTurn:
    user: str
    system: str
    belief: BeliefState
    turn_domain: str


@dataclass(frozen=True)
class Dialog:
    id: str
    turns: list[DialogTurn]


@dataclass(frozen=True)
class SlotNormalizer:
    alias_map: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_ALIASES))

    def slot(self, name: str) -> str:
        return self.alias_map.get(name, name)

    def belief(self, state: BeliefState) -> BeliefState:
        return {
            domain: {self.slot(s): v for s, v in slots.items()}
            for domain, slots in state.items()
        }


def load_raw_corpus(path: str | Path) -> list[RawDialog]:
    dialogs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            events = [
                RawEvent(e["speaker"], e["text"], e.get("belief"))
                for e in obj["events"]
            ]
            dialogs.append(RawDialog(obj["id"], events))
    return dialogs


def _merge_events(events: list[RawEvent]) -> list[RawEvent]:
    merged: list[RawEvent] = []
    for ev in events:
        text = " ".join(ev.text.lower().split())
        belief = ev.belief.lower().strip() if ev.belief else None
        if merged and merged[-1].speaker == ev.speaker:
            prev = merged[-1]
            merged[-1] = RawEvent(
                ev.speaker,
                (prev.text + " " + text).strip(),
                belief or prev.belief,
            )
        else:
            merged.append(RawEvent(ev.speaker, text, belief))
    return merged


def normalize_dialog(
    raw: RawDialog, norm: SlotNormalizer | None = None
) -> Dialog:
    """Clean a raw dialog into strictly alternating (user, system) turns."""
    norm = norm or SlotNormalizer()
    merged = _merge_events(raw.events)
    if merged and merged[0].speaker == "system":
        merged = merged[1:]
    if merged and merged[-1].speaker == "user":
        merged = merged[:-1]
    if len(merged) < 2:
        raise EmptyDialog(raw.id)

    turns = []
    prev_belief: BeliefState = {}
    prev_domain = "general"
    for user_ev, sys_ev in zip(merged[0::2], merged[1::2]):
        annotation = sys_ev.belief or user_ev.belief or ""
        belief = norm.belief(parse_belief(annotation))
        domain = compute_turn_domain(prev_belief, belief, prev_domain)
        turns.append(DialogTurn(user_ev.text, sys_ev.text, belief, domain))
        prev_belief, prev_domain = belief, domain
    return Dialog(raw.id, turns)


def dialog_to_raw(d: Dialog) -> RawDialog:
    """Re-export a cleaned dialog as raw events (used for idempotence checks
    and for writing cleaned corpora back to disk)."""
    events = []
    for turn in d.turns:
        events.append(RawEvent("user", turn.user))
        events.append(RawEvent("system", turn.system, serialize_belief(turn.belief)))
    return RawDialog(d.id, events)


def _truncate_head(text: str, budget: int) -> str:
    tokens = tokenize(text)
    return " ".join(tokens[-budget:]) if budget > 0 else ""


def build_training_turns(
    d: Dialog, max_tokens: int = 512, db: Database | None = None
) -> list[TurnSample]:
    """One TurnSample per dialog turn, flattened length capped at max_tokens.

    History keeps as many most-recent prior turns as fit; an over-long
    single turn is head-truncated, never dropped.  With a database the
    DB match is computed from the turn belief and the system response is
    delexicalized; without one the match count is 0 and the response is
    kept literal.
    """
    samples = []
    for k, turn in enumerate(d.turns):
        history: list[tuple[str, str]] = []
        for prior in d.turns[:k]:
            history.append(("user", prior.user))
            history.append(("system", prior.system))
        history.append(("user", turn.user))

        records = []
        if db is not None and turn.turn_domain in db.tables:
            queryable = QUERYABLE_SLOTS.get(turn.turn_domain, ())
            constraints = {
                s: v
                for s, v in turn.belief.get(turn.turn_domain, {}).items()
                if s in queryable
            }
            match, records = db.query(turn.turn_domain, constraints)
        else:
            match = DbMatch(0)
        response, _ = delexicalize(turn.system, turn.belief, records)

        sample = TurnSample(
            history=history,
            domain=turn.turn_domain,
            belief=turn.belief,
            db=match,
            response=response,
        )
        while len(flatten(sample)) > max_tokens and len(sample.history) > 1:
            sample = sample.replace(history=sample.history[1:])
        overflow = len(flatten(sample)) - max_tokens
        if overflow > 0:
            role, utt = sample.history[0]
            budget = len(tokenize(utt)) - overflow
            sample = sample.replace(
                history=[(role, _truncate_head(utt, budget))] + sample.history[1:]
            )
        samples.append(sample)
    return samples


def build_pretrain_corpus(
    dialogs: list[Dialog], max_tokens: int = 512
) -> list[list[str]]:
    """Chunks of raw utterances (no belief, no DB state), each within
    max_tokens, split at utterance boundaries within a dialog."""
    chunks: list[list[str]] = []
    for d in dialogs:
        utterances = []
        for turn in d.turns:
            utterances.append(turn.user)
            utterances.append(turn.system)
        current: list[str] = []
        size = 0
        for utt in utterances:
            n = len(tokenize(utt))
            if n > max_tokens:
                utt = " ".join(tokenize(utt)[:max_tokens])
                n = max_tokens
            if current and size + n > max_tokens:
                chunks.append(current)
                current, size = [], 0
            current.append(utt)
            size += n
        if current:
            chunks.append(current)
    return chunks
