"""Per-session dialog loop with decode-time fault tolerance.

Each turn runs two stages: 1) generate and parse the turn domain and
belief state (repairing or regenerating at a larger beam on failure),
2) query the database and generate a response template, accepting only
candidates that validate against the available slots and are not a
near-repeat of the previous system response.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .belief import BeliefState, MalformedBelief, parse_belief, repair_belief, serialize_belief
from .editdist import similarity
from .kb import (
    BookingResult,
    Database,
    DbMatch,
    EntityRecord,
    QUERYABLE_SLOTS,
    REQUIRED_BOOKING_SLOTS,
)
from .lexicon import UnfilledPlaceholder, ValueMap, relexicalize, validate_template
from .seqmodel import DMN, EOB, EOKB, EOS, SOB, GeneratorBackend, beam_generate
from .text import tokenize

BEAM_SCHEDULE = (1, 4, 8)
REPETITION_THRESHOLD = 0.9
FALLBACK_RESPONSE = "i am sorry , could you rephrase that ?"
MAX_BELIEF_LEN = 128
MAX_RESPONSE_LEN = 128


@dataclass
class Session:
    id: str
    history: list[tuple[str, str]] = field(default_factory=list)
    last_system_raw: str = ""
    prev_belief: BeliefState = field(default_factory=dict)
    prev_domain: str = "general"
    rng_seed: int = 0


@dataclass(frozen=True)
class SystemTurn:
    belief: BeliefState
    domain: str
    db: DbMatch
    record: EntityRecord | None
    booking: BookingResult | None
    template: str
    raw_response: str
    value_map: ValueMap
    tolerance_events: list[str]


def check_repetition(
    candidate: str, last_system: str, threshold: float = REPETITION_THRESHOLD
) -> bool:
    """True iff the candidate is a near-repeat of the last system response."""
    if not last_system:
        return False
    return similarity(candidate, last_system) >= threshold


def _history_tokens(history: list[tuple[str, str]]) -> list[str]:
    tokens: list[str] = []
    for role, utt in history:
        tokens.append(role)
        tokens.append(":")
        tokens.extend(tokenize(utt))
    return tokens


class DialogEngine:
    """Stateless response generator over an immutable backend and database;
    all per-conversation state lives in the Session."""

    def __init__(self, backend: GeneratorBackend, db: Database):
        self.backend = backend
        self.db = db

    # -- stage 1: domain + belief -----------------------------------------

    def _parse_belief_candidate(
        self, tokens: list[str], events: list[str]
    ) -> tuple[str, BeliefState] | None:
        if len(tokens) < 2 or tokens[0] != DMN:
            return None
        domain = tokens[1]
        body = tokens[2:]
        if body and body[-1] == EOB:
            body = body[:-1]
        text = " ".join(body)
        try:
            return domain, parse_belief(text, default_domain=domain)
        except MalformedBelief:
            repaired = repair_belief(text)
            if repaired != text:
                try:
                    state = parse_belief(repaired, default_domain=domain)
                except MalformedBelief:
                    return None
                if "belief_repaired" not in events:
                    events.append("belief_repaired")
                return domain, state
            return None

    def _predict_belief(
        self, prefix: list[str], session: Session, events: list[str]
    ) -> tuple[str, BeliefState]:
        for stage, beam in enumerate(BEAM_SCHEDULE):
            if stage > 0 and "belief_regenerated" not in events:
                events.append("belief_regenerated")
            candidates = beam_generate(
                self.backend, prefix, stop_token=EOB, beam_size=beam,
                max_len=MAX_BELIEF_LEN,
            )
            for tokens, _ in candidates:
                parsed = self._parse_belief_candidate(tokens, events)
                if parsed is not None:
                    return parsed
        if "fallback" not in events:
            events.append("fallback")
        return session.prev_domain, dict(session.prev_belief)

    # -- stage 2: DB grounding + response ---------------------------------

    def _ground(self, domain: str, belief: BeliefState, rng_seed: int = 0):
        constraints = {
            s: v
            for s, v in belief.get(domain, {}).items()
            if s in QUERYABLE_SLOTS.get(domain, ())
        }
        if domain in self.db.tables:
            match, records = self.db.query(domain, constraints)
        else:
            match, records = DbMatch(0), []
        record = records[0] if records else None
        booking = None
        required = REQUIRED_BOOKING_SLOTS.get(domain)
        if required and record is not None and all(
            s in belief.get(domain, {}) for s in required
        ):
            booking_slots = {s: belief[domain][s] for s in required}
            booking = self.db.book(domain, constraints, booking_slots, rng_seed)
        return match, record, booking

    def _predict_response(
        self,
        prefix: list[str],
        session: Session,
        belief: BeliefState,
        domain: str,
        record: EntityRecord | None,
        booking: BookingResult | None,
        events: list[str],
    ) -> tuple[str, str, ValueMap]:
        available = set(belief.get(domain, {}))
        if record is not None:
            available |= set(record.attributes)
        if booking is not None and booking.success:
            available |= set(booking.fields)
        for beam in BEAM_SCHEDULE:
            candidates = beam_generate(
                self.backend, prefix, stop_token=EOS, beam_size=beam,
                max_len=MAX_RESPONSE_LEN,
            )
            for tokens, _ in candidates:
                body = tokens[:-1] if tokens and tokens[-1] == EOS else tokens
                template = " ".join(body)
                if not template:
                    continue
                if validate_template(template, available):
                    if "template_rejected" not in events:
                        events.append("template_rejected")
                    continue
                try:
                    raw, value_map = relexicalize(
                        template, belief, domain, record, booking,
                        return_values=True,
                    )
                except UnfilledPlaceholder:
                    if "template_rejected" not in events:
                        events.append("template_rejected")
                    continue
                if check_repetition(raw, session.last_system_raw):
                    if "repetition_rejected" not in events:
                        events.append("repetition_rejected")
                    continue
                return template, raw, value_map
        if "fallback" not in events:
            events.append("fallback")
        return FALLBACK_RESPONSE, FALLBACK_RESPONSE, []

    # -- public entry points ----------------------------------------------

    def new_session(self, session_id: str = "local", rng_seed: int = 0) -> Session:
        return Session(id=session_id, rng_seed=rng_seed)

    def respond(self, session: Session, user_utterance: str) -> SystemTurn:
        """Run one full system turn; the session is only mutated on success."""
        user_utterance = " ".join(user_utterance.lower().split())
        events: list[str] = []
        history = session.history + [("user", user_utterance)]
        prefix1 = _history_tokens(history) + [SOB]
        domain, belief = self._predict_belief(prefix1, session, events)

        match, record, booking = self._ground(domain, belief, session.rng_seed)
        prefix2 = (
            _history_tokens(history)
            + [SOB, DMN, domain]
            + tokenize(serialize_belief(belief))
            + [EOB, "match", "=", match.bucket, EOKB]
        )
        template, raw, value_map = self._predict_response(
            prefix2, session, belief, domain, record, booking, events
        )
        # only surface the booking on the turn that reports it, so the
        # polish layer does not re-expand it on every later turn
        if booking is not None and "[value_ref]" not in template and "booking" not in template:
            booking = None

        session.history.append(("user", user_utterance))
        session.history.append(("system", raw))
        session.last_system_raw = raw
        session.prev_belief = belief
        session.prev_domain = domain
        return SystemTurn(
            belief=belief,
            domain=domain,
            db=match,
            record=record,
            booking=booking,
            template=template,
            raw_response=raw,
            value_map=value_map,
            tolerance_events=events,
        )
