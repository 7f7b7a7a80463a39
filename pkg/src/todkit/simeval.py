"""Rule-based goal-driven user simulator and the automatic evaluator.

The simulator follows an agenda derived from a user goal: supply
constraints, react to system questions, ask for requestable slots once
an entity was offered, then request the booking.  The evaluator scores
finished dialogs with Success / Book / Inform P-R-F / Turns.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from .engine import DialogEngine, SystemTurn
from .kb import BookingResult, Database, REQUIRED_BOOKING_SLOTS
from .polish import polish
from .seqmodel import GeneratorBackend

# slots the evaluator treats as requestable information
REQUESTABLE_SLOTS = ("phone", "address", "postcode", "price", "id")

# slots an entity offer is recognized by
_OFFER_SLOTS = ("name", "id")

_QUESTION_KEYWORDS = (
    ("price range", "pricerange"),
    ("area", "area"),
    ("food", "food"),
    ("type", "type"),
    ("day", "day"),
    ("time", "time"),
)

_PROVIDED = re.compile(r"the ([a-z_]+) is ([^.?]+?) \.")


class EmptyInput(ValueError):
    """The evaluator needs at least one dialog record."""


@dataclass(frozen=True)
class DomainGoal:
    informables: dict[str, str] = field(default_factory=dict)
    requestables: tuple[str, ...] = ()
    booking: dict[str, str] | None = None


@dataclass(frozen=True)
class Goal:
    domains: dict[str, DomainGoal]


@dataclass
class DialogRecord:
    goal: Goal
    transcript: list[tuple[str, str]]
    provided: dict[str, dict[str, str]]
    booked: dict[str, BookingResult | None]
    turns: int


@dataclass(frozen=True)
class EvalReport:
    success_rate: float
    book_rate: float
    inform_precision: float
    inform_recall: float
    inform_f1: float
    turns_success: float
    turns_all: float

    def as_dict(self) -> dict:
        return {
            "success_rate": self.success_rate,
            "book_rate": self.book_rate,
            "inform_precision": self.inform_precision,
            "inform_recall": self.inform_recall,
            "inform_f1": self.inform_f1,
            "turns_success": self.turns_success,
            "turns_all": self.turns_all,
        }

    def as_table(self) -> str:
        rows = (
            ("Success Rate", f"{self.success_rate:.3f}"),
            ("Book Rate", f"{self.book_rate:.3f}"),
            ("Inform Rate P", f"{self.inform_precision:.3f}"),
            ("Inform Rate R", f"{self.inform_recall:.3f}"),
            ("Inform Rate F", f"{self.inform_f1:.3f}"),
            ("Turns (succ.)", f"{self.turns_success:.2f}"),
            ("Turns (all)", f"{self.turns_all:.2f}"),
        )
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value:>7}" for name, value in rows)


# -- goal files ------------------------------------------------------------


def load_goals(path: str | Path) -> list[Goal]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    goals = []
    for obj in data:
        domains = {}
        for domain, spec in obj["domains"].items():
            domains[domain] = DomainGoal(
                informables=dict(spec.get("informables", {})),
                requestables=tuple(spec.get("requestables", ())),
                booking=spec.get("booking"),
            )
        goals.append(Goal(domains))
    return goals


def save_goals(goals: list[Goal], path: str | Path):
    data = []
    for goal in goals:
        domains = {}
        for domain, dg in goal.domains.items():
            spec: dict = {"informables": dg.informables, "requestables": list(dg.requestables)}
            if dg.booking:
                spec["booking"] = dg.booking
            domains[domain] = spec
        data.append({"domains": domains})
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def generate_goals(db: Database, n: int, seed: int = 0) -> list[Goal]:
    """Random goals drawn from the database under a fixed seed."""
    rng = random.Random(seed)
    informable_slots = {
        "restaurant": ("food", "area", "pricerange"),
        "hotel": ("area", "pricerange", "type"),
        "attraction": ("area", "type"),
        "train": ("departure", "destination", "day"),
    }
    booking_slots = {
        "restaurant": {"time": "13:00", "day": "tuesday", "people": "4"},
        "hotel": {"day": "friday", "stay": "2", "people": "2"},
        "train": {"people": "2"},
    }
    goals = []
    for _ in range(n):
        domain = rng.choice(list(informable_slots))
        record = rng.choice(db.tables[domain])
        slots = [s for s in informable_slots[domain] if record.get(s)]
        chosen = rng.sample(slots, min(2, len(slots)))
        informables = {s: record.attributes[s] for s in chosen}
        pool = [s for s in REQUESTABLE_SLOTS if record.get(s)]
        requestables = tuple(rng.sample(pool, min(2, len(pool))))
        booking = None
        if domain in booking_slots and rng.random() < 0.7:
            booking = dict(booking_slots[domain])
        goals.append(Goal({domain: DomainGoal(informables, requestables, booking)}))
    return goals


# -- simulator -------------------------------------------------------------


class Simulator:
    """Agenda-based user simulator over one goal.

    In structured mode (default) the system's provided slots are read
    from the SystemTurn's template value map; the keyword NLU mode
    parses the polished text instead, for stress testing.
    """

    def __init__(self, goal: Goal, nlu: str = "structured"):
        self.goal = goal
        self.nlu = nlu
        self.order = list(goal.domains)
        self.index = 0
        self.introduced: set[str] = set()
        self.pending_informs = {
            d: list(g.informables.items()) for d, g in goal.domains.items()
        }
        self.pending_requests = {
            d: list(g.requestables) for d, g in goal.domains.items()
        }
        self.offered: set[str] = set()
        self.provided: dict[str, dict[str, str]] = {d: {} for d in goal.domains}
        self.booked: dict[str, BookingResult | None] = {
            d: None for d in goal.domains
        }
        self.done = False

    @property
    def domain(self) -> str | None:
        return self.order[self.index] if self.index < len(self.order) else None

    # -- observing the system --------------------------------------------

    def observe(self, turn: SystemTurn, polished: str):
        domain = self.domain
        if domain is None:
            return
        if self.nlu == "structured":
            pairs = list(turn.value_map)
        else:
            pairs = [(s, v.strip()) for s, v in _PROVIDED.findall(polished + " ")]
        for slot, value in pairs:
            self.provided[domain][slot] = value
            if slot in _OFFER_SLOTS:
                self.offered.add(domain)
            if slot in self.pending_requests[domain]:
                self.pending_requests[domain].remove(slot)
        if turn.booking is not None and turn.booking.success:
            self.booked[domain] = turn.booking
            self.offered.add(domain)

    # -- producing the next user utterance --------------------------------

    def _inform_sentence(self, slot: str, value: str) -> str:
        if value == "dontcare":
            return f"i do not care about the {slot} ."
        return f"the {slot} should be {value} ."

    def _answer_question(self, polished: str) -> str | None:
        domain = self.domain
        if domain is None or "?" not in polished:
            return None
        goal = self.goal.domains[domain]
        for keyword, slot in _QUESTION_KEYWORDS:
            if keyword in polished and slot in goal.informables:
                pending = self.pending_informs[domain]
                for i, (s, v) in enumerate(pending):
                    if s == slot:
                        pending.pop(i)
                        return self._inform_sentence(s, v)
        return None

    def next_utterance(
        self, last_turn: SystemTurn | None = None, polished: str = ""
    ) -> str:
        if last_turn is not None:
            self.observe(last_turn, polished)
        while self.domain is not None:
            domain = self.domain
            goal = self.goal.domains[domain]

            answer = self._answer_question(polished) if last_turn else None
            if answer is not None:
                return answer

            sentences = []
            if domain not in self.introduced:
                self.introduced.add(domain)
                sentences.append(f"i am looking for a {domain} .")
            informs = self.pending_informs[domain]
            given = 0
            while informs and given < 2:
                slot, value = informs.pop(0)
                sentences.append(self._inform_sentence(slot, value))
                given += 1
            if sentences:
                return " ".join(sentences)

            if domain not in self.offered:
                return "can you recommend one ?"

            requests = self.pending_requests[domain]
            if requests:
                asked = requests[:2]
                return " ".join(f"what is the {slot} ?" for slot in asked)

            if goal.booking and self.booked[domain] is None:
                pairs = " , ".join(f"{s} = {v}" for s, v in goal.booking.items())
                return f"please book for {pairs} ."

            self.index += 1
            polished = ""
            last_turn = None
        self.done = True
        return "thank you , goodbye ."


# -- evaluator -------------------------------------------------------------


def _goal_consistent_records(db: Database, domain: str, informables: dict[str, str]):
    if domain not in db.tables:
        return []
    _, records = db.query(domain, informables)
    return records


def _booking_satisfies(
    db: Database, domain: str, goal: DomainGoal, booking: BookingResult | None
) -> bool:
    if booking is None or not booking.success:
        return False
    for slot, value in (goal.booking or {}).items():
        if slot in booking.fields and booking.fields[slot] != value:
            return False
    candidates = _goal_consistent_records(db, domain, goal.informables)
    if not candidates:
        return False
    entity_fields = {
        s: v for s, v in booking.fields.items()
        if s not in (goal.booking or {}) and s != "ref"
    }
    return any(
        all(rec.get(s) == v for s, v in entity_fields.items() if rec.get(s) is not None)
        for rec in candidates
    )


def evaluate(records: list[DialogRecord], db: Database) -> EvalReport:
    """Score dialog records with the four automatic metrics."""
    if not records:
        raise EmptyInput("no dialog records")
    successes = []
    book_needed = 0
    book_ok = 0
    precisions, recalls, f1s = [], [], []
    turns_all = []
    turns_success = []
    for rec in records:
        provided_ok = True
        tp = fp = 0
        required = 0
        correct_required = 0
        for domain, goal in rec.goal.domains.items():
            consistent = _goal_consistent_records(db, domain, goal.informables)
            provided = {
                s: v
                for s, v in rec.provided.get(domain, {}).items()
                if s in REQUESTABLE_SLOTS
            }
            for slot, value in provided.items():
                if any(r.get(slot) == value for r in consistent):
                    tp += 1
                else:
                    fp += 1
            required += len(goal.requestables)
            for slot in goal.requestables:
                value = provided.get(slot)
                if value is not None and any(
                    r.get(slot) == value for r in consistent
                ):
                    correct_required += 1
                else:
                    provided_ok = False
            if goal.booking is not None:
                book_needed += 1
                if _booking_satisfies(db, domain, goal, rec.booked.get(domain)):
                    book_ok += 1
                else:
                    provided_ok = False
        precision = tp / (tp + fp) if (tp + fp) else (1.0 if required == 0 else 0.0)
        recall = correct_required / required if required else 1.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if (precision + recall) > 0
            else 0.0
        )
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)
        successes.append(provided_ok)
        turns_all.append(rec.turns)
        if provided_ok:
            turns_success.append(rec.turns)

    n = len(records)
    return EvalReport(
        success_rate=sum(successes) / n,
        book_rate=(book_ok / book_needed) if book_needed else 1.0,
        inform_precision=sum(precisions) / n,
        inform_recall=sum(recalls) / n,
        inform_f1=sum(f1s) / n,
        turns_success=(
            sum(turns_success) / len(turns_success) if turns_success else 0.0
        ),
        turns_all=sum(turns_all) / n,
    )


def run_campaign(
    goals: list[Goal],
    backend: GeneratorBackend,
    db: Database,
    max_turns: int = 20,
    seed: int = 0,
    nlu: str = "structured",
) -> tuple[EvalReport, list[DialogRecord]]:
    """Run one simulated dialog per goal and evaluate the lot."""
    engine = DialogEngine(backend, db)
    records = []
    for i, goal in enumerate(goals):
        session = engine.new_session(f"sim-{i}", rng_seed=seed)
        sim = Simulator(goal, nlu=nlu)
        transcript: list[tuple[str, str]] = []
        turns = 0
        last_turn: SystemTurn | None = None
        polished = ""
        try:
            for _ in range(max_turns):
                utterance = sim.next_utterance(last_turn, polished)
                transcript.append(("user", utterance))
                if sim.done:
                    break
                last_turn = engine.respond(session, utterance)
                polished = polish(last_turn, db)
                transcript.append(("system", polished))
                turns += 1
            else:
                if last_turn is not None:
                    sim.observe(last_turn, polished)
        except Exception:
            pass  # a failed dialog still yields a (failing) record
        records.append(
            DialogRecord(
                goal=goal,
                transcript=transcript,
                provided=sim.provided,
                booked=sim.booked,
                turns=turns,
            )
        )
    report = evaluate(records, db)
    return report, records
