"""Rule-based oracle backend.

A deterministic GeneratorBackend that parses the dialog history with a
keyword NLU and emits well-formed belief and response blocks with
probability 1.  It serves as the reference system for campaign fixtures
and as a model-free baseline for the chat/serve commands.
"""

from __future__ import annotations

import re

from .belief import DOMAINS, serialize_belief
from .kb import REQUIRED_BOOKING_SLOTS
from .seqmodel import DMN, EOB, EOKB, EOS, SOB, GeneratorBackend

_INFORM = re.compile(r"the ([a-z_]+) should be ([^.?]+?) [.?]")
_DONTCARE = re.compile(r"i do not care about the ([a-z_]+)")
_LOOKING = re.compile(r"i am looking for a ([a-z_]+)")
_REQUEST = re.compile(r"what is the ([a-z_]+) \?")
_BOOK = re.compile(r"please book for (.+)")

# placeholder used when offering an entity, per domain
_OFFER_SLOT = {"train": "id", "taxi": "phone"}


def split_history(history_tokens: list[str]) -> list[tuple[str, str]]:
    """Recover (role, utterance) pairs from a flattened c1 block."""
    turns: list[tuple[str, str]] = []
    i = 0
    n = len(history_tokens)
    while i < n:
        role = history_tokens[i]
        assert history_tokens[i + 1] == ":", "malformed history block"
        j = i + 2
        while j < n and not (
            j + 1 < n
            and history_tokens[j] in ("user", "system")
            and history_tokens[j + 1] == ":"
        ):
            j += 1
        turns.append((role, " ".join(history_tokens[i + 2 : j])))
        i = j
    return turns


def parse_user_state(user_utterances: list[str]):
    """Keyword NLU: accumulate (domain, belief) over the user side."""
    belief: dict[str, dict[str, str]] = {}
    domain = "general"
    for utt in user_utterances:
        utt = utt if utt.endswith((".", "?")) else utt + " ."
        m = _LOOKING.search(utt)
        if m and m.group(1) in DOMAINS:
            domain = m.group(1)
        if domain == "general":
            continue
        slots = belief.setdefault(domain, {})
        for slot, value in _INFORM.findall(utt):
            slots[slot] = value.strip()
        for slot in _DONTCARE.findall(utt):
            slots[slot] = "dontcare"
        m = _BOOK.search(utt)
        if m:
            for frag in m.group(1).rstrip(" .").split(","):
                if "=" in frag:
                    slot, value = frag.split("=", 1)
                    slots[slot.strip()] = value.strip()
    return domain, {d: s for d, s in belief.items() if s}


class RuleOracleBackend(GeneratorBackend):
    """Deterministic rule-driven backend (probability 1 continuations)."""

    provide_requestables = True

    def __init__(self):
        self.vocabulary = [SOB, DMN, EOB, EOKB, EOS]

    # -- continuation planning -------------------------------------------

    def _belief_continuation(self, prefix: list[str]) -> list[str]:
        i_sob = prefix.index(SOB)
        turns = split_history(prefix[:i_sob])
        domain, belief = parse_user_state(
            [utt for role, utt in turns if role == "user"]
        )
        tokens = [DMN, domain]
        serialized = serialize_belief(belief)
        if serialized:
            tokens.extend(serialized.split())
        tokens.append(EOB)
        return tokens

    def _response_text(self, prefix: list[str]) -> str:
        i_sob = prefix.index(SOB)
        i_eokb = len(prefix) - 1 - prefix[::-1].index(EOKB)
        turns = split_history(prefix[:i_sob])
        users = [utt for role, utt in turns if role == "user"]
        domain = prefix[i_sob + 2] if prefix[i_sob + 1] == DMN else "general"
        bucket = prefix[i_eokb - 1]
        last = (users[-1] if users else "") + " "

        if "goodbye" in last:
            return "you are welcome . goodbye ."

        requested = _REQUEST.findall(last)
        if requested:
            if not self.provide_requestables:
                return "is there anything else i can help with ?"
            return " ".join(f"the {slot} is [value_{slot}] ." for slot in requested)

        if _BOOK.search(last) and domain in REQUIRED_BOOKING_SLOTS:
            return "booking was successful . your reference number is [value_ref] ."

        if bucket == "0":
            return "i am sorry , i could not find a match for that ."

        informed = _INFORM.findall(last) + [
            (slot, "dontcare") for slot in _DONTCARE.findall(last)
        ]
        ack = " ".join(f"the {slot} is {value} ." for slot, value in informed)
        offer_slot = _OFFER_SLOT.get(domain, "name")
        offer = f"i can recommend [value_{offer_slot}] . anything else ?"
        return (ack + " " + offer).strip()

    def _continuation(self, prefix: list[str]) -> list[str]:
        if EOKB in prefix:
            tokens = self._response_text(list(prefix)).split()
            tokens.append(EOS)
            return tokens
        return self._belief_continuation(list(prefix))

    # -- backend contract -------------------------------------------------

    def next_logprobs(self, prefix):
        prefix = list(prefix)
        if EOKB in prefix:
            anchor = len(prefix) - 1 - prefix[::-1].index(EOKB)
        elif SOB in prefix:
            anchor = prefix.index(SOB)
        else:
            return {EOS: 0.0}
        cont = self._continuation(prefix[: anchor + 1])
        generated = prefix[anchor + 1 :]
        if cont[: len(generated)] == generated and len(cont) > len(generated):
            return {cont[len(generated)]: 0.0}
        return {EOS if EOKB in prefix else EOB: 0.0}

    def eos_score(self, tokens):
        return 1.0


class NoRequestablesBackend(RuleOracleBackend):
    """Degraded oracle that never answers requestable-slot questions."""

    provide_requestables = False
