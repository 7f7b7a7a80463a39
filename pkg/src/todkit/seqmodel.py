"""Flattened-sequence format, training objectives and beam search.

A training/inference unit is flattened into one token sequence:

    user : {u1} system : {s1} ... user : {uk}
    <SOB> <DMN> {domain} {belief} <EOB> match = {bucket} <EOKB>
    {response template} <EOS>

The generator backend contract exposes next-token log-probabilities and
a sequence-level end-of-sequence classifier score; all objectives are
negative log-likelihoods computed against that contract.
"""

from __future__ import annotations

import dataclasses
import math
import random
from dataclasses import dataclass

from .belief import BeliefState, serialize_belief
from .kb import DbMatch
from .text import tokenize

SOB = "<SOB>"
DMN = "<DMN>"
EOB = "<EOB>"
EOKB = "<EOKB>"
EOS = "<EOS>"
SPECIAL_TOKENS = (SOB, DMN, EOB, EOKB, EOS)

_EPS = 1e-12


class PoolTooSmall(ValueError):
    """Contrastive sampling needs at least one other sample in the pool."""


@dataclass(frozen=True)
class TurnSample:
    history: list[tuple[str, str]]  # (role, utterance), ends with a user turn
    domain: str
    belief: BeliefState
    db: DbMatch
    response: str  # delexicalized template

    def replace(self, **kwargs) -> "TurnSample":
        return dataclasses.replace(self, **kwargs)


@dataclass(frozen=True)
class ContrastiveSample:
    tokens: tuple[str, ...]
    label: str  # "positive" or "negative"


def flatten(s: TurnSample) -> list[str]:
    """Render a TurnSample as its canonical token sequence."""
    tokens: list[str] = []
    for role, utt in s.history:
        tokens.append(role)
        tokens.append(":")
        tokens.extend(tokenize(utt))
    tokens.extend([SOB, DMN, s.domain])
    tokens.extend(tokenize(serialize_belief(s.belief)))
    tokens.append(EOB)
    tokens.extend(["match", "=", s.db.bucket])
    tokens.append(EOKB)
    tokens.extend(tokenize(s.response))
    tokens.append(EOS)
    return tokens


def split_flat(tokens: list[str]) -> dict[str, list[str]]:
    """Split a flattened sequence back into its component blocks."""
    i_sob = tokens.index(SOB)
    i_eob = tokens.index(EOB)
    i_eokb = tokens.index(EOKB)
    i_eos = tokens.index(EOS)
    return {
        "history": list(tokens[:i_sob]),
        "belief": list(tokens[i_sob : i_eob + 1]),  # <SOB> <DMN> d ... <EOB>
        "db": list(tokens[i_eob + 1 : i_eokb + 1]),
        "response": list(tokens[i_eokb + 1 : i_eos + 1]),  # ... <EOS>
    }


class GeneratorBackend:
    """Contract for token-probability scoring and the <EOS> classifier.

    Subclasses implement next_logprobs and eos_score; per-prefix
    next-token probabilities must sum to 1 over the vocabulary.
    """

    vocabulary: list[str]

    def next_logprobs(self, prefix: list[str]) -> dict[str, float]:
        raise NotImplementedError

    def token_logprob(self, prefix: list[str], token: str) -> float:
        return self.next_logprobs(prefix).get(token, -math.inf)

    def eos_score(self, tokens: list[str]) -> float:
        raise NotImplementedError


def _block_nll(backend: GeneratorBackend, prefix: list[str], block: list[str]) -> float:
    nll = 0.0
    ctx = list(prefix)
    for token in block:
        nll -= backend.token_logprob(ctx, token)
        ctx.append(token)
    return nll


def loss_belief(backend: GeneratorBackend, s: TurnSample) -> float:
    """NLL of the turn-domain + belief block given the dialog history."""
    parts = split_flat(flatten(s))
    return _block_nll(backend, parts["history"], parts["belief"])


def loss_response(backend: GeneratorBackend, s: TurnSample) -> float:
    """NLL of the response block given history, belief and DB match."""
    parts = split_flat(flatten(s))
    prefix = parts["history"] + parts["belief"] + parts["db"]
    return _block_nll(backend, prefix, parts["response"])


def loss_contrastive(
    backend: GeneratorBackend, pos: ContrastiveSample, neg: ContrastiveSample
) -> float:
    """Binary cross-entropy of the <EOS> classifier on a positive/negative
    pair."""
    p = min(max(backend.eos_score(list(pos.tokens)), _EPS), 1.0 - _EPS)
    q = min(max(backend.eos_score(list(neg.tokens)), _EPS), 1.0 - _EPS)
    return -(math.log(p) + math.log(1.0 - q))


def total_loss(
    backend: GeneratorBackend,
    s: TurnSample,
    pos: ContrastiveSample,
    neg: ContrastiveSample,
) -> float:
    return loss_belief(backend, s) + loss_response(backend, s) + loss_contrastive(
        backend, pos, neg
    )


def make_positive(s: TurnSample) -> ContrastiveSample:
    return ContrastiveSample(tuple(flatten(s)), "positive")


def make_contrastive(
    s: TurnSample, pool: list[TurnSample], rng: random.Random
) -> ContrastiveSample:
    """Build a negative by swapping the belief block, the response block,
    or both, with blocks from a random other pool sample."""
    others = [p for p in pool if p is not s and p != s]
    if not others:
        raise PoolTooSmall("need at least one other sample")
    src = split_flat(flatten(s))
    mode = rng.randrange(3)
    swap_belief = mode in (0, 2)
    swap_response = mode in (1, 2)

    def differs(donor: TurnSample) -> bool:
        parts = split_flat(flatten(donor))
        if swap_belief and parts["belief"] != src["belief"]:
            return True
        if swap_response and parts["response"] != src["response"]:
            return True
        return False

    donor = None
    for _ in range(20):
        cand = rng.choice(others)
        if differs(cand):
            donor = cand
            break
    if donor is None:
        usable = [c for c in others if differs(c)]
        if not usable:
            raise PoolTooSmall("no pool sample differs in the swapped blocks")
        donor = rng.choice(usable)

    parts = split_flat(flatten(donor))
    belief = parts["belief"] if swap_belief else src["belief"]
    response = parts["response"] if swap_response else src["response"]
    tokens = src["history"] + belief + src["db"] + response
    return ContrastiveSample(tuple(tokens), "negative")


def beam_generate(
    backend: GeneratorBackend,
    prefix: list[str],
    stop_token: str = EOS,
    beam_size: int = 1,
    max_len: int = 128,
) -> list[tuple[list[str], float]]:
    """Length-capped beam search.

    Returns continuations of `prefix` ranked by total log-probability;
    each ends with stop_token or at max_len tokens.  beam_size=1 is
    greedy decoding.
    """
    assert beam_size >= 1
    if beam_size == 1:  # plain greedy decoding
        cont: list[str] = []
        score = 0.0
        for _ in range(max_len):
            dist = backend.next_logprobs(prefix + cont)
            token = max(dist, key=dist.get)
            cont.append(token)
            score += dist[token]
            if token == stop_token:
                break
        return [(cont, score)]

    beams: list[tuple[list[str], float]] = [([], 0.0)]
    finished: list[tuple[list[str], float]] = []
    for _ in range(max_len):
        if not beams:
            break
        expanded: list[tuple[list[str], float]] = []
        for cont, score in beams:
            dist = backend.next_logprobs(prefix + cont)
            for token, lp in dist.items():
                if lp == -math.inf:
                    continue
                candidate = (cont + [token], score + lp)
                if token == stop_token:
                    # a completed hypothesis is never pruned
                    finished.append(candidate)
                else:
                    expanded.append(candidate)
        expanded.sort(key=lambda b: -b[1])
        beams = expanded[:beam_size]
    finished.extend(beams)  # length-capped, unterminated candidates
    return sorted(finished, key=lambda b: -b[1])
