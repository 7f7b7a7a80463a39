"""Concrete generator backends: uniform reference and scripted oracle.

The scripted backend is driven by rules, each binding a trigger over the
dialog prefix to a weighted set of continuations.  Beam search over it
recovers exactly the scripted candidates ranked by weight, which makes
deterministic fixtures for the decoding loop easy to write.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .seqmodel import EOB, EOKB, EOS, SOB, GeneratorBackend
from .text import tokenize


class UniformBackend(GeneratorBackend):
    """Uniform next-token distribution over a fixed vocabulary."""

    def __init__(self, vocabulary: list[str], eos_prob: float = 0.5):
        self.vocabulary = list(vocabulary)
        self._eos_prob = eos_prob

    def next_logprobs(self, prefix):
        lp = -math.log(len(self.vocabulary))
        return {t: lp for t in self.vocabulary}

    def eos_score(self, tokens):
        return self._eos_prob


class PerfectOracleBackend(GeneratorBackend):
    """Assigns probability 1 to the gold continuation of a fixed sample.

    Only useful for loss checks: token_logprob is 0 for the gold token at
    every position, -inf elsewhere.
    """

    def __init__(self, gold_tokens: list[str], eos_scores=None):
        self.gold = list(gold_tokens)
        self.vocabulary = sorted(set(gold_tokens))
        self._eos_scores = eos_scores or {}

    def next_logprobs(self, prefix):
        # position = how much of gold the prefix suffix covers
        n = min(len(prefix), len(self.gold))
        while n > 0 and list(prefix[-n:]) != self.gold[:n]:
            n -= 1
        if n < len(self.gold):
            return {self.gold[n]: 0.0}
        return {EOS: 0.0}

    def eos_score(self, tokens):
        return self._eos_scores.get(tuple(tokens), 1.0)


@dataclass
class ScriptRule:
    stage: str  # "belief" or "response"
    trigger: str  # substring matched against the detokenized context
    continuations: list[tuple[str, float]]  # (text, weight); stop appended


class ScriptedBackend(GeneratorBackend):
    """Weighted-trie backend over hand-written continuations.

    At a belief stage (prefix ends in an open <SOB> block) the rules with
    stage "belief" are consulted; at a response stage (prefix past
    <EOKB>) the "response" rules.  The first rule whose trigger substring
    occurs in the context wins; its continuations define the
    distribution, each weighted proportionally.
    """

    def __init__(self, rules: list[ScriptRule], eos_scorer=None):
        self.rules = rules
        self._eos_scorer = eos_scorer
        vocab = set([SOB, "<DMN>", EOB, EOKB, EOS])
        for rule in rules:
            for text, _ in rule.continuations:
                vocab.update(tokenize(text))
        self.vocabulary = sorted(vocab)

    @staticmethod
    def _stage(prefix: list[str]) -> tuple[str, int]:
        if EOKB in prefix:
            return "response", len(prefix) - 1 - prefix[::-1].index(EOKB)
        if SOB in prefix:
            return "belief", len(prefix) - 1 - prefix[::-1].index(SOB)
        return "belief", len(prefix) - 1

    def _continuations(self, stage: str, context: str):
        stop = EOB if stage == "belief" else EOS
        for rule in self.rules:
            if rule.stage == stage and rule.trigger in context:
                out = []
                for text, weight in rule.continuations:
                    toks = tokenize(text)
                    if not toks or toks[-1] != stop:
                        toks.append(stop)
                    out.append((toks, weight))
                return out
        return [([stop], 1.0)]

    def next_logprobs(self, prefix):
        stage, anchor = self._stage(list(prefix))
        context = " ".join(prefix[: anchor + 1])
        generated = list(prefix[anchor + 1 :])
        conts = self._continuations(stage, context)
        n = len(generated)
        consistent = [(t, w) for t, w in conts if t[:n] == generated and len(t) > n]
        total = sum(w for _, w in consistent)
        if not consistent or total <= 0:
            stop = EOB if stage == "belief" else EOS
            return {stop: 0.0}
        dist: dict[str, float] = {}
        for toks, w in consistent:
            dist[toks[n]] = dist.get(toks[n], 0.0) + w / total
        return {t: math.log(p) for t, p in dist.items()}

    def eos_score(self, tokens):
        if self._eos_scorer is not None:
            return self._eos_scorer(tokens)
        return 0.5
