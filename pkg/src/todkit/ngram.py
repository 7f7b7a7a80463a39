"""Interpolated absolute-discount backoff n-gram backend.

Counts are accumulated over weighted corpora (pretrain-then-finetune is
expressed as one weighted corpus list), backed off down to a uniform
base distribution over the vocabulary including <unk>, so every event
has non-zero probability.  The <EOS> classifier is a logistic head over
the mean per-token log-probability of the belief and response blocks,
fit by gradient descent on positive/negative pairs.
"""

from __future__ import annotations

import math
import pickle

import numpy as np
from collections import defaultdict
from pathlib import Path

from .seqmodel import ContrastiveSample, GeneratorBackend, split_flat

UNK = "<unk>"
BOS = "<s>"

FORMAT_VERSION = 1


class EmptyCorpus(ValueError):
    """No tokens to train on."""


class NgramBackend(GeneratorBackend):
    def __init__(self, order: int = 4, discount: float = 0.75):
        if order < 1:
            raise ValueError("order must be >= 1")
        if not 0.0 < discount < 1.0:
            raise ValueError("discount must be in (0, 1)")
        self.order = order
        self.discount = discount
        # counts[k][context][token] for context length k
        self.counts: list[dict[tuple, dict[str, float]]] = [
            defaultdict(dict) for _ in range(order)
        ]
        self.vocabulary: list[str] = []
        self._vocab_set: set[str] = set()
        self.eos_head = (1.0, 0.0)  # (scale, bias) of the logistic head

    # -- training ---------------------------------------------------------

    def add_corpus(self, sequences: list[list[str]], weight: float = 1.0):
        if weight <= 0:
            raise ValueError("corpus weight must be positive")
        for seq in sequences:
            padded = [BOS] * (self.order - 1) + list(seq)
            for t in range(self.order - 1, len(padded)):
                token = padded[t]
                for k in range(self.order):
                    context = tuple(padded[t - k : t])
                    slot = self.counts[k][context]
                    slot[token] = slot.get(token, 0.0) + weight

    def merge_counts(self, other: "NgramBackend", weight: float = 1.0):
        """Fold another model's counts in, scaled by weight (realizes the
        pretrain-then-finetune regime on count-based models)."""
        if weight <= 0:
            raise ValueError("merge weight must be positive")
        if other.order != self.order:
            raise ValueError("order mismatch")
        for k in range(self.order):
            for context, table in other.counts[k].items():
                slot = self.counts[k][context]
                for token, c in table.items():
                    slot[token] = slot.get(token, 0.0) + weight * c

    def finalize(self):
        tokens = set(self.counts[0].get((), {}))
        if not tokens:
            raise EmptyCorpus("no tokens seen")
        tokens.add(UNK)
        self.vocabulary = sorted(tokens)
        self._vocab_set = set(self.vocabulary)
        self._index = {t: i for i, t in enumerate(self.vocabulary)}

    # -- scoring ----------------------------------------------------------

    def _map(self, token: str) -> str:
        if token == BOS:
            return token
        return token if token in self._vocab_set else UNK

    def prob(self, context: tuple, token: str) -> float:
        """P(token | context) with interpolated absolute discounting."""
        k = len(context)
        if k >= self.order:
            return self.prob(context[-(self.order - 1) :] if self.order > 1 else (), token)
        table = self.counts[k].get(tuple(context))
        lower = (
            1.0 / len(self.vocabulary)
            if k == 0
            else self.prob(context[1:], token)
        )
        if k == 0:
            table = self.counts[0].get((), {})
        if not table:
            return lower
        total = sum(table.values())
        held = sum(min(c, self.discount) for c in table.values())
        direct = max(table.get(token, 0.0) - self.discount, 0.0) / total
        return direct + (held / total) * lower

    def _context(self, prefix: list[str]) -> tuple:
        padded = [BOS] * (self.order - 1) + [self._map(t) for t in prefix]
        return tuple(padded[len(padded) - (self.order - 1) :]) if self.order > 1 else ()

    def token_logprob(self, prefix, token):
        p = self.prob(self._context(list(prefix)), self._map(token))
        return math.log(p) if p > 0 else -math.inf

    def _dist_vector(self, context: tuple) -> "np.ndarray":
        """Full next-token distribution as a vocab-indexed array."""
        k = len(context)
        if k == 0:
            lower = np.full(len(self.vocabulary), 1.0 / len(self.vocabulary))
            table = self.counts[0].get((), {})
        else:
            lower = self._dist_vector(context[1:])
            table = self.counts[k].get(context)
        if not table:
            return lower
        total = sum(table.values())
        held = sum(min(c, self.discount) for c in table.values())
        arr = (held / total) * lower
        for token, c in table.items():
            direct = max(c - self.discount, 0.0)
            if direct > 0:
                arr[self._index[token]] += direct / total
        return arr

    def next_logprobs(self, prefix):
        arr = self._dist_vector(self._context(list(prefix)))
        return {t: math.log(arr[i]) for i, t in enumerate(self.vocabulary)}

    def sequence_nll(self, tokens: list[str]) -> float:
        nll = 0.0
        for i, token in enumerate(tokens):
            nll -= self.token_logprob(tokens[:i], token)
        return nll

    def perplexity(self, sequences: list[list[str]]) -> float:
        total_nll = 0.0
        total_tokens = 0
        for seq in sequences:
            total_nll += self.sequence_nll(list(seq))
            total_tokens += len(seq)
        if total_tokens == 0:
            raise EmptyCorpus("no held-out tokens")
        return math.exp(total_nll / total_tokens)

    # -- <EOS> classifier head --------------------------------------------

    def _eos_feature(self, tokens: list[str]) -> float:
        try:
            parts = split_flat(list(tokens))
        except ValueError:
            scored = list(tokens)
            prefix: list[str] = []
        else:
            prefix = parts["history"]
            scored = parts["belief"] + parts["db"] + parts["response"]
        if not scored:
            return 0.0
        nll = 0.0
        ctx = list(prefix)
        for token in scored:
            nll -= self.token_logprob(ctx, token)
            ctx.append(token)
        return -nll / len(scored)  # mean log-probability

    def eos_score(self, tokens):
        a, b = self.eos_head
        return 1.0 / (1.0 + math.exp(-(a * self._eos_feature(list(tokens)) + b)))

    def fit_eos_head(
        self,
        pairs: list[tuple[ContrastiveSample, ContrastiveSample]],
        lr: float = 0.001,
        steps: int = 500,
    ):
        """Logistic regression on the mean-logprob feature of pos/neg pairs."""
        feats = [
            (self._eos_feature(list(pos.tokens)), self._eos_feature(list(neg.tokens)))
            for pos, neg in pairs
        ]
        a, b = self.eos_head
        for _ in range(steps):
            ga = gb = 0.0
            for fp, fn in feats:
                pp = 1.0 / (1.0 + math.exp(-(a * fp + b)))
                pn = 1.0 / (1.0 + math.exp(-(a * fn + b)))
                ga += (pp - 1.0) * fp + pn * fn
                gb += (pp - 1.0) + pn
            a -= lr * ga
            b -= lr * gb
        self.eos_head = (a, b)

    # -- persistence ------------------------------------------------------

    def save(self, path: str | Path):
        payload = {
            "version": FORMAT_VERSION,
            "order": self.order,
            "discount": self.discount,
            "counts": [dict(level) for level in self.counts],
            "vocabulary": self.vocabulary,
            "eos_head": self.eos_head,
        }
        with open(path, "wb") as fh:
            pickle.dump(payload, fh)

    @classmethod
    def load(cls, path: str | Path) -> "NgramBackend":
        with open(path, "rb") as fh:
            payload = pickle.load(fh)
        if payload.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model file version: {payload.get('version')}")
        model = cls(payload["order"], payload["discount"])
        model.counts = [defaultdict(dict, level) for level in payload["counts"]]
        model.vocabulary = payload["vocabulary"]
        model._vocab_set = set(model.vocabulary)
        model._index = {t: i for i, t in enumerate(model.vocabulary)}
        model.eos_head = tuple(payload["eos_head"])
        return model


def train_ngram(
    corpora: list[tuple[list[list[str]], float]],
    order: int = 4,
    discount: float = 0.75,
) -> NgramBackend:
    """Train an interpolated backoff n-gram over weighted token corpora."""
    model = NgramBackend(order, discount)
    seen_any = False
    for sequences, weight in corpora:
        model.add_corpus(sequences, weight)
        seen_any = seen_any or any(sequences)
    if not seen_any:
        raise EmptyCorpus("all corpora are empty")
    model.finalize()
    return model
