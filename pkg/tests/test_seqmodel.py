import math
import random

import pytest

from todkit.backends import PerfectOracleBackend, UniformBackend
from todkit.kb import DbMatch
from todkit.seqmodel import (
    EOS,
    ContrastiveSample,
    GeneratorBackend,
    PoolTooSmall,
    TurnSample,
    beam_generate,
    flatten,
    loss_belief,
    loss_contrastive,
    loss_response,
    make_contrastive,
    make_positive,
    split_flat,
    total_loss,
)

LN10 = math.log(10.0)


def sample(history=None, domain="general", belief=None, bucket=0, response="hello ."):
    return TurnSample(
        history=history or [("user", "hi")],
        domain=domain,
        belief=belief or {},
        db=DbMatch(bucket),
        response=response,
    )


def test_flatten_minimal_layout():
    assert flatten(sample()) == [
        "user", ":", "hi", "<SOB>", "<DMN>", "general", "<EOB>",
        "match", "=", "0", "<EOKB>", "hello", ".", "<EOS>",
    ]


def test_flatten_belief_block_layout():
    s = sample(
        domain="restaurant",
        belief={"restaurant": {"people": "4", "time": "13:00"}},
        bucket=2,
    )
    parts = split_flat(flatten(s))
    assert " ".join(parts["belief"]) == (
        "<SOB> <DMN> restaurant restaurant { time = 13:00 , people = 4 } <EOB>"
    )
    assert parts["db"] == ["match", "=", "2", "<EOKB>"]
    assert parts["response"] == ["hello", ".", "<EOS>"]
    assert parts["history"] == ["user", ":", "hi"]


def test_split_inverts_flatten():
    s = sample(
        history=[("user", "hi"), ("system", "hello ."), ("user", "a hotel ?")],
        domain="hotel",
        belief={"hotel": {"area": "east"}},
        bucket=33,
        response="i have 33 guest houses .",
    )
    tokens = flatten(s)
    parts = split_flat(tokens)
    assert parts["history"] + parts["belief"] + parts["db"] + parts["response"] == tokens


# -- losses ----------------------------------------------------------------


# ten tokens covering every scored belief/response block token below
VOCAB10 = [
    "<SOB>", "<DMN>", "general", "<EOB>", "hello", "there", ".", "<EOS>",
    "pad1", "pad2",
]


class HalvedBackend(GeneratorBackend):
    """Every token gets exactly half the uniform-over-10 probability."""

    vocabulary = VOCAB10

    def next_logprobs(self, prefix):
        return {t: math.log(0.05) for t in self.vocabulary}

    def eos_score(self, tokens):
        return 0.5


def test_loss_closed_forms_uniform():
    backend = UniformBackend(VOCAB10)
    s = sample()  # belief block <SOB> <DMN> general <EOB> = 4 tokens
    parts = split_flat(flatten(s))
    assert len(parts["belief"]) == 4
    assert loss_belief(backend, s) == pytest.approx(4 * LN10, abs=1e-9)
    # response block "hello . <EOS>" = 3 tokens
    assert len(parts["response"]) == 3
    assert loss_response(backend, s) == pytest.approx(3 * LN10, abs=1e-9)
    # 4-token response block
    s4 = sample(response="hello there .")
    assert loss_response(backend, s4) == pytest.approx(4 * LN10, abs=1e-9)


def test_halving_probabilities_adds_block_length_ln2():
    uniform = UniformBackend(VOCAB10)
    halved = HalvedBackend()
    s = sample(response="hello there .")
    for loss, block in ((loss_belief, "belief"), (loss_response, "response")):
        n = len(split_flat(flatten(s))[block])
        delta = loss(halved, s) - loss(uniform, s)
        assert delta == pytest.approx(n * math.log(2.0), abs=1e-9)


def test_loss_zero_for_perfect_oracle():
    s = sample(domain="hotel", belief={"hotel": {"area": "east"}})
    backend = PerfectOracleBackend(flatten(s))
    assert loss_belief(backend, s) == pytest.approx(0.0, abs=1e-9)
    assert loss_response(backend, s) == pytest.approx(0.0, abs=1e-9)


class FixedEos(GeneratorBackend):
    vocabulary = ["a"]

    def __init__(self, pos_score, neg_score):
        self.scores = {("p",): pos_score, ("n",): neg_score}

    def next_logprobs(self, prefix):
        return {"a": 0.0}

    def eos_score(self, tokens):
        return self.scores[tuple(tokens)]


def test_contrastive_closed_forms():
    pos = ContrastiveSample(("p",), "positive")
    neg = ContrastiveSample(("n",), "negative")
    assert loss_contrastive(FixedEos(0.9, 0.1), pos, neg) == pytest.approx(
        -math.log(0.9) - math.log(0.9), abs=1e-9
    )
    assert loss_contrastive(FixedEos(0.5, 0.5), pos, neg) == pytest.approx(
        2 * math.log(2.0), abs=1e-9
    )
    assert loss_contrastive(FixedEos(1.0, 0.0), pos, neg) == pytest.approx(
        0.0, abs=1e-9
    )


def test_total_loss_is_component_sum():
    backend = UniformBackend(VOCAB10)
    s = sample()
    pos = make_positive(s)
    neg = ContrastiveSample(("n",), "negative")
    expected = (
        loss_belief(backend, s)
        + loss_response(backend, s)
        + loss_contrastive(backend, pos, neg)
    )
    assert total_loss(backend, s, pos, neg) == pytest.approx(expected, abs=1e-12)


# -- contrastive sampling --------------------------------------------------


def pool_samples():
    return [
        sample(belief={"hotel": {"area": "east"}}, domain="hotel", response="a ."),
        sample(belief={"train": {"day": "monday"}}, domain="train", response="b ."),
        sample(belief={"taxi": {"departure": "ely"}}, domain="taxi", response="c ."),
    ]


def test_make_contrastive_swaps_blocks():
    rng = random.Random(0)
    pool = pool_samples()
    src_parts = split_flat(flatten(pool[0]))
    seen_modes = set()
    for _ in range(100):
        neg = make_contrastive(pool[0], pool, rng)
        assert neg.label == "negative"
        assert list(neg.tokens) != flatten(pool[0])
        parts = split_flat(list(neg.tokens))
        assert parts["history"] == src_parts["history"]
        assert parts["db"] == src_parts["db"]
        changed = (
            parts["belief"] != src_parts["belief"],
            parts["response"] != src_parts["response"],
        )
        seen_modes.add(changed)
    # all three replacement modes occur: belief only, response only, both
    assert seen_modes == {(True, False), (False, True), (True, True)}


def test_make_contrastive_pool_too_small():
    s = pool_samples()[0]
    with pytest.raises(PoolTooSmall):
        make_contrastive(s, [s], random.Random(0))


# -- beam search -----------------------------------------------------------


class SeededRandomBackend(GeneratorBackend):
    """Deterministic random conditional distributions over a small vocab."""

    def __init__(self, vocab, seed):
        self.vocabulary = list(vocab)
        self.seed = seed

    def next_logprobs(self, prefix):
        rng = random.Random((self.seed, tuple(prefix)).__repr__())
        weights = [rng.random() + 0.05 for _ in self.vocabulary]
        total = sum(weights)
        return {
            t: math.log(w / total) for t, w in zip(self.vocabulary, weights)
        }

    def eos_score(self, tokens):
        return 0.5


def brute_force_argmax(backend, prefix, stop, max_len):
    best = (None, -math.inf)

    def recurse(cont, score):
        nonlocal best
        if cont and (cont[-1] == stop or len(cont) == max_len):
            if score > best[1]:
                best = (cont, score)
            return
        dist = backend.next_logprobs(prefix + cont)
        for token, lp in dist.items():
            recurse(cont + [token], score + lp)

    recurse([], 0.0)
    return best


def test_beam_equals_brute_force_on_toy_vocab():
    vocab = ["a", "b", "c", "d", "e", EOS]
    for seed in range(30):
        backend = SeededRandomBackend(vocab, seed)
        expect_cont, expect_score = brute_force_argmax(backend, ["x"], EOS, 3)
        got = beam_generate(backend, ["x"], stop_token=EOS, beam_size=len(vocab), max_len=3)
        assert got[0][0] == expect_cont
        assert got[0][1] == pytest.approx(expect_score, abs=1e-12)


def test_beam_one_is_greedy():
    vocab = ["a", "b", EOS]
    backend = SeededRandomBackend(vocab, 5)
    greedy = []
    while len(greedy) < 4:
        dist = backend.next_logprobs(["y"] + greedy)
        token = max(dist, key=dist.get)
        greedy.append(token)
        if token == EOS:
            break
    got = beam_generate(backend, ["y"], stop_token=EOS, beam_size=1, max_len=4)
    assert got[0][0] == greedy


def test_beam_scripted_single_candidate():
    gold = ["hello", ".", EOS]
    backend = PerfectOracleBackend(gold)
    got = beam_generate(backend, [], stop_token=EOS, beam_size=4, max_len=10)
    assert got[0][0] == gold
    assert got[0][1] == pytest.approx(0.0)
