import math
import random

import numpy as np
import pytest

from todkit.kb import DbMatch
from todkit.ngram import EmptyCorpus, NgramBackend, train_ngram
from todkit.seqmodel import (
    TurnSample,
    flatten,
    make_contrastive,
    make_positive,
)


def toy_corpus():
    return [
        "the cat sat on the mat".split(),
        "the cat ate the fish".split(),
        "a dog sat on the rug".split(),
    ]


def hand_unigram_prob(counts, token, discount, vocab_size):
    total = sum(counts.values())
    held = sum(min(c, discount) for c in counts.values())
    direct = max(counts.get(token, 0.0) - discount, 0.0) / total
    return direct + (held / total) / vocab_size


def test_unigram_matches_hand_computed_values():
    corpus = [["a", "b", "a", "a", "c"]]
    model = train_ngram([(corpus, 1.0)], order=1, discount=0.75)
    counts = {"a": 3.0, "b": 1.0, "c": 1.0}
    vocab_size = len(model.vocabulary)  # a, b, c, <unk>
    assert vocab_size == 4
    for token in ("a", "b", "c", "<unk>"):
        assert model.prob((), token) == pytest.approx(
            hand_unigram_prob(counts, token, 0.75, vocab_size), abs=1e-12
        )


def test_distributions_sum_to_one_at_random_prefixes():
    model = train_ngram([(toy_corpus(), 1.0)], order=3)
    rng = random.Random(3)
    vocab = model.vocabulary
    for _ in range(1000):
        prefix = [rng.choice(vocab + ["never-seen"]) for _ in range(rng.randrange(0, 5))]
        dist = model.next_logprobs(prefix)
        assert abs(sum(math.exp(lp) for lp in dist.values()) - 1.0) < 1e-6


def test_perplexity_finite_on_unseen_text():
    model = train_ngram([(toy_corpus(), 1.0)])
    ppl = model.perplexity([["completely", "novel", "words", "here"]])
    assert math.isfinite(ppl)
    assert ppl > 1.0


def test_corpus_weighting_shifts_the_model():
    rare = [["x", "y", "x", "y"]]
    common = toy_corpus()
    light = train_ngram([(common, 1.0), (rare, 0.1)])
    heavy = train_ngram([(common, 1.0), (rare, 10.0)])
    assert heavy.prob((), "x") > light.prob((), "x")


def test_merge_counts_equals_joint_training():
    a, b = toy_corpus()[:2], toy_corpus()[2:]
    joint = train_ngram([(a, 1.0), (b, 0.5)])
    merged = NgramBackend()
    merged.add_corpus(a, 1.0)
    pre = NgramBackend()
    pre.add_corpus(b, 1.0)
    merged.merge_counts(pre, 0.5)
    merged.finalize()
    assert merged.vocabulary == joint.vocabulary
    for token in merged.vocabulary:
        assert merged.prob((), token) == pytest.approx(joint.prob((), token))
    ctx = ("sat", "on")
    for token in merged.vocabulary:
        assert merged.prob(ctx, token) == pytest.approx(joint.prob(ctx, token))


def test_empty_corpus_and_bad_weight_rejected():
    with pytest.raises(EmptyCorpus):
        train_ngram([([], 1.0)])
    model = NgramBackend()
    with pytest.raises(ValueError):
        model.add_corpus(toy_corpus(), 0.0)
    with pytest.raises(ValueError):
        NgramBackend(order=0)
    with pytest.raises(ValueError):
        NgramBackend(discount=1.5)


def turn_samples():
    samples = []
    for i, (domain, slot, value, resp) in enumerate(
        [
            ("hotel", "area", "east", "i have many options ."),
            ("train", "day", "monday", "when do you leave ?"),
            ("restaurant", "food", "thai", "bangkok city is great ."),
            ("attraction", "area", "north", "try the pool ."),
        ]
    ):
        samples.append(
            TurnSample(
                history=[("user", f"request number {i} please .")],
                domain=domain,
                belief={domain: {slot: value}},
                db=DbMatch(i),
                response=resp,
            )
        )
    return samples


def test_eos_head_separates_positives_from_negatives():
    samples = turn_samples()
    sequences = [flatten(s) for s in samples]
    model = train_ngram([(sequences, 1.0)])
    rng = random.Random(0)
    pairs = [
        (make_positive(s), make_contrastive(s, samples, rng)) for s in samples
    ]
    model.fit_eos_head(pairs, lr=0.05, steps=2000)
    pos_scores = [model.eos_score(list(p.tokens)) for p, _ in pairs]
    neg_scores = [model.eos_score(list(n.tokens)) for _, n in pairs]
    assert all(0.0 <= s <= 1.0 for s in pos_scores + neg_scores)
    assert np.mean(pos_scores) > np.mean(neg_scores)


def test_save_load_roundtrip(tmp_path):
    model = train_ngram([(toy_corpus(), 1.0)])
    model.eos_head = (1.25, -0.5)
    path = tmp_path / "model.pkl"
    model.save(path)
    loaded = NgramBackend.load(path)
    assert loaded.vocabulary == model.vocabulary
    assert loaded.eos_head == (1.25, -0.5)
    prefix = ["the", "cat"]
    assert loaded.next_logprobs(prefix) == model.next_logprobs(prefix)


def test_load_rejects_unknown_version(tmp_path):
    import pickle

    path = tmp_path / "bad.pkl"
    path.write_bytes(pickle.dumps({"version": 99}))
    with pytest.raises(ValueError):
        NgramBackend.load(path)
