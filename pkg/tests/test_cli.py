import json
import time

import pytest
from click.testing import CliRunner

from todkit import DATA_DIR, DEFAULT_DB_DIR
from todkit.cli import cli, load_turns
from todkit.ngram import NgramBackend
from todkit.seqmodel import flatten


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Run preprocess -> pretrain -> train (with and without pretraining
    counts) -> eval on the bundled mini corpus, once per module."""
    out = tmp_path_factory.mktemp("pipeline")
    runner = CliRunner()
    started = time.monotonic()

    r = runner.invoke(cli, [
        "preprocess", str(DATA_DIR / "mini_corpus.jsonl"),
        "-o", str(out), "--db", str(DEFAULT_DB_DIR),
    ])
    assert r.exit_code == 0, r.output

    r = runner.invoke(cli, [
        "pretrain", str(out / "pretrain.jsonl"), "-o", str(out / "pretrain.pkl"),
    ])
    assert r.exit_code == 0, r.output

    r = runner.invoke(cli, [
        "train", str(out / "turns.jsonl"), "-o", str(out / "plain.pkl"),
    ])
    assert r.exit_code == 0, r.output

    r = runner.invoke(cli, [
        "train", str(out / "turns.jsonl"), "-o", str(out / "weighted.pkl"),
        "--init", str(out / "pretrain.pkl"), "--pretrain-weight", "0.5",
    ])
    assert r.exit_code == 0, r.output

    r = runner.invoke(cli, [
        "eval", "--goals", str(DATA_DIR / "goals.json"),
        "--model", str(out / "weighted.pkl"), "--db", str(DEFAULT_DB_DIR),
        "--max-turns", "6", "--json",
    ])
    assert r.exit_code == 0, r.output
    report = json.loads(r.output)

    elapsed = time.monotonic() - started
    return out, report, elapsed


def test_pipeline_completes_quickly(pipeline):
    _, _, elapsed = pipeline
    assert elapsed < 60.0


def test_preprocess_outputs(pipeline):
    out, _, _ = pipeline
    turns = load_turns(out / "turns.jsonl")
    assert len(turns) > 100
    assert all(len(flatten(t)) <= 512 for t in turns)
    chunks = [json.loads(l) for l in (out / "pretrain.jsonl").read_text().splitlines()]
    assert chunks and all(isinstance(c, list) for c in chunks)


def test_both_perplexities_finite_and_reported(pipeline, capsys):
    out, _, _ = pipeline
    turns = load_turns(out / "turns.jsonl")
    held_out = [flatten(t) for t in turns[::7]]
    plain = NgramBackend.load(out / "plain.pkl")
    weighted = NgramBackend.load(out / "weighted.pkl")
    ppl_plain = plain.perplexity(held_out)
    ppl_weighted = weighted.perplexity(held_out)
    assert ppl_plain > 1.0 and ppl_plain < float("inf")
    assert ppl_weighted > 1.0 and ppl_weighted < float("inf")
    with capsys.disabled():
        print(
            f"\n[perplexity] unweighted={ppl_plain:.2f} "
            f"pretrain-weighted={ppl_weighted:.2f}"
        )


def test_eval_report_shape(pipeline):
    _, report, _ = pipeline
    assert set(report) == {
        "success_rate", "book_rate", "inform_precision", "inform_recall",
        "inform_f1", "turns_success", "turns_all",
    }
    for value in report.values():
        assert value == value  # no NaNs


def test_eval_with_oracle_backend():
    runner = CliRunner()
    r = runner.invoke(cli, [
        "eval", "--goals", str(DATA_DIR / "goals.json"),
        "--model", "oracle", "--db", str(DEFAULT_DB_DIR), "--json",
    ])
    assert r.exit_code == 0, r.output
    report = json.loads(r.output)
    assert report["success_rate"] == 1.0


def test_train_rejects_order_mismatch(tmp_path, pipeline):
    out, _, _ = pipeline
    runner = CliRunner()
    r = runner.invoke(cli, [
        "pretrain", str(out / "pretrain.jsonl"), "-o", str(tmp_path / "o2.pkl"),
        "--order", "2",
    ])
    assert r.exit_code == 0, r.output
    r = runner.invoke(cli, [
        "train", str(out / "turns.jsonl"), "-o", str(tmp_path / "x.pkl"),
        "--init", str(tmp_path / "o2.pkl"),
    ])
    assert r.exit_code != 0
