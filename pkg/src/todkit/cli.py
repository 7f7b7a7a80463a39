"""Command-line entry points: preprocess, pretrain, train, eval, chat, serve."""

from __future__ import annotations

import json
import os
import random
import sys
from pathlib import Path

import click

from .belief import parse_belief, serialize_belief
from .corpus import (
    EmptyDialog,
    build_pretrain_corpus,
    build_training_turns,
    load_raw_corpus,
    normalize_dialog,
)
from .engine import DialogEngine
from .kb import Database, DbMatch
from .ngram import NgramBackend, train_ngram
from .oracle import RuleOracleBackend
from .polish import polish
from .seqmodel import TurnSample, flatten, make_contrastive, make_positive
from .simeval import load_goals, run_campaign
from .text import tokenize

DATA_DIR = Path(__file__).parent / "data"


def _load_backend(spec: str):
    if spec == "oracle":
        return RuleOracleBackend()
    if not Path(spec).exists():
        raise click.ClickException(f"model file not found: {spec}")
    return NgramBackend.load(spec)


def _sample_to_json(s: TurnSample) -> dict:
    return {
        "history": [[role, utt] for role, utt in s.history],
        "domain": s.domain,
        "belief": serialize_belief(s.belief),
        "match_count": s.db.count,
        "response": s.response,
    }


def _sample_from_json(obj: dict) -> TurnSample:
    return TurnSample(
        history=[(role, utt) for role, utt in obj["history"]],
        domain=obj["domain"],
        belief=parse_belief(obj["belief"]),
        db=DbMatch(obj["match_count"]),
        response=obj["response"],
    )


def load_turns(path: str | Path) -> list[TurnSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                samples.append(_sample_from_json(json.loads(line)))
    return samples


def load_chunks(path: str | Path) -> list[list[str]]:
    chunks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                chunks.append(json.loads(line))
    return chunks


@click.group()
def cli():
    """Task-oriented dialog engine toolkit."""


@cli.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.option("-o", "--out", "out_dir", required=True, type=click.Path())
@click.option("--db", "db_dir", type=click.Path(exists=True), default=None)
@click.option("--max-tokens", default=512, show_default=True)
def preprocess(corpus, out_dir, db_dir, max_tokens):
    """Clean a raw corpus into training turns and pretraining chunks."""
    db = Database.load(db_dir) if db_dir else Database.load(DATA_DIR / "db")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dialogs = []
    skipped = 0
    for raw in load_raw_corpus(corpus):
        try:
            dialogs.append(normalize_dialog(raw))
        except EmptyDialog:
            skipped += 1
    with open(out / "turns.jsonl", "w", encoding="utf-8") as fh:
        n_turns = 0
        for d in dialogs:
            for sample in build_training_turns(d, max_tokens, db):
                fh.write(json.dumps(_sample_to_json(sample)) + "\n")
                n_turns += 1
    chunks = build_pretrain_corpus(dialogs, max_tokens)
    with open(out / "pretrain.jsonl", "w", encoding="utf-8") as fh:
        for chunk in chunks:
            fh.write(json.dumps(chunk) + "\n")
    click.echo(
        f"preprocessed {len(dialogs)} dialogs ({skipped} skipped): "
        f"{n_turns} turns, {len(chunks)} pretrain chunks"
    )


@cli.command()
@click.argument("chunks", type=click.Path(exists=True))
@click.option("-o", "--out", "out_path", required=True, type=click.Path())
@click.option("--order", default=4, show_default=True)
@click.option("--discount", default=0.75, show_default=True)
def pretrain(chunks, out_path, order, discount):
    """Train a language model on raw utterance chunks."""
    sequences = [
        tokenize(" ".join(chunk)) for chunk in load_chunks(chunks)
    ]
    model = train_ngram([(sequences, 1.0)], order=order, discount=discount)
    model.save(out_path)
    click.echo(f"pretrained on {len(sequences)} chunks -> {out_path}")


@cli.command()
@click.argument("turns", type=click.Path(exists=True))
@click.option("-o", "--out", "out_path", required=True, type=click.Path())
@click.option("--init", "init_path", type=click.Path(exists=True), default=None)
@click.option("--pretrain-weight", default=0.5, show_default=True)
@click.option("--order", default=4, show_default=True)
@click.option("--discount", default=0.75, show_default=True)
@click.option("--seed", default=0, show_default=True)
def train(turns, out_path, init_path, pretrain_weight, order, discount, seed):
    """Train the sequence model on flattened training turns."""
    samples = load_turns(turns)
    sequences = [flatten(s) for s in samples]
    model = NgramBackend(order=order, discount=discount)
    model.add_corpus(sequences, 1.0)
    if init_path:
        init = NgramBackend.load(init_path)
        if init.order != order:
            raise click.ClickException("--init model order mismatch")
        model.merge_counts(init, pretrain_weight)
    model.finalize()
    rng = random.Random(seed)
    pairs = []
    if len(samples) >= 2:
        for s in samples[: min(len(samples), 200)]:
            pairs.append((make_positive(s), make_contrastive(s, samples, rng)))
        model.fit_eos_head(pairs)
    model.save(out_path)
    click.echo(f"trained on {len(samples)} turns -> {out_path}")


@cli.command("eval")
@click.option("--goals", "goals_path", required=True, type=click.Path(exists=True))
@click.option("--model", required=True)
@click.option("--db", "db_dir", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--max-turns", default=20, show_default=True)
@click.option("--nlu", default="structured", show_default=True,
              type=click.Choice(["structured", "keyword"]))
@click.option("--json", "as_json", is_flag=True, help="emit the report as JSON")
def eval_cmd(goals_path, model, db_dir, seed, max_turns, nlu, as_json):
    """Run the simulator campaign and print the evaluation report."""
    backend = _load_backend(model)
    db = Database.load(db_dir)
    goals = load_goals(goals_path)
    report, _ = run_campaign(
        goals, backend, db, max_turns=max_turns, seed=seed, nlu=nlu
    )
    if as_json:
        click.echo(json.dumps(report.as_dict(), indent=2))
    else:
        click.echo(report.as_table())


@cli.command()
@click.option("--model", required=True)
@click.option("--db", "db_dir", required=True, type=click.Path(exists=True))
@click.option("--debug", is_flag=True, help="show belief/template alongside replies")
@click.option("--seed", default=0, show_default=True)
def chat(model, db_dir, debug, seed):
    """Interactive REPL against the engine (polished responses)."""
    backend = _load_backend(model)
    db = Database.load(db_dir)
    engine = DialogEngine(backend, db)
    session = engine.new_session(rng_seed=seed)
    click.echo("type a message; empty line or ctrl-d quits")
    while True:
        try:
            text = input("you> ").strip()
        except EOFError:
            break
        if not text:
            break
        turn = engine.respond(session, text)
        click.echo(f"sys> {polish(turn, db)}")
        if debug:
            click.echo(f"  domain:   {turn.domain}")
            click.echo(f"  belief:   {serialize_belief(turn.belief)}")
            click.echo(f"  db match: {turn.db.bucket}")
            click.echo(f"  template: {turn.template}")
            if turn.tolerance_events:
                click.echo(f"  events:   {', '.join(turn.tolerance_events)}")


@cli.command()
@click.option("--model", required=True)
@click.option("--db", "db_dir", required=True, type=click.Path(exists=True))
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--seed", default=0, show_default=True)
def serve(model, db_dir, port, host, seed):
    """Serve the HTTP session API."""
    import uvicorn

    from .service import create_app

    backend = _load_backend(model)
    db = Database.load(db_dir)
    port = int(os.environ.get("TODKIT_PORT", port))
    app = create_app(backend, db, rng_seed=seed)
    uvicorn.run(app, host=host, port=port)


def main():
    cli(prog_name="todkit")


if __name__ == "__main__":
    sys.exit(main())
