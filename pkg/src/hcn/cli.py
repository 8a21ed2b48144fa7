"""Command-line entry points for the full pipeline:
prepare-data, train-embeddings, train, evaluate, hpo, chat, serve."""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import hpo as hpo_mod
from . import reports
from .configs import TABLE1
from .data import SILENCE, PreparedCorpus, corpus_token_stream, tokenize
from .embeddings import SkipgramConfig, load_text_vectors, train_subword_skipgram, write_text_vectors
from .model import HcnModel, ModelConfig, evaluate_split, load_checkpoint, save_checkpoint, train_model


def _load_embeddings(path: str):
    ngrams = Path(str(path) + ".ngrams")
    return load_text_vectors(path, ngrams if ngrams.exists() else None)


def _load_model(checkpoint: str, data: str, embeddings: str | None) -> HcnModel:
    corpus = PreparedCorpus.load(data)
    manifest = json.loads((Path(checkpoint) / "manifest.json").read_text())
    emb_path = embeddings or manifest["config"].get("embedding_source")
    if not emb_path:
        raise click.ClickException("no embeddings file given and none recorded in the checkpoint")
    table = _load_embeddings(emb_path)
    return load_checkpoint(checkpoint, table, corpus)


def _resolve_config(spec: str) -> ModelConfig:
    if spec in TABLE1:
        return dataclasses.replace(TABLE1[spec])
    return ModelConfig.from_json(Path(spec).read_text())


@click.group()
def cli():
    """Hybrid code network dialogue manager."""


@cli.command("prepare-data")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--dev", "dev_path", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def prepare_data(train_path, dev_path, test_path, out):
    """Parse bAbI dialog files into a prepared corpus directory."""
    corpus = PreparedCorpus.prepare(train_path, dev_path, test_path)
    corpus.save(out)
    click.echo(f"dialogues: {len(corpus.train)}/{len(corpus.dev)}/{len(corpus.test)}")
    click.echo(f"action templates: {len(corpus.actions)}")
    click.echo(f"vocabulary: {len(corpus.vocab)}")


@cli.command("train-embeddings")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--epochs", default=100, show_default=True)
@click.option("--dim", default=300, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def train_embeddings(corpus_dir, epochs, dim, seed, out):
    """Train subword skip-gram vectors on the training split."""
    corpus = PreparedCorpus.load(corpus_dir)
    sentences = corpus_token_stream(corpus.train)
    table = train_subword_skipgram(sentences, SkipgramConfig(dim=dim, epochs=epochs, seed=seed))
    write_text_vectors(table.vectors, dim, out)
    write_text_vectors(table.ngrams, dim, str(out) + ".ngrams")
    click.echo(f"words: {len(table.vectors)}  ngrams: {len(table.ngrams)}  dim: {dim}")


@cli.command("train")
@click.option("--config", "config_spec", required=True,
              help="preset name (e.g. fasttext_cnn) or path to a config JSON file")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--epochs", default=12, show_default=True)
@click.option("--seed", default=None, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--report-dir", default=None, type=click.Path())
def train(config_spec, data, embeddings, epochs, seed, out, report_dir):
    """Train a model and save the best-validation-epoch checkpoint."""
    config = _resolve_config(config_spec)
    if seed is not None:
        config.seed = seed
    config.embedding_source = str(embeddings)
    corpus = PreparedCorpus.load(data)
    table = _load_embeddings(embeddings)
    result = train_model(config, corpus, table, epochs, log=lambda r: click.echo(
        f"epoch {r['epoch']}: loss {r['train_loss']:.4f}  val acc {r['val_accuracy']:.4f}"))
    save_checkpoint(result.model, out, metrics={
        "best_val_accuracy": result.best_val_accuracy, "best_epoch": result.best_epoch})
    if report_dir:
        reports.training_report(result.history, report_dir)
    click.echo(f"best epoch: {result.best_epoch}  val turn accuracy: {result.best_val_accuracy:.4f}")


@cli.command("evaluate")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--split", type=click.Choice(["train", "dev", "test"]), default="test")
@click.option("--embeddings", default=None, type=click.Path(exists=True))
@click.option("--report-dir", default=None, type=click.Path())
def evaluate(checkpoint, data, split, embeddings, report_dir):
    """Turn and dialogue accuracy of a checkpoint on one split."""
    model = _load_model(checkpoint, data, embeddings)
    result = evaluate_split(model, model.corpus.split(split))
    if report_dir:
        reports.evaluation_report(result, report_dir)
    click.echo(f"turn_accuracy: {result['turn_accuracy']:.4f}")
    click.echo(f"dialogue_accuracy: {result['dialogue_accuracy']:.4f}")


@cli.command("hpo")
@click.option("--space", "space_file", required=True, type=click.Path(exists=True),
              help='JSON file, e.g. {"featurizer": "cnn"}')
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--trials", default=30, show_default=True)
@click.option("--epochs", default=30, show_default=True)
@click.option("--history", "history_file", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--random-search", is_flag=True, help="uniform random baseline instead of GP-EI")
@click.option("--report-dir", default=None, type=click.Path())
def hpo(space_file, data, embeddings, trials, epochs, history_file, seed, random_search, report_dir):
    """Bayesian hyperparameter search over the validation split."""
    spec = json.loads(Path(space_file).read_text())
    featurizer = spec["featurizer"]
    space = hpo_mod.search_space_for(featurizer)
    corpus = PreparedCorpus.load(data)
    table = _load_embeddings(embeddings)

    def objective(params):
        config = hpo_mod.config_from_params(
            params, featurizer, embedding_source=str(embeddings), seed=spec.get("seed", 0))
        return train_model(config, corpus, table, epochs).best_val_accuracy

    best, history = hpo_mod.run_search(
        space, objective, budget=trials, history_path=history_file, seed=seed,
        use_gp=not random_search,
        log=lambda r: click.echo(json.dumps(r)))
    if report_dir:
        reports.hpo_report(history, report_dir)
    click.echo(f"best trial: {best.number}  score: {best.score:.4f}")
    click.echo(json.dumps(best.params, sort_keys=True))


@cli.command("chat")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--embeddings", default=None, type=click.Path(exists=True))
def chat(checkpoint, data, embeddings):
    """Terminal REPL: one user turn per line, empty line is silence."""
    model = _load_model(checkpoint, data, embeddings)
    state = model.initial_state()
    click.echo("(type a message per line; Ctrl-D to quit)")
    for line in sys.stdin:
        tokens = tokenize(line.strip()) or [SILENCE]
        probs, state = model.forward_turn(tokens, state)
        action = int(np.argmax(probs))
        click.echo(f"[{action}] {model.corpus.actions.templates[action]}")


@cli.command("serve")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--embeddings", default=None, type=click.Path(exists=True))
@click.option("--addr", default="127.0.0.1:8000", show_default=True)
@click.option("--static", "static_dir", default=None, type=click.Path(exists=True),
              help="directory with the browser chat client")
def serve(checkpoint, data, embeddings, addr, static_dir):
    """Run the HTTP inference service."""
    import uvicorn

    from .server import create_app

    model = _load_model(checkpoint, data, embeddings)
    host, _, port = addr.partition(":")
    app = create_app(model, static_dir=static_dir)
    uvicorn.run(app, host=host, port=int(port or 8000))


def main():
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.exceptions.UsageError as exc:
        click.echo(exc.format_message(), err=True)
        sys.exit(2)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(1)
    except Exception as exc:  # noqa: BLE001 - single-line machine-parseable failure
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
