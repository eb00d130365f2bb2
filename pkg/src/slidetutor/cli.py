"""Operator command line: ingest, build-index, query, eval, serve, user.

``eval`` prints an aligned table and can drop a full report directory
(JSON, CSV, and a metrics figure) next to it; ``user`` bootstraps accounts
directly against the database file so a fresh deployment can seed its
first admin without the HTTP API.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .config import load_config
from .corpus import build_index, load_corpus, validate
from .embedding import DEFAULT_DIMENSION, HashingEmbedder
from .errors import SlidetutorError
from .evalharness import run_ablation, run_eval
from .index import FlatIndex
from .pipeline import PipelineConfig, retrieve
from .report import render_table, write_json, write_report_dir
from .rerank import LexicalScorer
from .users import UserStore


@click.group()
@click.version_option(__version__)
def cli() -> None:
    """Two-stage retrieval QA over slide-based course corpora."""


@cli.command()
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
def ingest(corpus_dir: str) -> None:
    """Validate a corpus directory and report every issue found."""
    corpus = load_corpus(corpus_dir, strict=False)
    issues = validate(corpus)
    click.echo(
        f"course {corpus.course_id!r}: {len(corpus)} records, "
        f"{len(corpus.weeks())} weeks"
    )
    for issue in issues:
        click.echo(f"  [{issue.kind}] {issue.message}")
    if issues:
        click.echo(f"{len(issues)} issue(s) found")
        sys.exit(1)
    click.echo("corpus is consistent")


@cli.command("build-index")
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(), help="Index output directory.")
@click.option("--dim", default=DEFAULT_DIMENSION, show_default=True, type=int)
def build_index_cmd(corpus_dir: str, out: str, dim: int) -> None:
    """Embed every answer text and write the flat index to disk."""
    corpus = load_corpus(corpus_dir)
    index = build_index(corpus, HashingEmbedder(dim))
    index.save(out)
    click.echo(f"indexed {len(index)} documents (dim={dim}) into {out}")


@cli.command()
@click.argument("index_path", type=click.Path(exists=True, file_okay=False))
@click.argument("text")
@click.option("--k", default=10, show_default=True, type=int)
@click.option("--no-rerank", is_flag=True, help="Stop after stage-I ordering.")
@click.option(
    "--corpus",
    "corpus_dir",
    type=click.Path(exists=True, file_okay=False),
    help="Corpus directory; required for reranking and slide metadata.",
)
def query(
    index_path: str, text: str, k: int, no_rerank: bool, corpus_dir: str | None
) -> None:
    """Search the index for TEXT and print the ranked candidates."""
    index = FlatIndex.load(index_path)
    embedder = HashingEmbedder(index.dimension)

    if corpus_dir is None:
        if not no_rerank:
            raise click.UsageError("--corpus is required unless --no-rerank is set")
        from .embedding import normalize
        from .pipeline import truncate_input

        vector = normalize(embedder.embed(truncate_input(text, 2048)))
        for rank, cand in enumerate(index.search(vector, k), start=1):
            click.echo(f"{rank:2d}. {cand.doc_id}  s1={cand.stage1_score:+.6f}")
        return

    corpus = load_corpus(corpus_dir, strict=False)
    cfg = PipelineConfig(k=k, rerank_enabled=not no_rerank, final_n=k)
    response = retrieve(text, cfg, index, corpus, embedder, LexicalScorer())
    for rank, cand in enumerate(response.candidates, start=1):
        s2 = "" if cand.stage2_score is None else f"  s2={cand.stage2_score:+.6f}"
        click.echo(f"{rank:2d}. {cand.doc_id}  s1={cand.stage1_score:+.6f}{s2}")
    click.echo(
        f"best: {response.best.doc_id} (week {response.week}, slide "
        f"{response.slide})\n{response.answer_text}"
    )


@cli.command("eval")
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--idx", "index_path", required=True, type=click.Path(exists=True))
@click.option("--ablation", is_flag=True, help="Report with and without reranking.")
@click.option("--json", "json_path", type=click.Path(), help="Write the report JSON.")
@click.option(
    "--report-dir",
    type=click.Path(),
    help="Write report.json, metrics.csv, and metrics.png into this directory.",
)
@click.option("--k", default=10, show_default=True, type=int)
@click.option("--percent", is_flag=True, help="Display metrics on the 0-100 scale.")
def eval_cmd(
    corpus_dir: str,
    index_path: str,
    ablation: bool,
    json_path: str | None,
    report_dir: str | None,
    k: int,
    percent: bool,
) -> None:
    """Evaluate retrieval quality over the corpus's question/answer pairs."""
    corpus = load_corpus(corpus_dir, strict=False)
    index = FlatIndex.load(index_path)
    embedder = HashingEmbedder(index.dimension)
    scorer = LexicalScorer()
    cfg = PipelineConfig(k=k, rerank_enabled=True)

    if ablation:
        reports = list(run_ablation(corpus, cfg, index, embedder, scorer))
    else:
        reports = [run_eval(corpus, cfg, index, embedder, scorer)]

    click.echo(render_table(reports, percent=percent))
    if json_path:
        write_json(json_path, reports)
        click.echo(f"wrote {json_path}")
    if report_dir:
        paths = write_report_dir(report_dir, reports)
        click.echo(f"wrote {', '.join(str(p) for p in paths.values())}")


@cli.command()
@click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
)
def serve(config_path: str) -> None:
    """Run the HTTP service described by the config file."""
    import uvicorn

    from .service import create_app

    cfg = load_config(config_path)
    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")


@cli.group()
@click.option("--db", "db_path", type=click.Path(), help="User database file.")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    help="Read db_path from a service config file instead.",
)
@click.pass_context
def user(ctx: click.Context, db_path: str | None, config_path: str | None) -> None:
    """Local account bootstrap, writing straight to the database file."""
    if db_path is None:
        if config_path is None:
            raise click.UsageError("provide --db or --config")
        db_path = load_config(config_path).db_path
    ctx.obj = UserStore(db_path)


@user.command("add")
@click.argument("username")
@click.option("--password", prompt=True, hide_input=True, confirmation_prompt=False)
@click.option(
    "--type",
    "user_type",
    type=click.Choice(["admin", "regular"]),
    default="regular",
    show_default=True,
)
@click.pass_obj
def user_add(store: UserStore, username: str, password: str, user_type: str) -> None:
    """Create a user; the password is prompted for when not given."""
    created = store.add(username, password, user_type)
    click.echo(f"created {created.user_type} user {created.username!r} "
               f"(id {created.user_id})")


@user.command("del")
@click.argument("user_id", type=int)
@click.pass_obj
def user_del(store: UserStore, user_id: int) -> None:
    store.delete(user_id)
    click.echo(f"deleted user {user_id}")


@user.command("list")
@click.option("--type", "user_type", type=click.Choice(["admin", "regular"]))
@click.pass_obj
def user_list(store: UserStore, user_type: str | None) -> None:
    for entry in store.list(user_type):
        click.echo(f"{entry.user_id}\t{entry.username}\t{entry.user_type}")


def main() -> None:
    try:
        cli(standalone_mode=True)
    except SlidetutorError as exc:
        click.echo(f"error [{exc.code}]: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
