"""Command-line front end: analyze one target, sweep all targets, export
attention files, or serve the HTTP API.

Exit codes: 0 success, 2 usage error (bad flags, bad input, bad target),
3 backend failure (models unavailable, unreadable attention file).
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import click

from .attention.model import ModelAttentionProvider
from .attention.providers import FileAttentionProvider
from .attention.types import ProviderConfig
from .attention.attnfile import write_attention_file
from .docmodel import align, segment
from .errors import (
    ClaimLensError,
    EmptyDocument,
    IndexOutOfRange,
    InfeasiblePattern,
    OffsetOutOfBounds,
    PipelineError,
    SelfPair,
)
from .fixturedata import FixtureAttentionProvider, load_nli_fixture_records
from .fusion import analyze, prepare
from .nli import (
    FixtureNLIBackend,
    ModelNLIBackend,
    NLIConfig,
    NLIEngine,
    VerdictCache,
)
from .render import render
from .saliency import ThresholdPolicy

_USAGE_ERRORS = (EmptyDocument, IndexOutOfRange, SelfPair, OffsetOutOfBounds,
                 InfeasiblePattern)

EXIT_USAGE = 2
EXIT_BACKEND = 3


def _fail(exc: Exception):
    cause = exc.cause if isinstance(exc, PipelineError) else exc
    code = EXIT_USAGE if isinstance(cause, _USAGE_ERRORS) else EXIT_BACKEND
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_USAGE)


def _build_backends(backend: str, attn_file: str | None, nli_cache: str | None):
    """(attention provider, NLI engine) for one invocation."""
    if backend == "files":
        if not attn_file:
            raise click.UsageError("--backend files requires --attn-file")
        provider = FileAttentionProvider(attn_file)
    elif backend == "fixture":
        provider = FixtureAttentionProvider()
    else:
        provider = ModelAttentionProvider(ProviderConfig(backend="model"))

    if backend == "model":
        config = NLIConfig(backend="model")
        nli_backend = ModelNLIBackend(config)
    else:
        config = NLIConfig(backend="fixture")
        nli_backend = FixtureNLIBackend(load_nli_fixture_records())
    engine = NLIEngine(nli_backend, config=config, cache=VerdictCache(nli_cache))
    return provider, engine


def _policy_from_flags(mode: str, tau: float, k: float, m: int,
                       direction: str) -> ThresholdPolicy:
    try:
        return ThresholdPolicy(mode=mode, tau=tau, k=k, m=m, direction=direction)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _emit(artifact: str, out: str | None) -> None:
    if out:
        Path(out).write_text(artifact + "\n", encoding="utf-8")
    else:
        click.echo(artifact, color=True)  # keep ANSI when piped; format was explicit


def _policy_options(fn):
    fn = click.option("--direction", default="max_both",
                      type=click.Choice(["outgoing", "incoming", "max_both"]),
                      help="Which attention direction scores a candidate.")(fn)
    fn = click.option("--m", default=1, type=int, show_default=True,
                      help="Candidate count for top_m policy.")(fn)
    fn = click.option("--tau", default=0.0, type=float, show_default=True,
                      help="Threshold for absolute policy.")(fn)
    fn = click.option("--k", default=1.0, type=float, show_default=True,
                      help="Std-dev multiplier for relative policy.")(fn)
    fn = click.option("--policy", "mode", default="relative",
                      type=click.Choice(["absolute", "relative", "top_m"]),
                      show_default=True)(fn)
    fn = click.option("--tau-confirm", default=0.0, type=float,
                      help="Optional stricter fusion gate on top of the policy.")(fn)
    return fn


def _backend_options(fn):
    fn = click.option("--nli-cache", type=click.Path(dir_okay=False),
                      help="JSONL verdict cache, read and appended.")(fn)
    fn = click.option("--attn-file", type=click.Path(dir_okay=False),
                      help="Attention file for --backend files.")(fn)
    fn = click.option("--backend", default="model", show_default=True,
                      type=click.Choice(["model", "fixture", "files"]))(fn)
    return fn


@click.group()
@click.version_option(package_name="claimlens")
def main():
    """Targeted claim analysis: attention saliency fused with NLI labels."""


@main.command("analyze")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--target-index", required=True, type=int)
@_policy_options
@click.option("--format", "fmt", default="json", show_default=True,
              type=click.Choice(["json", "html", "terminal"]))
@_backend_options
@click.option("--out", type=click.Path(dir_okay=False))
def analyze_cmd(input_path, target_index, mode, tau, k, m, direction,
                tau_confirm, fmt, backend, attn_file, nli_cache, out):
    """Label premises and contradictions of one target sentence."""
    policy = _policy_from_flags(mode, tau, k, m, direction)
    provider, engine = _build_backends(backend, attn_file, nli_cache)
    try:
        doc = segment(_read_text(input_path))
        result = analyze(doc, target_index, attention_provider=provider,
                         nli=engine, policy=policy, tau_confirm=tau_confirm)
        _emit(render(result, doc, fmt), out)
    except ClaimLensError as exc:
        _fail(exc)


@main.command("sweep")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@_policy_options
@_backend_options
@click.option("--jobs", default=1, type=int, show_default=True,
              help="Concurrent targets (NLI batches stay bounded).")
@click.option("--out", type=click.Path(dir_okay=False))
def sweep_cmd(input_path, mode, tau, k, m, direction, tau_confirm,
              backend, attn_file, nli_cache, jobs, out):
    """Analyze every sentence as the target; emits a JSON array."""
    policy = _policy_from_flags(mode, tau, k, m, direction)
    provider, engine = _build_backends(backend, attn_file, nli_cache)
    try:
        doc = segment(_read_text(input_path))
        prepared = prepare(doc, provider)

        def run(target: int):
            return analyze(prepared.doc, target, nli=engine, policy=policy,
                           tau_confirm=tau_confirm,
                           saliency_matrix=prepared.saliency)

        targets = range(len(prepared.doc.sentences))
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(run, targets))
        else:
            results = [run(t) for t in targets]
    except ClaimLensError as exc:
        _fail(exc)

    n = len(results)
    bound = 2 * n * (n - 1)
    click.echo(
        f"sweep: {n} targets, {engine.counters.pair_requests} NLI pair "
        f"requests (exhaustive bound {bound}), "
        f"{engine.counters.backend_pairs} reached the backend", err=True)
    _emit(json.dumps([r.to_dict() for r in results], indent=2), out)


@main.command("export-attn")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--backend", default="model", show_default=True,
              type=click.Choice(["model", "fixture"]))
def export_attn_cmd(input_path, out, backend):
    """Run attention extraction once and save it as a replayable file."""
    if backend == "fixture":
        provider = FixtureAttentionProvider()
    else:
        provider = ModelAttentionProvider(ProviderConfig(backend="model"))
    try:
        doc = segment(_read_text(input_path))
        att, alignment = provider.get_attention(doc)
        align(doc, alignment)  # fail fast if tokens do not cover the text
        write_attention_file(out, att, alignment, doc.doc_id)
    except ClaimLensError as exc:
        _fail(exc)
    click.echo(f"wrote {att.n_tokens} tokens to {out}", err=True)


@main.command("serve")
@click.option("--host", default=None, help="Override BIND_ADDR host.")
@click.option("--port", default=None, type=int, help="Override BIND_ADDR port.")
@click.option("--backend", default=None, type=click.Choice(["model", "fixture"]),
              help="Override BACKEND_MODE.")
def serve_cmd(host, port, backend):
    """Run the HTTP API (uvicorn)."""
    import uvicorn

    from .service import Settings, create_app

    settings = Settings.from_env()
    if backend:
        settings = replace(settings, backend_mode=backend)
    bind_host = host or settings.host
    bind_port = port if port is not None else settings.port
    uvicorn.run(create_app(settings), host=bind_host, port=bind_port)


if __name__ == "__main__":
    main()
