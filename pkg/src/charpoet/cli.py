"""Command-line interface."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import probe as probe_mod
from .bundle import bundled_ngram_backend, bundled_pruned_vocabulary, bundled_vocabulary
from .decoding import (
    DecodePolicy,
    GenerationRequest,
    RemoteBackend,
    ScriptedBackend,
    UniformBackend,
    generate_poem,
)
from .evalharness import (
    AccuracyTable,
    EvalSetting,
    HttpJudge,
    ReplayJudge,
    fit_accuracy_regression,
    judge_content,
    load_prompt_list,
    run_format_eval,
)
from .forms import default_registry, load_form_registry, masked_template
from .logitmask import DEFAULT_PENALTY
from .prompting import build_generation_prompt
from .validation import corpus_format_accuracy, validate_poem
from .vocab import build_long_token_set, load_vocabulary
from .vocab import prune as prune_vocab


def _registry(path: str | None):
    if path:
        return load_form_registry(Path(path).read_bytes())
    return default_registry()


def _vocab(path: str | None):
    if path:
        return load_vocabulary(Path(path).read_bytes())
    return bundled_vocabulary()


def _pruned(path: str | None):
    return prune_vocab(_vocab(path)) if path else bundled_pruned_vocabulary()


def _backend(spec: str, pv):
    if spec == "ngram":
        if pv is not bundled_pruned_vocabulary():
            raise click.BadParameter("the ngram backend requires the bundled vocabulary")
        return bundled_ngram_backend()
    if spec == "uniform":
        return UniformBackend(pv.size)
    if spec.startswith("scripted:"):
        text = Path(spec.split(":", 1)[1]).read_text(encoding="utf-8").strip()
        return ScriptedBackend.replaying_text(pv, text)
    if spec.startswith("tcp://"):
        return RemoteBackend.from_url(spec, pv.size)
    raise click.BadParameter(f"unknown backend {spec!r}")


@click.group()
def main():
    """Token-free Chinese classical poetry toolkit."""


@main.command("prune")
@click.option("--vocab", "vocab_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def prune_cmd(vocab_path, out_dir):
    """Prune a vocabulary: write surviving merges and the long-token mask."""
    v = load_vocabulary(Path(vocab_path).read_bytes())
    pv = prune_vocab(v)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .vocab import encode_token_string

    merges_file = out / "pruned_merges.txt"
    merges_file.write_text(
        "\n".join(f"{encode_token_string(l)} {encode_token_string(r)}" for l, r in pv.surviving_merges)
        + "\n",
        encoding="utf-8",
    )
    mask_file = out / "long_token_ids.txt"
    mask_file.write_text("\n".join(str(i) for i in sorted(pv.long_set)) + "\n", encoding="utf-8")
    click.echo(f"{len(pv.long_set)} long tokens masked; {len(pv.surviving_merges)} merges kept")


@main.group("forms")
def forms_group():
    """Inspect the poem form registry."""


@forms_group.command("list")
@click.option("--registry", "registry_path", type=click.Path(exists=True))
def forms_list(registry_path):
    for form in _registry(registry_path):
        click.echo(f"{form.name}\t{form.category}\t{form.total_chars}")


@forms_group.command("template")
@click.argument("name")
@click.option("--registry", "registry_path", type=click.Path(exists=True))
def forms_template(name, registry_path):
    click.echo(masked_template(_registry(registry_path).get(name)))


@main.group("prompt")
def prompt_group():
    """Prompt construction."""


@prompt_group.command("build")
@click.option("--form", "form_name", required=True)
@click.option("--text", required=True)
@click.option("--registry", "registry_path", type=click.Path(exists=True))
def prompt_build(form_name, text, registry_path):
    form = _registry(registry_path).get(form_name)
    click.echo(build_generation_prompt(text, form).text, nl=False)


@main.command("generate")
@click.option("--form", "form_name", required=True)
@click.option("--prompt", "prompt_text", required=True)
@click.option("--strict", is_flag=True, default=False)
@click.option("--seed", type=int, default=None)
@click.option("--backend", "backend_spec", default="ngram")
@click.option("--mask-penalty", type=float, default=DEFAULT_PENALTY)
@click.option("--registry", "registry_path", type=click.Path(exists=True))
def generate_cmd(form_name, prompt_text, strict, seed, backend_spec, mask_penalty, registry_path):
    """Generate one poem and print it with its validation verdict."""
    pv = bundled_pruned_vocabulary()
    form = _registry(registry_path).get(form_name)
    backend = _backend(backend_spec, pv)
    policy = DecodePolicy(template_enforce=strict, seed=seed)
    result = generate_poem(GenerationRequest(prompt_text, form), backend, policy, pv, penalty=mask_penalty)
    click.echo(result.text)
    report = validate_poem(result.text, form)
    click.echo(f"[format {'OK' if report.passes else 'VIOLATION'}; stop={result.stop_reason.value}]", err=True)


@main.command("validate")
@click.option("--form", "form_name", required=True)
@click.option("--file", "poems_file", required=True, type=click.Path(exists=True))
@click.option("--registry", "registry_path", type=click.Path(exists=True))
def validate_cmd(form_name, poems_file, registry_path):
    """Validate blank-line-separated poems; print JSON reports + accuracy."""
    form = _registry(registry_path).get(form_name)
    blocks = [b.strip() for b in Path(poems_file).read_text(encoding="utf-8").split("\n\n") if b.strip()]
    reports = [validate_poem(b, form) for b in blocks]
    doc = {
        "reports": [r.to_dict() for r in reports],
        "accuracy": corpus_format_accuracy(reports) if reports else None,
    }
    click.echo(json.dumps(doc, ensure_ascii=False, indent=2))


@main.group("probe")
def probe_group():
    """Spelling-bee probe harness."""


@probe_group.command("build")
@click.option("--vocab", "vocab_path", type=click.Path(exists=True))
@click.option("--n", type=int, default=1000)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--include-mixed", is_flag=True, default=False)
def probe_build(vocab_path, n, seed, out_dir, include_mixed):
    v = _vocab(vocab_path)
    test, train = probe_mod.build_probe_set(v, n, seed, include_mixed=include_mixed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "test.jsonl").write_text(probe_mod.dump_items(test) + "\n", encoding="utf-8")
    (out / "train.jsonl").write_text(probe_mod.dump_items(train) + "\n", encoding="utf-8")
    prompts = [probe_mod.probe_prompt(i) for i in test]
    (out / "test_prompts.jsonl").write_text(
        "\n".join(json.dumps(p, ensure_ascii=False) for p in prompts) + "\n", encoding="utf-8"
    )
    click.echo(f"test={len(test)} train={len(train)}")


@probe_group.command("score")
@click.option("--items", "items_file", required=True, type=click.Path(exists=True))
@click.option("--outputs", "outputs_file", required=True, type=click.Path(exists=True))
def probe_score(items_file, outputs_file):
    items = probe_mod.load_items(Path(items_file).read_text(encoding="utf-8"))
    outputs = Path(outputs_file).read_text(encoding="utf-8").splitlines()
    rates = probe_mod.score_probe(items, outputs)
    click.echo(
        json.dumps(
            {"overall": rates.overall, "by_char_count": rates.by_char_count, "n": rates.n},
            indent=2,
        )
    )


@main.group("eval")
def eval_group():
    """Format-accuracy evaluation and content judging."""


@eval_group.command("format")
@click.option("--backend", "backend_spec", default="ngram")
@click.option("--mode", type=click.Choice(["keyword", "instruction"]), default="keyword")
@click.option("--forms", "form_names", default=None, help="comma-separated; default: all registry forms")
@click.option("--trials", type=int, default=100)
@click.option("--strict", is_flag=True, default=False)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--registry", "registry_path", type=click.Path(exists=True))
def eval_format(backend_spec, mode, form_names, trials, strict, seed, out_file, registry_path):
    pv = bundled_pruned_vocabulary()
    registry = _registry(registry_path)
    names = form_names.split(",") if form_names else registry.names()
    prompts = load_prompt_list(mode)[:trials]
    setting = EvalSetting(mode=mode, prompts=prompts, forms=tuple(names))
    backend = _backend(backend_spec, pv)
    policy = DecodePolicy(template_enforce=strict, seed=seed)
    table = run_format_eval(setting, backend, policy, pv, registry)
    Path(out_file).write_text(json.dumps(table.to_dict(), ensure_ascii=False, indent=2), encoding="utf-8")
    click.echo(table.render())


@eval_group.command("regress")
@click.option("--in", "in_file", required=True, type=click.Path(exists=True))
@click.option("--registry", "registry_path", type=click.Path(exists=True))
def eval_regress(in_file, registry_path):
    registry = _registry(registry_path)
    doc = json.loads(Path(in_file).read_text(encoding="utf-8"))
    points = [
        (registry.get(cell["form"]).total_chars, cell["accuracy"])
        for cell in doc["cells"]
        if cell["form"] in registry
    ]
    fit = fit_accuracy_regression(points)
    click.echo(json.dumps({"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2}, indent=2))


@eval_group.command("judge")
@click.option("--in", "in_file", required=True, type=click.Path(exists=True))
@click.option("--cassettes", type=click.Path(), default=None, help="replay directory instead of a live judge")
def eval_judge(in_file, cassettes):
    """Judge poems from a JSON-lines file of {poem, prompt}."""
    judge = ReplayJudge(cassettes) if cassettes else HttpJudge()
    for line in Path(in_file).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        scores = judge_content(doc["poem"], doc["prompt"], judge)
        click.echo(json.dumps(vars(scores) | {"poem": doc["poem"]}, ensure_ascii=False))


@main.command("serve")
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--backend", "backend_spec", default="ngram")
@click.option("--registry", "registry_path", type=click.Path(exists=True))
@click.option("--static-dir", type=click.Path(exists=True), default=None, help="serve the web UI from this directory")
def serve_cmd(port, host, backend_spec, registry_path, static_dir):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    pv = bundled_pruned_vocabulary()
    registry = _registry(registry_path)
    backend = _backend(backend_spec, pv)
    app = create_app(pv, registry, backend)
    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
