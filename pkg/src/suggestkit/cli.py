"""Command-line pipeline: train, simulate, fit, evaluate, sweep, serve, report.

Every subcommand is deterministic under its seed flags (the service
excluded). Outputs land under --out with a manifest listing file hashes;
paper-derived constants (tau 0.5, K 3, L 6, desirability scale 10, M 10,
5 folds, 10% holdout, 500 eval locations) are defaults, never hard-coded
inside the pipeline.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

import click
import numpy as np

from . import corpus, counterfactual as cf, features, logstore, ngram, policy, report, simwriter


def _update_manifest(out_dir: Path, paths: list[Path]) -> None:
    manifest_path = out_dir / "manifest.json"
    manifest = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    for p in paths:
        manifest[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _config_defaults(ctx, param, value):
    """--config FILE: JSON whose keys become defaults for the other flags."""
    if value is None:
        return None
    data = json.loads(Path(value).read_text(encoding="utf-8"))
    ctx.default_map = {**data, **(ctx.default_map or {})}
    return value


CONFIG_OPT = click.option(
    "--config", type=click.Path(exists=True), callback=_config_defaults,
    is_eager=True, expose_value=False, help="JSON file of default option values.",
)


@click.group()
def main():
    """Counterfactual learning toolkit for phrase suggestions."""


@main.command("train-lm")
@CONFIG_OPT
@click.argument("corpus_path", type=click.Path(exists=True), required=False)
@click.option("--order", default=5, show_default=True)
@click.option("--holdout", default=0.10, show_default=True, help="Held-out document fraction.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", default="out", show_default=True)
def train_lm_cmd(corpus_path, order, holdout, seed, out_dir):
    """Train the base n-gram model and write splits + model file."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = corpus_path or corpus.bundled_corpus_path()
    docs = corpus.load_documents(path)
    train, held_train, held_test = corpus.split_corpus(docs, holdout, seed)
    lm = ngram.train_lm(train, order=order)
    lm_path = out / "lm.bin"
    lm.save(lm_path)
    split_paths = []
    for name, split in (
        ("train_ids.txt", train),
        ("heldout_train_ids.txt", held_train),
        ("heldout_test_ids.txt", held_test),
    ):
        corpus.save_split_ids(out / name, split)
        split_paths.append(out / name)
    ppl = ngram.perplexity(lm, held_train)
    click.echo(f"vocabulary size: {len(lm.vocab)}")
    click.echo(f"held-out perplexity: {ppl:.3f}")
    _update_manifest(out, [lm_path, *split_paths])
    click.echo(f"model written to {lm_path}")


def _load_world(out_dir, corpus_path, lexicon):
    out = Path(out_dir)
    lm = ngram.NgramModel.load(out / "lm.bin")
    lex = features.load_pos_lexicon(lexicon or corpus.bundled_lexicon_path())
    docs = corpus.load_documents(corpus_path or corpus.bundled_corpus_path())
    return out, lm, lex, docs


@main.command("simulate")
@CONFIG_OPT
@click.option("--corpus", "corpus_path", type=click.Path(exists=True))
@click.option("--lexicon", type=click.Path(exists=True))
@click.option("--split", default="heldout_train_ids.txt", show_default=True,
              help="Split-id file (under --out) to sample locations from.")
@click.option("--tau", default=policy.DEFAULT_TAU, show_default=True)
@click.option("--locations", "n_locations", default=2000, show_default=True)
@click.option("--min-context", default=1, show_default=True)
@click.option("--k", default=3, show_default=True)
@click.option("--length", default=6, show_default=True)
@click.option("--desirability-kind", default="long-word-count", show_default=True)
@click.option("--desirability-scale", default=10.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", default="out", show_default=True)
def simulate_cmd(corpus_path, lexicon, split, tau, n_locations, min_context, k, length,
                 desirability_kind, desirability_scale, seed, out_dir):
    """Run the simulated writer against the reference policy; write logs."""
    if n_locations < 1:
        raise click.ClickException("need at least one location")
    out, lm, lex, docs = _load_world(out_dir, corpus_path, lexicon)
    split_docs = corpus.load_split(out / split, docs)
    locs = corpus.sample_locations(split_docs, n_locations, min_context, seed, min_continuation=length)
    pol = policy.reference_policy(lm, lex, tau)
    writer = simwriter.DesirabilityParams(desirability_kind, desirability_scale)
    rng = np.random.default_rng(seed)
    recs, achieved = simwriter.simulate_session(
        locs, split_docs, pol, writer, lm, lex, rng, k=k, length=length
    )
    log_path = out / "logs.jsonl"
    log_path.unlink(missing_ok=True)
    tag = f"reference-tau{tau}"
    now = time.time()
    records = [
        logstore.LogRecord(
            session_id=f"sim-{seed}",
            event_index=i,
            context=r.context,
            words=r.words,
            word_props=r.per_word_probs,
            propensity=r.propensity,
            reward=r.reward,
            policy_tag=tag,
            timestamp=now,
            doc_id=r.group,
        )
        for i, r in enumerate(recs)
    ]
    logstore.write_records(log_path, records)
    summary = {"achieved_reward": achieved, "locations": n_locations, "records": len(recs),
               "tau": tau, "policy_tag": tag, "seed": seed}
    summary_path = out / "simulate_summary.json"
    summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    _update_manifest(out, [log_path, summary_path])
    click.echo(f"achieved reward: {achieved:.4f} over {n_locations} locations -> {log_path}")


@main.command("fit")
@CONFIG_OPT
@click.argument("logs", type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", type=click.Path(exists=True))
@click.option("--lexicon", type=click.Path(exists=True))
@click.option("--m", "m_clip", default=cf.DEFAULT_M, show_default=True)
@click.option("--tau", default=policy.DEFAULT_TAU, show_default=True,
              help="Temperature of the starting (reference) weights.")
@click.option("--max-iter", default=200, show_default=True)
@click.option("--out", "out_dir", default="out", show_default=True)
def fit_cmd(logs, corpus_path, lexicon, m_clip, tau, max_iter, out_dir):
    """Fit policy weights by maximizing the clipped estimate on LOGS."""
    out, lm, lex, _ = _load_world(out_dir, corpus_path, lexicon)
    data = logstore.load_dataset(logs)
    if not data:
        raise click.ClickException(f"no records in {logs}")
    theta0 = policy.reference_weights(tau)
    fitted = cf.fit(data, theta0, m_clip, lm, lex, opts=cf.FitOptions(max_iter=max_iter))
    weights_path = out / "weights.txt"
    policy.save_weights(weights_path, fitted)
    est = cf.clipped_estimate(data, fitted, m_clip, lm, lex)
    click.echo(f"fitted estimate (M={m_clip}): {est.estimate:.4f} "
               f"(clip fraction {est.clip_fraction:.3f})")
    _update_manifest(out, [weights_path])
    click.echo(f"weights written to {weights_path}")


@main.command("evaluate")
@CONFIG_OPT
@click.argument("logs", type=click.Path(exists=True))
@click.argument("weights", type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", type=click.Path(exists=True))
@click.option("--lexicon", type=click.Path(exists=True))
@click.option("--m", "m_clip", default=cf.DEFAULT_M, show_default=True)
@click.option("--out", "out_dir", default="out", show_default=True)
def evaluate_cmd(logs, weights, corpus_path, lexicon, m_clip, out_dir):
    """Clipped off-policy estimate of WEIGHTS on LOGS."""
    _, lm, lex, _ = _load_world(out_dir, corpus_path, lexicon)
    data = logstore.load_dataset(logs)
    if not data:
        raise click.ClickException(f"no records in {logs}")
    theta = policy.load_weights(weights)
    rep = cf.clipped_estimate(data, theta, m_clip, lm, lex)
    click.echo(f"estimate: {rep.estimate:.6f}  n={rep.n}  "
               f"clip_fraction={rep.clip_fraction:.4f}  M={rep.m}")


@main.command("sweep-m")
@CONFIG_OPT
@click.argument("logs", type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", type=click.Path(exists=True))
@click.option("--lexicon", type=click.Path(exists=True))
@click.option("--folds", default=5, show_default=True)
@click.option("--m-fit", default=cf.DEFAULT_M, show_default=True)
@click.option("--m-grid", default="1,2,5,10,20,50", show_default=True)
@click.option("--tau", default=policy.DEFAULT_TAU, show_default=True)
@click.option("--out", "out_dir", default="out", show_default=True)
def sweep_m_cmd(logs, corpus_path, lexicon, folds, m_fit, m_grid, tau, out_dir):
    """Cross-validated estimates of fitted/temperature/reference across M."""
    out, lm, lex, _ = _load_world(out_dir, corpus_path, lexicon)
    data = logstore.load_dataset(logs)
    if not data:
        raise click.ClickException(f"no records in {logs}")
    grid = tuple(float(x) for x in m_grid.split(","))
    cells = cf.crossval_evaluate(
        data, policy.reference_weights(tau), lm, lex, folds=folds, m_fit=m_fit, m_grid=grid
    )
    table_path = out / "sweep_m.csv"
    summary_path = out / "sweep_m_summary.csv"
    cf.write_evaluation_table(table_path, cells)
    summary = cf.summarize_cells(cells)
    cf.write_summary_table(summary_path, summary)
    for row in summary:
        click.echo(f"{row['model']:<12} M={row['m']:<6g} {row['mean']:.4f} +- {row['std']:.4f}")
    _update_manifest(out, [table_path, summary_path])


@main.command("compare")
@CONFIG_OPT
@click.argument("logs", type=click.Path(exists=True))
@click.argument("weights", type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", type=click.Path(exists=True))
@click.option("--lexicon", type=click.Path(exists=True))
@click.option("--split", default="heldout_test_ids.txt", show_default=True)
@click.option("--m", "m_clip", default=cf.DEFAULT_M, show_default=True)
@click.option("--tau", default=policy.DEFAULT_TAU, show_default=True)
@click.option("--eval-locations", default=500, show_default=True)
@click.option("--desirability-kind", default="long-word-count", show_default=True)
@click.option("--desirability-scale", default=10.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", default="out", show_default=True)
def compare_cmd(logs, weights, corpus_path, lexicon, split, m_clip, tau, eval_locations,
                desirability_kind, desirability_scale, seed, out_dir):
    """Clipped estimate vs simulated true reward for reference and fitted."""
    out, lm, lex, docs = _load_world(out_dir, corpus_path, lexicon)
    data = logstore.load_dataset(logs)
    if not data:
        raise click.ClickException(f"no records in {logs}")
    split_docs = corpus.load_split(out / split, docs)
    locs = corpus.sample_locations(split_docs, eval_locations, 1, seed)
    writer = simwriter.DesirabilityParams(desirability_kind, desirability_scale)
    rows = []
    for name, theta in (
        ("reference", policy.reference_weights(tau)),
        ("fitted", policy.load_weights(weights)),
    ):
        est = cf.clipped_estimate(data, theta, m_clip, lm, lex)
        pol = policy.LogLinearPolicy(theta, lm, lex)
        mean, se = simwriter.true_reward(
            pol, writer, locs, split_docs, lm, lex, np.random.default_rng(seed)
        )
        rows.append({"policy": name, "estimate": est.estimate,
                     "true_reward": mean, "true_se": se})
        click.echo(f"{name:<10} estimate={est.estimate:.4f} true={mean:.4f} (se {se:.4f})")
    path = out / "reward_comparison.json"
    path.write_text(json.dumps({"m": m_clip, "policies": rows}, indent=2) + "\n", encoding="utf-8")
    _update_manifest(out, [path])


@main.command("generate")
@CONFIG_OPT
@click.option("--weights", type=click.Path(exists=True), help="Weights file; default reference.")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True))
@click.option("--lexicon", type=click.Path(exists=True))
@click.option("--tau", default=policy.DEFAULT_TAU, show_default=True)
@click.option("-n", "n_samples", default=10, show_default=True)
@click.option("--length", default=6, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", default="out", show_default=True)
def generate_cmd(weights, corpus_path, lexicon, tau, n_samples, length, seed, out_dir):
    """Print sampled phrases from the review-start context."""
    _, lm, lex, _ = _load_world(out_dir, corpus_path, lexicon)
    theta = policy.load_weights(weights) if weights else policy.reference_weights(tau)
    pol = policy.LogLinearPolicy(theta, lm, lex)
    rng = np.random.default_rng(seed)
    for _ in range(n_samples):
        s = pol.sample_phrase([corpus.BOR], length=length, rng=rng)
        click.echo(" ".join(s.words))


@main.command("serve")
@CONFIG_OPT
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8040, show_default=True)
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--weights", "weights_path", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True))
@click.option("--log", "log_path", default="service_logs.jsonl", show_default=True)
@click.option("--k", default=3, show_default=True)
@click.option("--length", default=6, show_default=True)
@click.option("--timeout", default=1800.0, show_default=True, help="Idle session timeout (s).")
def serve_cmd(host, port, model_path, weights_path, lexicon_path, log_path, k, length, timeout):
    """Run the HTTP suggestion service."""
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig(
        model_path=model_path,
        weights_path=weights_path,
        lexicon_path=str(lexicon_path or corpus.bundled_lexicon_path()),
        log_path=log_path,
        k=k,
        length=length,
        session_timeout=timeout,
    )
    uvicorn.run(create_app(config), host=host, port=port)


@main.command("report")
@CONFIG_OPT
@click.option("--out", "out_dir", default="out", show_default=True)
def report_cmd(out_dir):
    """Render figures from the delimited outputs in --out."""
    out = Path(out_dir)
    made = []
    sweep = out / "sweep_m_summary.csv"
    if sweep.exists():
        made.append(report.plot_m_sweep(sweep, out / "sweep_m.png"))
    comparison = out / "reward_comparison.json"
    if comparison.exists():
        made.append(report.plot_reward_comparison(comparison, out / "reward_comparison.png"))
    if not made:
        raise click.ClickException(f"no plottable outputs found under {out}")
    _update_manifest(out, made)
    for p in made:
        click.echo(f"wrote {p}")


if __name__ == "__main__":
    main()
