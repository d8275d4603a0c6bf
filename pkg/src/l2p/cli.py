"""Command-line entry point: ``l2p {synth,summary,cv,train,predict,robustness}``.

Every command computes its results first and writes files last; if anything
fails, files already written by the command are removed and the exit code
is nonzero.
"""
import csv
import json
import math
from contextlib import contextmanager
from pathlib import Path

import click
import numpy as np

from l2p.baselines import KnnConfig
from l2p.classifier import ForestConfig, RandomForest, train_forest
from l2p.data import ccdf_points, generate_synthetic, kurtosis, load_csv, load_query_csv, write_csv
from l2p.errors import L2PError
from l2p.evaluation import METHODS, RunConfig, cross_validate
from l2p.pairs import FullPairing, SampledPairing, build_pairs
from l2p.placement import PLAIN, VOTE_MODES, predict_many
from l2p.placement import explain as explain_placement
from l2p.robustness import MECHANISMS, robustness_sweep


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _num(v) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


class _Writer:
    """Collects output files so a failed command can remove what it wrote."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.written = []

    def path(self, name) -> Path:
        p = self.out_dir / name
        self.written.append(p)
        return p

    def json(self, name, doc):
        self.path(name).write_text(_json_text(doc), encoding="utf-8")

    def csv(self, name, header, rows):
        with self.path(name).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([c if isinstance(c, (int, np.integer)) else _num(c) for c in row])


@contextmanager
def _outputs(out_dir):
    writer = _Writer(out_dir)
    try:
        writer.out_dir.mkdir(parents=True, exist_ok=True)
        yield writer
    except Exception as exc:
        for p in writer.written:
            p.unlink(missing_ok=True)
        if isinstance(exc, (L2PError, OSError)):
            raise click.ClickException(str(exc)) from exc
        raise


@contextmanager
def _surface_errors():
    try:
        yield
    except (L2PError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc


def _forest_options(f):
    f = click.option("--trees", default=100, show_default=True, help="Trees in the forest.")(f)
    f = click.option("--max-depth", type=int, default=None, help="Tree depth limit (default: none).")(f)
    f = click.option("--jobs", default=1, show_default=True, help="Threads for tree training.")(f)
    f = click.option("--pairing", type=click.Choice(["full", "sampled"]), default="full", show_default=True)(f)
    f = click.option("--ns", type=int, default=40, show_default=True, help="Pairs per instance (sampled).")(f)
    f = click.option("--k", "k_near", type=int, default=8, show_default=True,
                     help="Rank neighbours among the --ns pairs (sampled).")(f)
    return f


def _common_options(f):
    f = click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False),
                     help="Training CSV.")(f)
    f = click.option("--target-column", default="target", show_default=True)(f)
    f = click.option("--seed", default=0, show_default=True)(f)
    return f


def _vote_option(f):
    return click.option("--vote", type=click.Choice(VOTE_MODES), default=PLAIN, show_default=True)(f)


def _forest_config(trees, max_depth, jobs) -> ForestConfig:
    return ForestConfig(n_trees=trees, max_depth=max_depth, n_jobs=jobs)


def _pairing(pairing, ns, k_near):
    return SampledPairing(ns, k_near) if pairing == "sampled" else FullPairing()


@click.group()
def main():
    """Learning to Place: pairwise-preference regression for heavy-tailed targets."""


@main.command()
@click.option("--n", type=int, required=True, help="Instances.")
@click.option("--d", type=int, required=True, help="Features.")
@click.option("--tail-index", type=float, default=1.5, show_default=True)
@click.option("--noise", type=float, default=0.1, show_default=True, help="Noise sd relative to score sd.")
@click.option("--seed", default=0, show_default=True)
@click.option("--output", required=True, type=click.Path(dir_okay=False))
def synth(n, d, tail_index, noise, seed, output):
    """Write a synthetic heavy-tailed dataset (target column "target")."""
    with _surface_errors():
        ds = generate_synthetic(n, d, tail_index, noise, seed)
    out = Path(output)
    with _outputs(out.parent) as w:
        write_csv(ds, w.path(out.name))


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@click.option("--target-column", default="target", show_default=True)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def summary(input_path, target_column, out_dir):
    """Dataset size, kurtosis of the target and its CCDF points."""
    with _surface_errors():
        ds = load_csv(input_path, target_column)
        doc = {"n": ds.n, "d": ds.d, "target": ds.target_name, "kurtosis": kurtosis(ds.y)}
        ccdf = ccdf_points(ds.y)
    with _outputs(out_dir) as w:
        w.json("summary.json", doc)
        w.csv("ccdf.csv", ["value", "ccdf"], ccdf)


@main.command()
@_common_options
@_forest_options
@_vote_option
@click.option("--folds", default=5, show_default=True)
@click.option("--strata", default=10, show_default=True)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def cv(input_path, target_column, seed, trees, max_depth, jobs, pairing, ns, k_near, vote, folds, strata,
       out_dir):
    """Stratified cross-validation of L2P against kNN and the shuffled baseline."""
    with _surface_errors():
        ds = load_csv(input_path, target_column)
        config = RunConfig(
            seed=seed,
            forest=_forest_config(trees, max_depth, jobs),
            pairing=_pairing(pairing, ns, k_near),
            vote_mode=vote,
            n_folds=folds,
            n_strata=strata,
            knn=KnnConfig(),
        )
        result = cross_validate(ds, config)
        doc = result.to_dict()
    with _outputs(out_dir) as w:
        w.json("summary.json", doc)
        w.csv("predictions.csv", ["id", "fold", "actual"] + list(METHODS),
              ([int(i), int(f), y] + [result.predictions[m][r] for m in METHODS]
               for r, (i, f, y) in enumerate(zip(ds.ids, result.folds.folds, ds.y))))
        w.csv("actual_ccdf.csv", ["value", "ccdf"], ccdf_points(ds.y))
        for m in METHODS:
            rep = result.pooled[m]
            w.csv(f"{m}_qq.csv", ["actual_quantile", "predicted_quantile"], rep.qq)
            w.csv(f"{m}_roc.csv", ["fpr", "tpr", "threshold"], rep.roc.points)
            w.csv(f"{m}_ccdf.csv", ["value", "ccdf"], ccdf_points(result.predictions[m]))


@main.command()
@_common_options
@_forest_options
@click.option("--output", required=True, type=click.Path(dir_okay=False), help="Model JSON path.")
def train(input_path, target_column, seed, trees, max_depth, jobs, pairing, ns, k_near, output):
    """Fit the pairwise forest on a whole dataset and save it as JSON."""
    with _surface_errors():
        ds = load_csv(input_path, target_column)
        model = _fit(ds, seed, trees, max_depth, jobs, pairing, ns, k_near)
    out = Path(output)
    with _outputs(out.parent) as w:
        w.path(out.name).write_text(_json_text(model.to_dict()), encoding="utf-8")


def _fit(ds, seed, trees, max_depth, jobs, pairing, ns, k_near):
    pairs = build_pairs(ds, _pairing(pairing, ns, k_near), seed)
    return train_forest(pairs, _forest_config(trees, max_depth, jobs), seed)


@main.command()
@_common_options
@_forest_options
@_vote_option
@click.option("--query", required=True, type=click.Path(dir_okay=False), help="CSV with the feature columns.")
@click.option("--model", "model_path", type=click.Path(dir_okay=False), default=None,
              help="Saved model; trained from --input when omitted.")
@click.option("--explain", is_flag=True, help="Also write explanations.json.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def predict(input_path, target_column, seed, trees, max_depth, jobs, pairing, ns, k_near, vote, query,
            model_path, explain, out_dir):
    """Place query instances among the training targets."""
    with _surface_errors():
        ds = load_csv(input_path, target_column)
        Q = load_query_csv(query, ds.feature_names)
        if model_path:
            model = RandomForest.load(model_path)
        else:
            model = _fit(ds, seed, trees, max_depth, jobs, pairing, ns, k_near)
        placements = predict_many(model, ds, Q, vote)
        reports = ([dict(query_id=r, **explain_placement(p, ds, top_n=3)) for r, p in enumerate(placements)]
                   if explain else None)
    with _outputs(out_dir) as w:
        w.csv("predictions.csv", ["query_id", "predicted_value"],
              ([r, p.predicted_value] for r, p in enumerate(placements)))
        if reports is not None:
            w.json("explanations.json", reports)


def _parse_grid(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"not a comma-separated list of numbers: {text!r}") from None
    if not values:
        raise click.BadParameter("grid is empty")
    return values


@main.command()
@_common_options
@_vote_option
@click.option("--mechanism", type=click.Choice(sorted(MECHANISMS)), required=True)
@click.option("--grid", required=True, help="Comma-separated parameter values (p_c or alpha).")
@click.option("--folds", default=5, show_default=True)
@click.option("--strata", default=10, show_default=True)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def robustness(input_path, target_column, seed, vote, mechanism, grid, folds, strata, out_dir):
    """AUC of corrupted-oracle placement over a grid of error levels."""
    values = _parse_grid(grid)
    with _surface_errors():
        ds = load_csv(input_path, target_column)
        curve = robustness_sweep(ds, mechanism, values, folds, strata, seed, vote)
    with _outputs(out_dir) as w:
        curve.write_csv(w.path(f"robustness_{mechanism}.csv"))


if __name__ == "__main__":
    main()
