"""Command-line surface.

Every command is a pure function of (config, input files, seed): rerunning
with the same inputs produces byte-identical CSV and SVG outputs, regardless
of the worker count.
"""

from __future__ import annotations

import os
from dataclasses import replace

import click
import numpy as np

from . import plots
from .bandwidth import (BandwidthGrid, select_bandwidth, soft_pair_weights,
                        useful_pairs)
from .curves import Dataset, beran_fit, gbe_fit, lemma1_gap
from .errors import EmptyNeighborhood
from .evaluation import (exponential_study_model, multidim_study_model,
                         run_study, summarize_study, variance_diagnostic)
from .io import (MGUS2_SCHEMA, DatasetSchema, RunConfig, format_float,
                 load_csv, save_dataset_csv, write_rows)
from .kernels import KernelSpec
from .probability import (TrainingConfig, fit_logistic, fit_mlp,
                          fit_nadaraya_watson, load_model, save_model)
from .synthetic import (ExponentialModelParams, SimulationConfig,
                        replication_rng, sample_exponential, sample_multidim,
                        true_F_exponential)


def _study_model(name: str):
    if name == "exponential":
        return exponential_study_model()
    if name == "multidim":
        return multidim_study_model()
    raise click.UsageError(f"unknown model {name!r}")


def _schema_from_options(time_col, event_col, prob_col, covariates):
    if covariates is None:
        return MGUS2_SCHEMA
    return DatasetSchema(
        time_column=time_col,
        covariate_columns=tuple(c.strip() for c in covariates.split(",")),
        event_column=event_col if prob_col is None else None,
        probability_column=prob_col,
    )


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="Sectioned key=value configuration file.")
@click.option("--seed", type=int, default=None, help="Override the run seed.")
@click.option("--out-dir", type=click.Path(), default=None,
              help="Output directory (created if absent).")
@click.option("--threads", type=int, default=None,
              help="Worker count for replication studies.")
@click.pass_context
def main(ctx, config_path, seed, out_dir, threads):
    """Conditional survival estimation with soft censoring indicators."""
    cfg = RunConfig.from_file(config_path) if config_path else RunConfig()
    if seed is not None:
        cfg.set("run", "seed", seed)
    if out_dir is not None:
        cfg.set("run", "out_dir", out_dir)
    if threads is not None:
        cfg.set("run", "threads", threads)
    ctx.obj = cfg


def _outdir(cfg) -> str:
    d = str(cfg.get("run", "out_dir"))
    os.makedirs(d, exist_ok=True)
    return d


@main.command()
@click.option("--model", default=None, help="exponential or multidim.")
@click.option("--n", type=int, default=None, help="Sample size per file.")
@click.option("--reps", type=int, default=None, help="Number of files.")
@click.pass_obj
def simulate(cfg, model, n, reps):
    """Generate synthetic samples as CSV files plus a manifest."""
    model = model or str(cfg.get("simulate", "model"))
    n = n if n is not None else int(cfg.get("simulate", "n"))
    reps = reps if reps is not None else int(cfg.get("simulate", "reps"))
    seed = int(cfg.get("run", "seed"))
    out = _outdir(cfg)
    params = ExponentialModelParams()
    files = []
    for k in range(reps):
        rng = replication_rng(seed, k)
        s = (sample_exponential(params, n, rng) if model == "exponential"
             else sample_multidim(n, rng))
        path = os.path.join(out, f"sample_{k:04d}.csv")
        save_dataset_csv(s.dataset(), path)
        files.append(os.path.basename(path))
    with open(os.path.join(out, "manifest.txt"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(f"model = {model}\nn = {n}\nreps = {reps}\nseed = {seed}\n")
        for f in files:
            fh.write(f"file = {f}\n")
    click.echo(f"wrote {reps} sample file(s) to {out}")


_SCHEMA_OPTIONS = [
    click.option("--time-col", default="futime", show_default=True),
    click.option("--event-col", default="death", show_default=True),
    click.option("--prob-col", default=None,
                 help="Soft-indicator column (replaces --event-col)."),
    click.option("--covariates", default=None,
                 help="Comma-separated covariate columns "
                      "[default: age,creat,hgb,mspike]."),
]


def _with_schema_options(fn):
    for opt in reversed(_SCHEMA_OPTIONS):
        fn = opt(fn)
    return fn


@main.command("train-classifier")
@click.argument("data_path", type=click.Path(exists=True))
@_with_schema_options
@click.option("--variant", default=None, help="logistic, mlp or nw.")
@click.option("--val-split", type=float, default=0.0, show_default=True,
              help="Held-out fraction for reporting cross-entropy.")
@click.option("--model-out", default="model.json", show_default=True)
@click.pass_obj
def train_classifier(cfg, data_path, time_col, event_col, prob_col,
                     covariates, variant, val_split, model_out):
    """Train an event-probability classifier and save it to a model file."""
    variant = variant or str(cfg.get("classifier", "variant"))
    schema = _schema_from_options(time_col, event_col, prob_col, covariates)
    ds, report = load_csv(data_path, schema)
    seed = int(cfg.get("run", "seed"))
    tc = TrainingConfig(
        epochs=int(cfg.get("classifier", "epochs")),
        learning_rate=float(cfg.get("classifier", "learning_rate")),
        batch_size=int(cfg.get("classifier", "batch_size")),
        seed=seed,
        l2_penalty=float(cfg.get("classifier", "l2_penalty")) or None,
    )
    if val_split > 0:
        rng = np.random.default_rng(seed)
        perm = rng.permutation(ds.n)
        cut = int(round(ds.n * (1.0 - val_split)))
        tr = Dataset.hard_indicators(ds.t[perm[:cut]], ds.x[perm[:cut]],
                                     ds.indicator[perm[:cut]])
        va = Dataset.hard_indicators(ds.t[perm[cut:]], ds.x[perm[cut:]],
                                     ds.indicator[perm[cut:]])
    else:
        tr, va = ds, None

    if variant == "logistic":
        model = fit_logistic(tr, tc)
        if model.single_class:
            click.echo("warning: single class in training data; "
                       "constant-rate model saved")
    elif variant == "mlp":
        model = fit_mlp(tr, tc)
    elif variant == "nw":
        model = fit_nadaraya_watson(tr, float(cfg.get("bandwidth", "nw_bandwidth")))
    else:
        raise click.UsageError(f"unknown classifier variant {variant!r}")
    out = _outdir(cfg)
    path = os.path.join(out, model_out)
    save_model(model, path)
    click.echo(f"loaded {report.loaded} rows ({report.dropped} dropped); "
               f"model written to {path}")
    if va is not None and va.n > 0:
        p = np.clip(model.predict(va.t, va.x), 1e-12, 1 - 1e-12)
        ce = float(np.mean(-va.indicator * np.log(p)
                           - (1 - va.indicator) * np.log(1 - p)))
        click.echo(f"held-out cross-entropy: {format_float(ce)}")


@main.command("select-bandwidth")
@click.argument("data_path", type=click.Path(exists=True))
@_with_schema_options
@click.option("--kind", default="beran", show_default=True,
              help="beran or gbe.")
@click.pass_obj
def select_bandwidth_cmd(cfg, data_path, time_col, event_col, prob_col,
                         covariates, kind):
    """Grid-search the cross-validated bandwidth for a dataset."""
    schema = _schema_from_options(time_col, event_col, prob_col, covariates)
    ds, _ = load_csv(data_path, schema)
    grid = BandwidthGrid(cfg.grid_values())
    if kind == "beran":
        weights = useful_pairs(ds)
        h, scores = select_bandwidth(ds, grid, "beran", weights)
    else:
        weights = soft_pair_weights(ds, ds.indicator)
        h, scores = select_bandwidth(ds, grid, "gbe", weights,
                                     probs=ds.indicator)
    out = _outdir(cfg)
    write_rows(os.path.join(out, "bandwidth_scores.csv"), ["h", "score"],
               [[hv, sv] for hv, sv in zip(grid.values, scores)])
    click.echo(f"h_best = {format_float(h)}")


@main.command()
@click.argument("data_path", type=click.Path(exists=True))
@_with_schema_options
@click.option("--x", "x_point", required=True,
              help="Query covariate point, comma-separated (scaled units).")
@click.option("--h", "h_value", default=None, type=float,
              help="Bandwidth; omit for cross-validated selection.")
@click.pass_obj
def fit(cfg, data_path, time_col, event_col, prob_col, covariates, x_point,
        h_value):
    """Fit a conditional survival curve at one covariate point."""
    schema = _schema_from_options(time_col, event_col, prob_col, covariates)
    ds, _ = load_csv(data_path, schema)
    xq = np.array([float(v) for v in x_point.split(",")])
    if h_value is None:
        grid = BandwidthGrid(cfg.grid_values())
        if ds.hard:
            h_value, _ = select_bandwidth(ds, grid, "beran", useful_pairs(ds))
        else:
            h_value, _ = select_bandwidth(
                ds, grid, "gbe", soft_pair_weights(ds, ds.indicator),
                probs=ds.indicator)
    curve = beran_fit(ds, xq, h_value) if ds.hard else gbe_fit(ds, xq, h_value)
    out = _outdir(cfg)
    path = os.path.join(out, "curve.csv")
    write_rows(path, ["t", "cdf", "survival"],
               [[t, c, 1.0 - c] for t, c in
                zip(curve.jump_times, curve.cdf_values)])
    plots.plot_survival_series(
        curve.jump_times, {"fit": 1.0 - curve.cdf_values},
        os.path.join(out, "curve.svg"), title=f"x = {x_point}, h = {h_value}")
    click.echo(f"h = {format_float(h_value)}; curve written to {path}")


def _write_study_outputs(result, out, tag):
    rows = [[v, s.mean_mise, s.sd_mise, s.p_value,
             "yes" if s.significant else "no"]
            for v, s in zip(result.variants,
                            summarize_study(result, baseline=result.variants[0]))]
    write_rows(os.path.join(out, f"summary_{tag}.csv"),
               ["variant", "mean_mise", "sd_mise", "p_value", "significant"],
               rows)
    rep_rows = []
    for v in result.variants:
        for k in range(result.config.reps):
            rep_rows.append([v, str(k), result.mise[v][k],
                             result.bandwidths[v][k]])
    write_rows(os.path.join(out, f"replications_{tag}.csv"),
               ["variant", "replication", "mise", "h"], rep_rows)
    curve_rows = []
    for v in result.variants:
        for j, x in enumerate(result.x_test):
            for t, m in zip(result.fixed_grid, result.mse_curves[v][j]):
                curve_rows.append([v, str(j), t, m])
    write_rows(os.path.join(out, f"mse_curves_{tag}.csv"),
               ["variant", "x_index", "t", "mse"], curve_rows)
    plots.plot_mse_curves(result, os.path.join(out, f"mse_curves_{tag}.svg"))


@main.command()
@click.option("--model", default=None)
@click.option("--n", type=int, default=None)
@click.option("--reps", type=int, default=None)
@click.option("--variants", default=None,
              help="Comma-separated estimator variants.")
@click.option("--regime", default=None,
              help="observed, missing, or both.")
@click.pass_obj
def study(cfg, model, n, reps, variants, regime):
    """Run a replication study and emit summary, per-replication and
    MSE-curve CSVs plus figures."""
    name = model or str(cfg.get("study", "model"))
    n = n if n is not None else int(cfg.get("study", "n"))
    reps = reps if reps is not None else int(cfg.get("study", "reps"))
    variants = (variants or str(cfg.get("study", "variants"))).split(",")
    regime = regime or str(cfg.get("study", "regime"))
    sm = _study_model(name)
    sim = SimulationConfig(
        n=n, reps=reps, seed=int(cfg.get("run", "seed")),
        x_test=tuple(cfg.x_test_points()),
        grid_size=int(cfg.get("study", "grid_size")))
    tc = TrainingConfig(
        epochs=int(cfg.get("classifier", "epochs")),
        learning_rate=float(cfg.get("classifier", "learning_rate")),
        batch_size=int(cfg.get("classifier", "batch_size")),
        l2_penalty=float(cfg.get("classifier", "l2_penalty")) or None)
    out = _outdir(cfg)
    regimes = ("observed", "missing") if regime == "both" else (regime,)
    for reg in regimes:
        result = run_study(
            sm, sim, variants, regime=reg,
            grid=BandwidthGrid(cfg.grid_values()),
            classifier_config=tc,
            nw_bandwidth=float(cfg.get("bandwidth", "nw_bandwidth")),
            n_jobs=int(cfg.get("run", "threads")))
        _write_study_outputs(result, out, reg)
        click.echo(f"[{reg}] " + "; ".join(
            f"{v}: mean MISE {np.nanmean(result.mise[v]):.3e}"
            for v in result.variants))


@main.command("real-data")
@click.argument("data_path", type=click.Path(exists=True))
@_with_schema_options
@click.option("--splits", type=int, default=None,
              help="Number of random train/test splits.")
@click.option("--variants", default="beran,gbe-linear,gbe-nn",
              show_default=True)
@click.option("--h", "h_value", type=float, default=None,
              help="Fixed bandwidth; omit for per-split cross-validation.")
@click.pass_obj
def real_data(cfg, data_path, time_col, event_col, prob_col, covariates,
              splits, variants, h_value):
    """Train/test split study on a clinical dataset; writes mean survival
    curves per quartile test point."""
    schema = _schema_from_options(time_col, event_col, prob_col, covariates)
    ds, report = load_csv(data_path, schema)
    if not ds.hard:
        raise click.UsageError("real-data requires hard event indicators")
    splits = splits if splits is not None else int(cfg.get("real_data", "splits"))
    ratio = float(cfg.get("real_data", "train_ratio"))
    grid_size = int(cfg.get("real_data", "grid_size"))
    seed = int(cfg.get("run", "seed"))
    variants = [v.strip() for v in variants.split(",")]
    grid = BandwidthGrid(cfg.grid_values())
    spec = KernelSpec()

    x_points = [np.quantile(ds.x, q, axis=0) for q in (0.25, 0.5, 0.75)]
    tgrid = np.linspace(0.0, float(np.quantile(ds.t, 0.95)), grid_size)
    sums = {v: np.zeros((len(x_points), grid_size)) for v in variants}
    counts = {v: np.zeros((len(x_points), 1)) for v in variants}

    tc = TrainingConfig(
        epochs=int(cfg.get("classifier", "epochs")),
        learning_rate=float(cfg.get("classifier", "learning_rate")),
        batch_size=int(cfg.get("classifier", "batch_size")),
        l2_penalty=float(cfg.get("classifier", "l2_penalty")) or None)

    for k in range(splits):
        rng = replication_rng(seed, k)
        perm = rng.permutation(ds.n)
        cut = int(round(ds.n * ratio))
        tr_idx, te_idx = perm[:cut], perm[cut:]
        train = Dataset.hard_indicators(ds.t[tr_idx], ds.x[tr_idx],
                                        ds.indicator[tr_idx])
        test = Dataset.hard_indicators(ds.t[te_idx], ds.x[te_idx],
                                       ds.indicator[te_idx])
        for v in variants:
            if v == "beran":
                fit_ds, kind, probs = test, "beran", None
            else:
                clf_cfg = replace(tc, seed=seed ^ k)
                if v == "gbe-linear":
                    clf = fit_logistic(train, clf_cfg)
                elif v == "gbe-nn":
                    clf = fit_mlp(train, clf_cfg)
                elif v == "gbe-nw":
                    clf = fit_nadaraya_watson(
                        train, float(cfg.get("bandwidth", "nw_bandwidth")))
                else:
                    raise click.UsageError(f"unknown variant {v!r}")
                probs = np.clip(clf.predict(test.t, test.x), 0.0, 1.0)
                fit_ds, kind = Dataset.soft_indicators(test.t, test.x, probs), "gbe"
            if h_value is not None:
                h = h_value
            else:
                weights = (useful_pairs(test) if kind == "beran"
                           else soft_pair_weights(test, probs))
                h, _ = select_bandwidth(fit_ds, grid, kind, weights, probs=probs)
            for j, xp in enumerate(x_points):
                try:
                    curve = (beran_fit(fit_ds, xp, h, spec) if kind == "beran"
                             else gbe_fit(fit_ds, xp, h, spec))
                except EmptyNeighborhood:
                    continue
                sums[v][j] += 1.0 - curve.evaluate(tgrid)
                counts[v][j] += 1

    out = _outdir(cfg)
    for j, xp in enumerate(x_points):
        series = {}
        for v in variants:
            if counts[v][j] > 0:
                series[v] = sums[v][j] / counts[v][j]
        raw = report.scaler.inverse(xp)
        label = ",".join(format_float(v) for v in raw)
        rows = [[t, *[series[v][i] for v in series]] for i, t in enumerate(tgrid)]
        write_rows(os.path.join(out, f"survival_q{j + 1}.csv"),
                   ["t", *series.keys()], rows)
        plots.plot_survival_series(
            tgrid, series, os.path.join(out, f"survival_q{j + 1}.svg"),
            title=f"x = ({label})")
    click.echo(f"{splits} split(s) on {report.loaded} rows; "
               f"curves written to {out}")


@main.group()
def diagnostics():
    """Numerical diagnostics from the asymptotic theory."""


@diagnostics.command()
@click.option("--n", type=int, default=500, show_default=True)
@click.option("--h", type=float, default=0.3, show_default=True)
@click.option("--x", type=float, default=0.5, show_default=True)
@click.option("--tau-quantile", type=float, default=0.8, show_default=True)
@click.pass_obj
def lemma1(cfg, n, h, x, tau_quantile):
    """Exponential-approximation gap vs its kernel-sup bound."""
    seed = int(cfg.get("run", "seed"))
    params = ExponentialModelParams()
    s = sample_exponential(params, n, replication_rng(seed, 0))
    probs = np.clip(
        np.asarray(exponential_study_model(params).oracle_p(s.t, s.x)), 0, 1)
    ds = Dataset.soft_indicators(s.t, s.x, probs)
    tau1 = float(np.quantile(s.t, tau_quantile))
    gap, bound = lemma1_gap(ds, np.array([x]), h, tau1=tau1)
    click.echo(f"gap = {format_float(gap)}; bound = {format_float(bound)}; "
               f"ok = {gap <= bound}")


@diagnostics.command()
@click.option("--n", type=int, default=2000, show_default=True)
@click.option("--reps", type=int, default=500, show_default=True)
@click.option("--h", type=float, default=0.3, show_default=True)
@click.option("--x", type=float, default=0.5, show_default=True)
@click.option("--t", "t_value", type=float, default=None,
              help="Time point [default: median of the true distribution].")
@click.pass_obj
def variance(cfg, n, reps, h, x, t_value):
    """Empirical vs theoretical variance of the normalized error."""
    seed = int(cfg.get("run", "seed"))
    params = ExponentialModelParams()
    if t_value is None:
        t_value = float(params.mean_survival(x)) * np.log(2.0)
    emp, theo = variance_diagnostic(params, x, t_value, n, h, reps, seed=seed)
    click.echo(f"empirical = {format_float(emp)}; "
               f"theoretical = {format_float(theo)}; "
               f"ratio = {format_float(emp / theo)}")


if __name__ == "__main__":
    main()
