"""Replication-study harness: MSE curves, global MISE, paired significance
tests and the asymptotic-variance diagnostic.

A study runs N independent replications. Each replication draws a fresh
sample, lets every estimator variant pick its own bandwidth by leave-one-out
cross-validation, fits the conditional distribution at each test covariate
and scores it against the true distribution on a 100-point time grid spanning
the replication's observed range. Replications are driven by disjoint RNG
substreams, so results do not depend on worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed
from scipy import stats
from scipy.integrate import quad

from .bandwidth import (BandwidthGrid, LooScorer, default_grid,
                        soft_pair_weights, useful_pairs)
from .curves import Dataset, SurvivalCurve, beran_fit, gbe_fit
from .errors import DegenerateTail, EmptyNeighborhood
from .kernels import KernelSpec, profile_l2_squared
from .probability import (TrainingConfig, fit_logistic, fit_mlp,
                          fit_nadaraya_watson, prior_indicator)
from .synthetic import (ExponentialModelParams, MultiDimModel,
                        SimulationConfig, oracle_p_exponential,
                        oracle_p_multidim, replication_rng,
                        sample_exponential, sample_multidim,
                        true_F_exponential, true_F_multidim)

__all__ = [
    "VARIANTS",
    "StudyModel",
    "exponential_study_model",
    "multidim_study_model",
    "MSECurve",
    "StudyResult",
    "TTestResult",
    "ComparisonSummary",
    "mse_curve",
    "global_mise",
    "paired_t_test",
    "run_study",
    "summarize_study",
    "variance_diagnostic",
    "theoretical_variance_exponential",
]

VARIANTS = ("beran", "gbe-oracle", "gbe-prior", "gbe-linear", "gbe-nn", "gbe-nw")

_PILOT_TAG = 0xA5A5A5A5


@dataclass(frozen=True)
class StudyModel:
    """A data-generating process with its closed-form truth functions."""

    name: str
    dim: int
    sample: object  # (n, rng) -> SyntheticSample
    true_F: object  # (t, x) -> F(t|x), x a single covariate point
    oracle_p: object  # (t_array, x_matrix) -> per-row event probability


def exponential_study_model(params: ExponentialModelParams = ExponentialModelParams()) -> StudyModel:
    return StudyModel(
        name="exponential",
        dim=1,
        sample=lambda n, rng: sample_exponential(params, n, rng),
        true_F=lambda t, x: true_F_exponential(t, np.atleast_1d(x)[0], params),
        oracle_p=lambda t, x: oracle_p_exponential(np.atleast_2d(x)[:, 0], params),
    )


def multidim_study_model(model: MultiDimModel = MultiDimModel()) -> StudyModel:
    return StudyModel(
        name="multidim",
        dim=5,
        sample=lambda n, rng: sample_multidim(n, rng, model),
        true_F=lambda t, x: np.atleast_1d(true_F_multidim(t, x, model)),
        oracle_p=lambda t, x: np.atleast_1d(oracle_p_multidim(t, x, model)),
    )


@dataclass(frozen=True)
class MSECurve:
    """Pointwise mean squared error over replications at one test covariate."""

    x_test: np.ndarray
    grid: np.ndarray
    mse: np.ndarray


def mse_curve(true_F, curves, grid, x_test) -> MSECurve:
    """Average of squared deviations over the given fitted curves."""
    grid = np.asarray(grid, dtype=float)
    truth = np.asarray(true_F(grid, x_test), dtype=float)
    acc = np.zeros_like(grid)
    for c in curves:
        acc += (truth - c.evaluate(grid)) ** 2
    return MSECurve(np.atleast_1d(np.asarray(x_test, float)), grid, acc / len(curves))


def global_mise(curves_by_x, true_F, grid) -> float:
    """Mean over all test covariates and grid points of the squared error of
    one replication's fitted curves."""
    grid = np.asarray(grid, dtype=float)
    total = 0.0
    count = 0
    for x_test, curve in curves_by_x:
        truth = np.asarray(true_F(grid, x_test), dtype=float)
        total += float(np.sum((truth - curve.evaluate(grid)) ** 2))
        count += grid.size
    return total / count


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_value: float
    dof: int
    zero_variance: bool


def paired_t_test(baseline, variant) -> TTestResult:
    """Two-sided paired t-test on per-replication differences.

    Zero-variance differences do not raise: all-zero differences report
    t=0, p=1; a constant nonzero difference reports p=0.
    """
    baseline = np.asarray(baseline, dtype=float)
    variant = np.asarray(variant, dtype=float)
    if baseline.shape != variant.shape or baseline.size < 2:
        raise ValueError("paired sequences of length >= 2 required")
    d = variant - baseline
    dof = d.size - 1
    sd = d.std(ddof=1)
    if sd == 0.0:
        if np.all(d == 0.0):
            return TTestResult(0.0, 1.0, dof, True)
        return TTestResult(np.inf if d[0] > 0 else -np.inf, 0.0, dof, True)
    t = float(d.mean() / (sd / np.sqrt(d.size)))
    p = float(2.0 * stats.t.sf(abs(t), dof))
    return TTestResult(t, p, dof, False)


@dataclass(frozen=True)
class ComparisonSummary:
    variant: str
    mean_mise: float
    sd_mise: float
    t_statistic: float
    p_value: float
    significant: bool
    win_fraction: float


@dataclass(frozen=True)
class StudyResult:
    """Everything a replication study produced."""

    variants: tuple
    regime: str
    mise: dict  # variant -> (reps,) array, nan for failed replications
    bandwidths: dict  # variant -> (reps,) array
    failures: dict  # variant -> count of excluded replications
    mse_curves: dict  # variant -> (len(x_test), grid_size) mean squared error
    fixed_grid: np.ndarray
    x_test: tuple
    config: SimulationConfig
    seed: int


def _as_points(x_test, dim):
    pts = []
    for x in x_test:
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        if arr.size == 1 and dim > 1:
            arr = np.full(dim, arr[0])
        if arr.size != dim:
            raise ValueError(f"test point {x!r} has wrong dimension")
        pts.append(arr)
    return pts


def _variant_probs(variant, model, train, evals, rng, classifier_config,
                   prior_noise_sd, nw_bandwidth):
    """Per-sample product-limit exponents for one variant on the evaluation
    sample."""
    t, x, delta = evals.t, evals.x, evals.delta
    if variant == "beran":
        return delta
    if variant == "gbe-oracle":
        return np.clip(np.asarray(model.oracle_p(t, x), float), 0.0, 1.0)
    if variant == "gbe-prior":
        q = np.clip(np.asarray(model.oracle_p(t, x), float), 0.0, 1.0)
        noise = rng.normal(0.0, prior_noise_sd, size=t.size)
        return prior_indicator(delta, q, noise)
    train_ds = Dataset.hard_indicators(train.t, train.x, train.delta)
    if variant == "gbe-linear":
        clf = fit_logistic(train_ds, classifier_config)
    elif variant == "gbe-nn":
        clf = fit_mlp(train_ds, classifier_config)
    elif variant == "gbe-nw":
        clf = fit_nadaraya_watson(train_ds, nw_bandwidth)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return np.clip(clf.predict(t, x), 0.0, 1.0)


def _one_replication(k, model, config, variants, regime, spec, grid,
                     classifier_config, prior_noise_sd, nw_bandwidth,
                     fixed_grid, x_points):
    rng = replication_rng(config.seed, k)
    train = model.sample(config.n, rng)
    evals = model.sample(config.n, rng) if regime == "missing" else train
    ds_hard = Dataset.hard_indicators(evals.t, evals.x, evals.delta)
    hard_pairs = useful_pairs(ds_hard)
    scorer = LooScorer(ds_hard, spec)
    rep_grid = np.linspace(evals.t.min(), evals.t.max(), config.grid_size)
    clf_cfg = replace(classifier_config, seed=classifier_config.seed ^ config.seed ^ k)

    out = {}
    for variant in variants:
        probs = _variant_probs(variant, model, train, evals, rng, clf_cfg,
                               prior_noise_sd, nw_bandwidth)
        if regime == "missing" and variant != "beran":
            pairs = soft_pair_weights(ds_hard, probs)
        else:
            pairs = hard_pairs
        scores = np.array([scorer.score(h, probs, pairs) for h in grid.values])
        if not np.any(np.isfinite(scores)):
            out[variant] = (np.nan, np.nan, None)
            continue
        h_best = float(grid.values[int(np.argmin(scores))])
        ds_fit = (ds_hard if variant == "beran"
                  else Dataset.soft_indicators(evals.t, evals.x, probs))
        fit = beran_fit if variant == "beran" else gbe_fit
        try:
            curves = [fit(ds_fit, xp, h_best, spec) for xp in x_points]
        except EmptyNeighborhood:
            out[variant] = (np.nan, h_best, None)
            continue
        mise = global_mise(zip(x_points, curves), model.true_F, rep_grid)
        sq = np.stack([
            (np.asarray(model.true_F(fixed_grid, xp), float) - c.evaluate(fixed_grid)) ** 2
            for xp, c in zip(x_points, curves)
        ])
        out[variant] = (mise, h_best, sq)
    return out


def run_study(model: StudyModel, config: SimulationConfig, variants,
              regime: str = "observed", spec: KernelSpec = KernelSpec(),
              grid: BandwidthGrid | None = None,
              classifier_config: TrainingConfig = TrainingConfig(),
              prior_noise_sd: float = 0.01, nw_bandwidth: float = 0.3,
              n_jobs: int = 1) -> StudyResult:
    """Run the full replication study; deterministic given (config, seed),
    independent of ``n_jobs``."""
    if regime not in ("observed", "missing"):
        raise ValueError("regime must be 'observed' or 'missing'")
    variants = tuple(variants)
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}")
    grid = grid if grid is not None else default_grid()
    x_points = _as_points(config.x_test, model.dim)

    pilot = model.sample(config.n, replication_rng(config.seed, _PILOT_TAG))
    lo, hi = np.quantile(pilot.t, [0.01, 0.99])
    fixed_grid = np.linspace(lo, hi, config.grid_size)

    args = (model, config, variants, regime, spec, grid, classifier_config,
            prior_noise_sd, nw_bandwidth, fixed_grid, x_points)
    if n_jobs == 1:
        rep_results = [_one_replication(k, *args) for k in range(config.reps)]
    else:
        rep_results = Parallel(n_jobs=n_jobs)(
            delayed(_one_replication)(k, *args) for k in range(config.reps))

    mise = {v: np.full(config.reps, np.nan) for v in variants}
    bands = {v: np.full(config.reps, np.nan) for v in variants}
    failures = {v: 0 for v in variants}
    sq_acc = {v: np.zeros((len(x_points), config.grid_size)) for v in variants}
    sq_cnt = {v: 0 for v in variants}
    for k, res in enumerate(rep_results):
        for v, (m, h, sq) in res.items():
            mise[v][k] = m
            bands[v][k] = h if h is not None else np.nan
            if sq is None or not np.isfinite(m):
                failures[v] += 1
            else:
                sq_acc[v] += sq
                sq_cnt[v] += 1
    curves = {v: sq_acc[v] / max(sq_cnt[v], 1) for v in variants}
    return StudyResult(variants, regime, mise, bands, failures, curves,
                       fixed_grid, tuple(config.x_test), config, config.seed)


def summarize_study(result: StudyResult, baseline: str = "beran",
                    alpha: float = 0.001, paired: bool = True):
    """Per-variant mean/sd of MISE and a significance test against the
    baseline (paired by replication unless ``paired`` is off, which falls
    back to Welch's two-sample test)."""
    if baseline not in result.variants:
        raise ValueError(f"baseline {baseline!r} not part of the study")
    base = result.mise[baseline]
    rows = []
    for v in result.variants:
        vals = result.mise[v]
        ok = np.isfinite(vals) & np.isfinite(base)
        mean = float(np.mean(vals[np.isfinite(vals)]))
        sd = float(np.std(vals[np.isfinite(vals)], ddof=1))
        if v == baseline:
            rows.append(ComparisonSummary(v, mean, sd, 0.0, 1.0, False, 0.5))
            continue
        if paired:
            tt = paired_t_test(base[ok], vals[ok])
            t, p = tt.statistic, tt.p_value
        else:
            t, p = stats.ttest_ind(vals[ok], base[ok], equal_var=False)
            t, p = float(t), float(p)
        win = float(np.mean(vals[ok] < base[ok]))
        significant = (p < alpha) and (mean < float(np.mean(base[ok])))
        rows.append(ComparisonSummary(v, mean, sd, t, p, significant, win))
    return rows


def theoretical_variance_exponential(params: ExponentialModelParams, x: float,
                                     t: float, indicator: str = "oracle",
                                     spec: KernelSpec = KernelSpec()) -> float:
    """Asymptotic pointwise variance of sqrt(n h^p)(F_hat - F) at (t, x) for
    the single-covariate exponential model, by adaptive quadrature.

    ``indicator`` selects the second moment of the soft indicator: the
    oracle probability squared, or the event rate itself for hard 0/1
    indicators.
    """
    a = float(params.mean_survival(x))
    b = float(params.mean_censor(x))
    rate = 1.0 / a + 1.0 / b
    p_event = b / (a + b)
    if 1.0 - (1.0 - np.exp(-rate * t)) < 1e-6:
        raise DegenerateTail(f"1 - H({t}|{x}) below 1e-6")
    second_moment = p_event ** 2 if indicator == "oracle" else p_event
    integral, _ = quad(lambda y: second_moment * rate * np.exp(rate * y),
                       0.0, t, epsabs=1e-8, epsrel=1e-10)
    surv = np.exp(-t / a)
    density = 1.0 if 0.0 <= x <= 1.0 else 0.0
    if density == 0.0:
        raise ValueError("x outside the covariate support")
    return float(profile_l2_squared(spec.family) * surv * surv * integral)


def variance_diagnostic(params: ExponentialModelParams, x: float, t: float,
                        n: int, h: float, reps: int, seed: int = 0,
                        indicator: str = "oracle",
                        spec: KernelSpec = KernelSpec()):
    """Empirical vs theoretical variance of the normalized estimation error.

    Empirical: variance over ``reps`` replications of
    sqrt(n h^p) (F_hat(t|x) - F(t|x)) with the chosen indicators.
    """
    theoretical = theoretical_variance_exponential(params, x, t, indicator, spec)
    truth = float(true_F_exponential(t, x, params))
    scale = np.sqrt(n * h)  # p = 1
    errors = np.empty(reps)
    xq = np.atleast_1d(float(x))
    for r in range(reps):
        rng = replication_rng(seed, r)
        s = sample_exponential(params, n, rng)
        if indicator == "oracle":
            probs = oracle_p_exponential(s.x[:, 0], params)
            ds = Dataset.soft_indicators(s.t, s.x, probs)
            curve = gbe_fit(ds, xq, h, spec)
        else:
            curve = beran_fit(s.dataset(), xq, h, spec)
        errors[r] = scale * (curve.evaluate(t) - truth)
    return float(np.var(errors, ddof=1)), theoretical
