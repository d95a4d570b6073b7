import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from genberan import (DegenerateTail, ExponentialModelParams,
                      SimulationConfig, SurvivalCurve, exponential_study_model,
                      global_mise, mse_curve, multidim_study_model,
                      paired_t_test, run_study, summarize_study,
                      theoretical_variance_exponential, variance_diagnostic)
from genberan.evaluation import VARIANTS
from genberan.kernels import profile_l2_squared


def _step_curve(times, values):
    return SurvivalCurve(np.asarray(times, float), np.asarray(values, float),
                         np.array([0.0]), 1.0)


# --- MSE / MISE ------------------------------------------------------------

def test_mse_curve_hand_case():
    truth = lambda t, x: np.zeros_like(np.asarray(t, float))
    c1 = _step_curve([0.0], [0.2])  # constant 0.2 on the grid
    c2 = _step_curve([0.0], [0.4])
    curve = mse_curve(truth, [c1, c2], np.array([1.0, 2.0]), 0.5)
    np.testing.assert_allclose(curve.mse, (0.2 ** 2 + 0.4 ** 2) / 2)


def test_global_mise_hand_case():
    truth = lambda t, x: np.full(np.asarray(t, float).shape, 0.5)
    c = _step_curve([0.0], [0.0])  # constant zero -> squared error 0.25
    grid = np.linspace(1, 2, 10)
    assert global_mise([(0.3, c), (0.7, c)], truth, grid) == pytest.approx(0.25)


def test_global_mise_matches_double_loop(rng):
    model = exponential_study_model()
    grid = np.linspace(0.1, 2.0, 25)
    xs = [np.array([0.3]), np.array([0.8])]
    curves = [_step_curve(np.sort(rng.uniform(0, 2, 7)), np.sort(rng.uniform(0, 1, 7)))
              for _ in xs]
    fast = global_mise(zip(xs, curves), model.true_F, grid)
    total, count = 0.0, 0
    for x, c in zip(xs, curves):
        for t in grid:
            total += (float(model.true_F(t, x)) - c.evaluate(t)) ** 2
            count += 1
    assert fast == pytest.approx(total / count, rel=1e-12)


# --- paired t-test ---------------------------------------------------------

def test_paired_t_test_matches_scipy(rng):
    for _ in range(20):
        n = int(rng.integers(3, 40))
        a = rng.normal(size=n)
        b = a + rng.normal(0.1, 0.5, size=n)
        mine = paired_t_test(a, b)
        ref = stats.ttest_rel(b, a)
        assert mine.statistic == pytest.approx(ref.statistic, rel=1e-10)
        assert mine.p_value == pytest.approx(ref.pvalue, rel=1e-10)
        assert mine.dof == n - 1


def test_paired_t_test_zero_variance_paths():
    same = paired_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert same.zero_variance and same.statistic == 0.0 and same.p_value == 1.0
    shifted = paired_t_test([1.0, 2.0], [1.5, 2.5])
    assert shifted.zero_variance and shifted.p_value == 0.0
    assert shifted.statistic == np.inf


def test_paired_t_test_validation():
    with pytest.raises(ValueError):
        paired_t_test([1.0], [2.0])
    with pytest.raises(ValueError):
        paired_t_test([1.0, 2.0], [1.0, 2.0, 3.0])


# --- replication studies ---------------------------------------------------

def _tiny_config(reps=3, n=60):
    return SimulationConfig(n=n, reps=reps, seed=42, x_test=(0.3, 0.7),
                            grid_size=20)


def test_run_study_oracle_beats_nothing_smoke():
    model = exponential_study_model()
    result = run_study(model, _tiny_config(), ("beran", "gbe-oracle"))
    assert set(result.mise) == {"beran", "gbe-oracle"}
    for v in result.mise:
        assert result.mise[v].shape == (3,)
        assert np.all(np.isfinite(result.mise[v]))
        assert np.all(np.isin(result.bandwidths[v],
                              np.round(np.arange(1, 11) * 0.1, 10)))


def test_run_study_deterministic_across_workers():
    model = exponential_study_model()
    cfg = _tiny_config(reps=4)
    r1 = run_study(model, cfg, ("beran", "gbe-oracle"), n_jobs=1)
    r2 = run_study(model, cfg, ("beran", "gbe-oracle"), n_jobs=2)
    for v in r1.mise:
        np.testing.assert_array_equal(r1.mise[v], r2.mise[v])
        np.testing.assert_array_equal(r1.bandwidths[v], r2.bandwidths[v])
        np.testing.assert_array_equal(r1.mse_curves[v], r2.mse_curves[v])


def test_run_study_gbe_with_hard_probs_equals_beran():
    """With P identically delta the generalized estimator must reproduce the
    classical one replication by replication; the paired difference is 0."""
    model = exponential_study_model()
    # gbe-prior with zero noise and oracle q replaced is not delta; instead
    # compare beran against itself through the soft path via gbe-oracle on a
    # degenerate model whose oracle returns the hard indicator. Build one:
    from genberan.evaluation import StudyModel

    probs_holder = {}

    def oracle_is_delta(t, x):
        return probs_holder["delta"]

    base = exponential_study_model()

    def sample(n, rng):
        s = base.sample(n, rng)
        probs_holder["delta"] = s.delta
        return s

    rigged = StudyModel("rigged", 1, sample, base.true_F, oracle_is_delta)
    result = run_study(rigged, _tiny_config(), ("beran", "gbe-oracle"))
    np.testing.assert_allclose(result.mise["gbe-oracle"],
                               result.mise["beran"], atol=1e-12)


def test_run_study_missing_regime_uses_fresh_sample():
    model = exponential_study_model()
    res = run_study(model, _tiny_config(reps=2), ("beran", "gbe-oracle"),
                    regime="missing")
    assert res.regime == "missing"
    assert np.all(np.isfinite(res.mise["gbe-oracle"]))


def test_run_study_classifier_variants_smoke():
    model = exponential_study_model()
    from genberan import TrainingConfig
    res = run_study(model, _tiny_config(reps=2, n=80),
                    ("beran", "gbe-linear", "gbe-nw"),
                    classifier_config=TrainingConfig(epochs=2))
    for v in res.variants:
        assert np.all(np.isfinite(res.mise[v]))


def test_run_study_multidim_smoke():
    model = multidim_study_model()
    cfg = SimulationConfig(n=60, reps=2, seed=1, x_test=(0.5,), grid_size=15)
    res = run_study(model, cfg, ("beran", "gbe-oracle"))
    assert res.mse_curves["beran"].shape == (1, 15)


def test_run_study_rejects_bad_inputs():
    model = exponential_study_model()
    with pytest.raises(ValueError):
        run_study(model, _tiny_config(), ("beran",), regime="bogus")
    with pytest.raises(ValueError):
        run_study(model, _tiny_config(), ("beran", "mystery"))


def test_summarize_study_flags_identical_variants():
    model = exponential_study_model()
    res = run_study(model, _tiny_config(), ("beran", "gbe-oracle"))
    rows = summarize_study(res, baseline="beran", alpha=0.5)
    assert rows[0].variant == "beran" and rows[0].p_value == 1.0
    assert {r.variant for r in rows} == {"beran", "gbe-oracle"}
    for r in rows:
        assert np.isfinite(r.mean_mise) and r.mean_mise >= 0


def test_variants_tuple_is_complete():
    assert VARIANTS == ("beran", "gbe-oracle", "gbe-prior", "gbe-linear",
                        "gbe-nn", "gbe-nw")


# --- asymptotic variance ---------------------------------------------------

def test_theoretical_variance_closed_form():
    """Quadrature result must equal the closed form
    ||K||_2^2 e^{-2t/a} m2 (e^{ct} - 1) with c = 1/a + 1/b."""
    params = ExponentialModelParams()
    x, t = 0.5, 0.8
    a = float(params.mean_survival(x))
    b = float(params.mean_censor(x))
    c = 1.0 / a + 1.0 / b
    p = b / (a + b)
    for indicator, m2 in (("oracle", p * p), ("hard", p)):
        got = theoretical_variance_exponential(params, x, t, indicator)
        want = profile_l2_squared("biquadratic") * np.exp(-2 * t / a) * \
            m2 * (np.exp(c * t) - 1.0)
        assert got == pytest.approx(want, rel=1e-8)


def test_theoretical_variance_soft_below_hard():
    params = ExponentialModelParams()
    soft = theoretical_variance_exponential(params, 0.5, 0.8, "oracle")
    hard = theoretical_variance_exponential(params, 0.5, 0.8, "hard")
    assert soft < hard


def test_theoretical_variance_degenerate_tail():
    params = ExponentialModelParams()
    with pytest.raises(DegenerateTail):
        theoretical_variance_exponential(params, 0.5, 50.0)
    with pytest.raises(ValueError):
        theoretical_variance_exponential(params, 2.0, 0.5)


def test_variance_diagnostic_smoke():
    params = ExponentialModelParams()
    emp, theo = variance_diagnostic(params, 0.5, 0.6, n=300, h=0.4, reps=40,
                                    seed=3)
    assert emp > 0 and theo > 0
    # loose sanity band at smoke scale; the acceptance suite tightens this
    assert 0.2 < emp / theo < 5.0
