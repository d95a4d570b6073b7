"""Shared fixtures and independent reference implementations.

The references here are deliberately naive (double loops, textbook formulas)
so they stay independent of the vectorized code paths they check.
"""

from __future__ import annotations

import numpy as np
import pytest

from genberan import Dataset, EmptyNeighborhood, beran_fit, gbe_fit


def random_hard_dataset(rng, n=None, p=1, with_ties=False):
    """Random right-censored dataset with roughly half the events observed."""
    n = n if n is not None else int(rng.integers(3, 40))
    t = rng.exponential(1.0, size=n)
    if with_ties:
        t = np.round(t, 1)
    x = rng.uniform(0.0, 1.0, size=(n, p))
    delta = (rng.uniform(size=n) < 0.6).astype(float)
    return Dataset.hard_indicators(t, x, delta)


def kaplan_meier_reference(t, delta):
    """Textbook product-limit estimator: returns (unique_times, cdf_values).

    At each distinct time, subjects censored there remain at risk for the
    events at that time.
    """
    t = np.asarray(t, dtype=float)
    delta = np.asarray(delta, dtype=float)
    times = np.unique(t)
    surv = 1.0
    out = []
    for tau in times:
        at_risk = np.sum(t >= tau)
        deaths = np.sum((t == tau) & (delta == 1.0))
        surv *= 1.0 - deaths / at_risk
        out.append(1.0 - surv)
    return times, np.array(out)


def loo_cv_reference(ds, h, delta_matrix, probs=None):
    """Double-loop cross-validation score using the public per-point fits."""
    n = ds.n
    exps = ds.indicator if probs is None else np.asarray(probs, float)
    total = 0.0
    for i in range(n):
        keep = np.arange(n) != i
        sub = Dataset.soft_indicators(ds.t[keep], ds.x[keep], exps[keep])
        try:
            curve = gbe_fit(sub, ds.x[i], h)
        except EmptyNeighborhood:
            return float("inf")
        for j in range(n):
            if i == j:
                continue
            f = curve.evaluate(ds.t[j])
            ind = 1.0 if ds.t[i] <= ds.t[j] else 0.0
            total += delta_matrix[i, j] * (ind - f) ** 2
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
