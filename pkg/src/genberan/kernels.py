"""Kernel functions, Nadaraya-Watson weights and the covariate density estimator.

Kernels are compactly supported on the closed unit ball (radial mode uses the
Euclidean norm, product mode applies the univariate profile per coordinate).
The default profile is the bi-quadratic kernel K(u) = (15/16)(1-u^2)^2 on
|u| <= 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import EmptyNeighborhood

__all__ = [
    "KernelSpec",
    "kernel_eval",
    "kernel_profile",
    "nw_weights",
    "density_estimate",
    "profile_sup",
    "profile_l2_squared",
    "BIQUADRATIC_L2SQ",
]

_FAMILIES = ("biquadratic", "uniform", "epanechnikov")
_MODES = ("radial", "product")

# integral of ((15/16)(1-u^2)^2)^2 over [-1, 1]
BIQUADRATIC_L2SQ = 5.0 / 7.0


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus the multivariate construction used for p > 1."""

    family: str = "biquadratic"
    multivariate_mode: str = "radial"

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.multivariate_mode not in _MODES:
            raise ValueError(f"unknown multivariate mode {self.multivariate_mode!r}")


def kernel_profile(r, family: str = "biquadratic"):
    """Univariate kernel profile evaluated at (possibly signed) distances."""
    r = np.abs(np.asarray(r, dtype=float))
    inside = r <= 1.0
    if family == "biquadratic":
        v = (15.0 / 16.0) * np.square(1.0 - np.square(r))
    elif family == "epanechnikov":
        v = 0.75 * (1.0 - np.square(r))
    elif family == "uniform":
        v = np.full_like(r, 0.5)
    else:
        raise ValueError(f"unknown kernel family {family!r}")
    return np.where(inside, v, 0.0)


def kernel_eval(u, spec: KernelSpec = KernelSpec()):
    """Evaluate the multivariate kernel at displacement(s) ``u``.

    ``u`` is a single displacement vector (shape ``(p,)`` or scalar) or a
    stack of displacements (shape ``(n, p)``).
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.ndim == 1:
        u = u[None, :]
        squeeze = True
    else:
        squeeze = False
    if spec.multivariate_mode == "radial":
        out = kernel_profile(np.linalg.norm(u, axis=-1), spec.family)
    else:
        out = np.prod(kernel_profile(u, spec.family), axis=-1)
    return float(out[0]) if squeeze else out


def profile_sup(spec: KernelSpec) -> float:
    """Supremum of the kernel, reached at the origin for all families."""
    return float(kernel_eval(np.zeros(1), spec))


def profile_l2_squared(family: str = "biquadratic") -> float:
    """Squared L2 norm of the univariate profile, by quadrature."""
    if family == "biquadratic":
        return BIQUADRATIC_L2SQ
    val, _ = quad(lambda u: kernel_profile(u, family) ** 2, -1.0, 1.0)
    return val


def _kernel_values(x, xs, h, spec: KernelSpec):
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return kernel_eval((xs - x[None, :]) / float(h), spec)


def nw_weights(x, xs, h, spec: KernelSpec = KernelSpec()):
    """Nadaraya-Watson weights of the sample ``xs`` at the query point ``x``.

    Raises EmptyNeighborhood when no sample point falls inside the kernel
    support; callers doing cross-validation treat that as an infinite score.
    """
    k = _kernel_values(x, xs, h, spec)
    total = k.sum()
    if total <= 0.0:
        raise EmptyNeighborhood(
            f"no sample point within bandwidth {h} of the query point"
        )
    return k / total


def density_estimate(x, xs, h, spec: KernelSpec = KernelSpec()):
    """Kernel estimate of the covariate density at ``x``:
    (1/n) sum_i K((x - X_i)/h) / h^p."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    p = xs.shape[1]
    k = _kernel_values(x, xs, h, spec)
    return float(k.mean() / float(h) ** p)
