"""Rollnik functionals: the double integral over pairs and its spectral twin.

The direct method coarsens the grid, sums |q(x)||q(y)|/|x-y|^2 over cell
pairs and replaces the self-pair by its analytic cell average.  The spectral
method uses Plancherel with the transform of 1/|x|^2, which is 2*pi^2/|k|;
the singular k = 0 cell again takes its analytic average.  Absolute values
are applied to the potential (the standard Rollnik convention).
"""

import numpy as np

from .. import _accel
from ..core.transforms import to_spectral
from .born import CUBE_INV_R, CUBE_PAIR_INV_R2, PotentialSample


def _coarsen_abs(values: np.ndarray, stride: int) -> np.ndarray:
    """Block-mean of |values| over stride^3 cells."""
    n = values.shape[0]
    if n % stride != 0:
        raise ValueError(f"stride {stride} does not divide n={n}")
    m = n // stride
    v = np.abs(values).reshape(m, stride, m, stride, m, stride)
    return v.mean(axis=(1, 3, 5))


def rollnik_direct(q: PotentialSample, stride: int | None = None) -> float:
    g = q.grid
    if stride is None:
        stride = max(1, g.n // 16)
    h = g.dx * stride
    coarse = _coarsen_abs(q.q.values, stride)
    m = coarse.shape[0]
    axis = h * (np.arange(m) + 0.5 * (stride - 1) / stride)  # block centroids
    X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    w = coarse.ravel() * h**3
    off_diag = _accel.inv_square_pair_sum(w, pts)
    self_term = float(np.sum(coarse.ravel() ** 2) * h**4 * CUBE_PAIR_INV_R2)
    return off_diag + self_term


def rollnik_spectral(q: PotentialSample) -> float:
    g = q.grid
    from ..core.grid import ScalarField

    q_abs = to_spectral(ScalarField(g, np.abs(q.q.values)))
    k2 = g.k_squared
    kmag = np.sqrt(np.where(k2 == 0.0, 1.0, k2))
    weight = 2.0 * np.pi**2 / kmag
    # k = 0 cell: analytic average of 1/|k| over one spectral cell
    weight = np.where(k2 == 0.0, 2.0 * np.pi**2 * CUBE_INV_R / g.dk, weight)
    total = np.sum(np.abs(q_abs.coeffs) ** 2 * weight) * g.dk**3 / (2 * np.pi) ** 3
    return float(total)


def rollnik_norm(q: PotentialSample, method: str = "both", stride: int | None = None):
    """Rollnik double integral; method direct | spectral | both.

    "both" returns (direct, spectral, relative gap).  Results are cached on
    the sample.
    """
    if method not in ("direct", "spectral", "both"):
        raise ValueError(f"method must be direct|spectral|both, got '{method}'")
    cache = q._rollnik_cache
    if method in ("direct", "both") and "direct" not in cache:
        cache["direct"] = rollnik_direct(q, stride)
    if method in ("spectral", "both") and "spectral" not in cache:
        cache["spectral"] = rollnik_spectral(q)
    if method == "direct":
        return cache["direct"]
    if method == "spectral":
        return cache["spectral"]
    d, s = cache["direct"], cache["spectral"]
    gap = abs(d - s) / max(abs(d), abs(s), 1e-300)
    return d, s, gap


def birman_schwinger_bound(q: PotentialSample) -> float:
    """Upper bound Rollnik(q) / (4*pi)^2 on the number of negative eigenvalues."""
    return rollnik_norm(q, "direct") / (4.0 * np.pi) ** 2
