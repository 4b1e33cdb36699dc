"""Pure-numpy fallback kernels (vectorized, chunked, fixed reduction order)."""

import numpy as np

BACKEND = "numpy"

#: rows per chunk; fixed so accumulation order (and bit pattern) is stable
CHUNK = 512


def helmholtz_rows(out_pts, src_pts, k, sign, self_value):
    """Green's-kernel matrix G[r, s] = exp(i*sign*k*d)/(4*pi*d), d = |out_r - src_s|.

    Entries with d < 1e-12 get ``self_value`` (the analytic cell average).
    """
    out_pts = np.ascontiguousarray(out_pts, dtype=float)
    src_pts = np.ascontiguousarray(src_pts, dtype=float)
    diff = out_pts[:, None, :] - src_pts[None, :, :]
    d = np.sqrt(np.einsum("rsj,rsj->rs", diff, diff))
    near = d < 1e-12
    dsafe = np.where(near, 1.0, d)
    g = np.exp((1j * sign * k) * dsafe) / (4.0 * np.pi * dsafe)
    g[near] = self_value
    return g


def helmholtz_apply(src_pts, values, k, sign, self_value, out_pts=None):
    """Direct-quadrature application out[r] = sum_s G[r,s] * values[s].

    ``values`` may be (S,) or (S, m); the sum runs in chunked row order.
    """
    if out_pts is None:
        out_pts = src_pts
    v = np.asarray(values)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    out = np.empty((len(out_pts), v.shape[1]), dtype=complex)
    for i0 in range(0, len(out_pts), CHUNK):
        g = helmholtz_rows(out_pts[i0:i0 + CHUNK], src_pts, k, sign, self_value)
        out[i0:i0 + CHUNK] = g @ v
    return out[:, 0] if squeeze else out


def inv_square_pair_sum(weights, pts):
    """Off-diagonal sum_{a != b} w_a * w_b / |x_a - x_b|^2 (self pairs excluded)."""
    w = np.ascontiguousarray(weights, dtype=float)
    p = np.ascontiguousarray(pts, dtype=float)
    total = 0.0
    n = len(w)
    for i0 in range(0, n, CHUNK):
        diff = p[i0:i0 + CHUNK, None, :] - p[None, :, :]
        d2 = np.einsum("rsj,rsj->rs", diff, diff)
        rows = np.arange(i0, min(i0 + CHUNK, n))
        d2[rows - i0, rows] = np.inf
        total += float(np.sum(w[i0:i0 + CHUNK, None] * w[None, :] / d2))
    return total
