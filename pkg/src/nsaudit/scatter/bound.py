"""Grid Hamiltonian bound states and the Blaschke factor they generate.

H = -Laplacian_grid + diag(q) with the 7-point periodic stencil; eigenpairs
below zero are the bound states.  Grids up to 16^3 use the dense
eigensolver (the test oracle); larger grids go through sparse Lanczos.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import NsauditError
from .born import PotentialSample

DENSE_LIMIT = 16


class BoundStateSet:
    """Negative eigenpairs (-E_j^2, psi_j), grid-normalized ||psi_j||_L2 = 1."""

    def __init__(self, grid, energies: np.ndarray, states: np.ndarray):
        if np.any(energies >= 0):
            raise ValueError("bound-state eigenvalues must be strictly negative")
        self.grid = grid
        self.energies = energies          # eigenvalues -E_j^2, ascending
        self.states = states              # (count, n, n, n) real arrays

    @property
    def count(self) -> int:
        return len(self.energies)

    @property
    def e_values(self) -> np.ndarray:
        """The positive E_j with eigenvalue -E_j^2."""
        return np.sqrt(-self.energies)

    def orthonormality_defect(self) -> float:
        if self.count == 0:
            return 0.0
        vol = self.grid.cell_volume
        mat = vol * np.einsum(
            "axyz,bxyz->ab", self.states, self.states)
        return float(np.max(np.abs(mat - np.eye(self.count))))


def _laplacian_1d(n, dx):
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    lap = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    lap[0, n - 1] = 1.0
    lap[n - 1, 0] = 1.0
    return sp.csr_matrix(lap) / dx**2


def _hamiltonian(q: PotentialSample):
    g = q.grid
    lap1 = _laplacian_1d(g.n, g.dx)
    eye = sp.identity(g.n, format="csr")
    lap = (
        sp.kron(sp.kron(lap1, eye), eye)
        + sp.kron(sp.kron(eye, lap1), eye)
        + sp.kron(sp.kron(eye, eye), lap1)
    )
    return (-lap + sp.diags(q.q.values.ravel())).tocsr()


def bound_states(q: PotentialSample, n_eig_max: int = 32) -> BoundStateSet:
    """All negative eigenpairs of H = -Lap + q, up to n_eig_max of them."""
    g = q.grid
    H = _hamiltonian(q)
    if g.n <= DENSE_LIMIT:
        vals, vecs = np.linalg.eigh(H.toarray())
        neg = vals < 0
        vals, vecs = vals[neg], vecs[:, neg]
    else:
        k = min(n_eig_max, H.shape[0] - 2)
        try:
            vals, vecs = spla.eigsh(H, k=k, which="SA")
        except spla.ArpackNoConvergence as exc:  # pragma: no cover
            raise NsauditError(f"eigensolver did not converge: {exc}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        neg = vals < 0
        vals, vecs = vals[neg], vecs[:, neg]
    if len(vals) > n_eig_max:
        vals, vecs = vals[:n_eig_max], vecs[:, :n_eig_max]
    # grid normalization: ||psi||_L2^2 = dx^3 * sum psi^2 = 1
    states = (vecs / np.sqrt(g.cell_volume)).T.reshape(-1, g.n, g.n, g.n)
    return BoundStateSet(g, vals, states)


def blaschke(states: BoundStateSet | None, k) -> complex | np.ndarray:
    """Delta(k) = prod_j (k + i E_j) / (k - i E_j); empty product is 1."""
    k = np.asarray(k, dtype=complex)
    out = np.ones_like(k)
    if states is not None and states.count:
        for e in states.e_values:
            out = out * (k + 1j * e) / (k - 1j * e)
    if out.ndim == 0:
        return complex(out)
    return out


def blaschke_function(states: BoundStateSet | None):
    """Callable k -> Delta(k) for the wave-function assembly."""
    return lambda k: blaschke(states, k)
