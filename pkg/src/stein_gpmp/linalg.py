"""Banded (block-tridiagonal) matrix helpers.

Every precision-like matrix in the planner (prior precision, Gauss-Newton
Hessians, the averaged metric) is block-tridiagonal with block size
``state_dim``, i.e. banded with half-bandwidth ``2 * state_dim - 1``. These
helpers store such matrices as ``scipy.sparse`` CSR and factorize them
through LAPACK's banded Cholesky.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp


class FactorizationError(np.linalg.LinAlgError):
    """A matrix expected to be positive definite failed to factorize."""


def half_bandwidth(block_size: int) -> int:
    return 2 * block_size - 1


def block_tridiagonal(diag_blocks, upper_blocks) -> sp.csr_matrix:
    """Assemble a symmetric block-tridiagonal matrix.

    ``upper_blocks[n]`` couples block ``n`` (rows) to block ``n + 1`` (columns);
    the lower blocks are its transposes.
    """
    n = len(diag_blocks)
    if len(upper_blocks) != n - 1:
        raise ValueError("need exactly one off-diagonal block per adjacent pair")
    # an object array stops numpy from stacking equal-shaped blocks into 4-D
    grid = np.empty((n, n), dtype=object)
    for i, blk in enumerate(diag_blocks):
        grid[i, i] = blk
    for i, blk in enumerate(upper_blocks):
        grid[i, i + 1] = blk
        grid[i + 1, i] = blk.T
    return sp.bmat(grid, format="csr")


def to_upper_banded(mat, bandwidth: int) -> np.ndarray:
    """LAPACK upper banded storage: ``ab[bandwidth + i - j, j] = A[i, j]``."""
    coo = sp.coo_matrix(mat)
    n = coo.shape[0]
    keep = (coo.row <= coo.col)
    rows, cols, vals = coo.row[keep], coo.col[keep], coo.data[keep]
    if np.any(cols - rows > bandwidth):
        raise ValueError("matrix has entries outside the declared band")
    ab = np.zeros((bandwidth + 1, n))
    # duplicates are summed, matching sparse semantics
    np.add.at(ab, (bandwidth + rows - cols, cols), vals)
    return ab


def in_block_tridiagonal_envelope(mat, block_size: int) -> bool:
    coo = sp.coo_matrix(mat)
    nz = coo.data != 0
    blk_r = coo.row[nz] // block_size
    blk_c = coo.col[nz] // block_size
    return bool(np.all(np.abs(blk_r - blk_c) <= 1))


class BandedCholesky:
    """Cholesky factorization ``A = U^T U`` of a symmetric banded matrix.

    Parameters
    ----------
    mat : sparse or dense matrix
        Symmetric positive-definite matrix; only the upper band is read.
    bandwidth : int
        Half-bandwidth of ``mat``.
    """

    def __init__(self, mat, bandwidth: int):
        self.bandwidth = bandwidth
        self.n = mat.shape[0]
        ab = to_upper_banded(mat, bandwidth)
        try:
            self.factor = sla.cholesky_banded(ab, lower=False)
        except np.linalg.LinAlgError as exc:
            dense = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
            min_eig = float(np.linalg.eigvalsh(0.5 * (dense + dense.T))[0])
            raise FactorizationError(
                f"matrix is not positive definite (minimum eigenvalue {min_eig:.6g})"
            ) from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``A x = rhs``; ``rhs`` may hold several right-hand sides as columns."""
        return sla.cho_solve_banded((self.factor, False), rhs)

    def solve_upper(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``U x = rhs`` with the upper-triangular factor."""
        return sla.solve_banded((0, self.bandwidth), self.factor, rhs)

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(self.factor[self.bandwidth])))
