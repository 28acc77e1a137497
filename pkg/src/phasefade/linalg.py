"""Dense symmetric positive-definite matrices factored once through Cholesky."""

from __future__ import annotations

import numpy as np
from scipy import linalg


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky factorization failed; carries the smallest eigenvalue estimate."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(f"{message} (smallest eigenvalue ~ {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue


class SymMatrix:
    """Immutable symmetric matrix with a lazily computed, cached Cholesky factor.

    The stored array is symmetrized on construction and made read-only.
    """

    __slots__ = ("_a", "_chol")

    def __init__(self, a, *, check: bool = True):
        a = np.array(a, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if check and not np.allclose(a, a.T, rtol=1e-12, atol=0.0):
            raise ValueError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self._a = a
        self._chol = None

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def n(self) -> int:
        return self._a.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)

    def __repr__(self):
        return f"SymMatrix(n={self.n})"

    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor; raises NotPositiveDefiniteError on failure."""
        if self._chol is None:
            try:
                factor = linalg.cholesky(self._a, lower=True, check_finite=True)
            except linalg.LinAlgError:
                min_eig = float(linalg.eigvalsh(self._a, subset_by_index=[0, 0])[0])
                raise NotPositiveDefiniteError("Cholesky factorization failed", min_eig) from None
            factor.setflags(write=False)
            self._chol = factor
        return self._chol

    def is_positive_definite(self) -> bool:
        try:
            self.cholesky()
        except NotPositiveDefiniteError:
            return False
        return True

    def solve(self, b) -> np.ndarray:
        return linalg.cho_solve((self.cholesky(), True), np.asarray(b, dtype=float))

    def inverse(self) -> SymMatrix:
        inv = self.solve(np.eye(self.n))
        return SymMatrix(inv, check=False)

    def inverse_diagonal(self) -> np.ndarray:
        """diag(A^-1) as the squared column norms of L^-1."""
        l_inv = linalg.solve_triangular(self.cholesky(), np.eye(self.n), lower=True)
        return np.einsum("ij,ij->j", l_inv, l_inv)
