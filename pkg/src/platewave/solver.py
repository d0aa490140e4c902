"""Factor-once / solve-many wrapper for the SPD step matrix.

The direct path is an LDL^T-style factorization: SuperLU with a symmetric
fill-reducing ordering and pivoting disabled, so ``U = D L^T`` and the sign
of ``diag(U)`` certifies positive definiteness. The fallback is Jacobi
preconditioned conjugate gradients.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidArgumentError, NotSPDError
from .fem import AssembledSystem

CG_RTOL = 1e-12


class Factorization:
    def __init__(self, A, method: str = "cholesky"):
        A = sp.csc_matrix(A, dtype=float)
        n, m = A.shape
        if n != m:
            raise InvalidArgumentError("matrix must be square")
        scale = abs(A).max() if A.nnz else 0.0
        asym = abs(A - A.T).max() if A.nnz else 0.0
        if scale == 0.0 or asym > 1e-12 * scale:
            raise NotSPDError("matrix is not symmetric")
        self.A = A
        self.order = n
        self.method = method
        if method == "cholesky":
            self._lu = self._factor_direct(A)
        elif method == "cg":
            diag = A.diagonal()
            if np.any(diag <= 0):
                raise NotSPDError("non-positive diagonal entry")
            self._inv_diag = 1.0 / diag
            self._lu = None
        else:
            raise InvalidArgumentError(f"unknown solver method {method!r}")

    @staticmethod
    def _factor_direct(A):
        try:
            lu = spla.splu(
                A,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError as exc:  # exactly singular
            raise NotSPDError(str(exc)) from exc
        if not np.array_equal(lu.perm_r, lu.perm_c):
            raise NotSPDError("factorization needed off-diagonal pivoting")
        pivots = lu.U.diagonal()
        if not np.all(pivots > 0):
            raise NotSPDError(f"non-positive pivot {pivots.min():.3e}")
        return lu

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape != (self.order,):
            raise InvalidArgumentError(f"right-hand side must have length {self.order}")
        if not np.any(b):
            return np.zeros(self.order)
        if self._lu is not None:
            return self._lu.solve(b)
        M = spla.LinearOperator(self.A.shape, matvec=lambda r: self._inv_diag * r)
        x, info = spla.cg(self.A, b, rtol=CG_RTOL, atol=0.0, maxiter=10 * self.order, M=M)
        if info != 0:
            raise NotSPDError(f"conjugate gradients did not converge (info={info})")
        return x


def factor(sys: AssembledSystem | sp.spmatrix, method: str = "cholesky") -> Factorization:
    A = sys.A if isinstance(sys, AssembledSystem) else sys
    return Factorization(A, method=method)


def solve(f: Factorization, b) -> np.ndarray:
    return f.solve(b)
