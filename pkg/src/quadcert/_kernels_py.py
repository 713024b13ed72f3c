"""Pure numpy/scipy implementations of the hot kernels.

Import-time fallback for quadcert._kernels (the Cython extension). Both
modules expose the same surface: see quadcert.kernels for the contract.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

COMPILED = False


def poly_mul_arrays(ea, ca, eb, cb):
    """Sparse polynomial product on (terms, nvars) exponent arrays.

    Returns aggregated (exps, coefs) with no particular order; callers
    rebuild dicts. Zero coefficients may appear and are pruned upstream.
    """
    ea = np.asarray(ea, dtype=np.int64)
    eb = np.asarray(eb, dtype=np.int64)
    ca = np.asarray(ca, dtype=float)
    cb = np.asarray(cb, dtype=float)
    sums = (ea[:, None, :] + eb[None, :, :]).reshape(-1, ea.shape[1])
    prods = (ca[:, None] * cb[None, :]).ravel()
    uniq, inverse = np.unique(sums, axis=0, return_inverse=True)
    coefs = np.zeros(len(uniq))
    np.add.at(coefs, inverse, prods)
    return uniq, coefs


def gram_expand_arrays(basis, G, gexps, gcoefs):
    """Coefficients of b(x)^T G b(x) * g(x) for a dense Gram matrix G."""
    basis = np.asarray(basis, dtype=np.int64)
    G = np.asarray(G, dtype=float)
    gexps = np.asarray(gexps, dtype=np.int64)
    gcoefs = np.asarray(gcoefs, dtype=float)
    s, v = basis.shape
    pair_exps = (basis[:, None, :] + basis[None, :, :]).reshape(s * s, v)
    pair_vals = G.ravel()
    keep = pair_vals != 0.0
    pair_exps = pair_exps[keep]
    pair_vals = pair_vals[keep]
    # one block of rows per term of g
    total = (pair_exps[None, :, :] + gexps[:, None, :]).reshape(-1, v)
    vals = (gcoefs[:, None] * pair_vals[None, :]).ravel()
    uniq, inverse = np.unique(total, axis=0, return_inverse=True)
    coefs = np.zeros(len(uniq))
    np.add.at(coefs, inverse, vals)
    return uniq, coefs


class BlockOps:
    """Per-block constraint data with the linear-algebra hooks the
    interior-point solver needs.

    The constraint matrices A_i of one PSD block (dimension s) are stored
    as one CSR matrix E with m rows and s*s columns; row i holds vec(A_i)
    with both symmetric entries present.
    """

    def __init__(self, s, m, rows, cols_r, cols_c, vals):
        self.s = int(s)
        self.m = int(m)
        flat = np.asarray(cols_r, dtype=np.int64) * self.s + np.asarray(cols_c, dtype=np.int64)
        self.E = sp.csr_matrix(
            (np.asarray(vals, dtype=float), (np.asarray(rows, dtype=np.int64), flat)),
            shape=(self.m, self.s * self.s),
        )
        self.E.sum_duplicates()
        self.touch = np.unique(np.asarray(rows, dtype=np.int64))

    def dots(self, W: np.ndarray) -> np.ndarray:
        """<A_i, W> for every constraint (length m, zero off-support)."""
        return self.E.dot(np.ascontiguousarray(W, dtype=float).ravel())

    def weighted_sum(self, y: np.ndarray) -> np.ndarray:
        """sum_i y_i A_i as a dense (s, s) matrix."""
        return self.E.T.dot(y).reshape(self.s, self.s)

    def schur_accumulate(self, U: np.ndarray, V: np.ndarray, out: np.ndarray):
        """out[i, j] += <A_i, U A_j V> over this block's constraints.

        U and V are dense (s, s); with U = X and V = S^{-1} this is the
        HKM Schur complement contribution. Results are numerically
        symmetric only after the caller symmetrizes.
        """
        s = self.s
        indptr, indices, data = self.E.indptr, self.E.indices, self.E.data
        for j in self.touch:
            lo, hi = indptr[j], indptr[j + 1]
            if lo == hi:
                continue
            rr = indices[lo:hi] // s
            cc = indices[lo:hi] % s
            vv = data[lo:hi]
            # W = U A_j V with A_j = sum_t vv_t e_rr e_cc^T
            W = (U[:, rr] * vv) @ V[cc, :]
            out[:, j] += self.E.dot(W.ravel())


def make_block_ops(s, m, rows, cols_r, cols_c, vals) -> BlockOps:
    return BlockOps(s, m, rows, cols_r, cols_c, vals)
