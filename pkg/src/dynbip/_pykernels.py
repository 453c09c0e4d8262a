"""numpy/scipy versions of the compiled kernels, used when the extension is absent."""

import numpy as np
import scipy.sparse as sp

_BLOCK = 2048


def bcc_values(indptr, indices, indptr_o, indices_o):
    n = len(indptr) - 1
    m = len(indptr_o) - 1
    deg = np.diff(indptr)
    a = sp.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, m))
    common = (a @ a.T).tocsr()
    common.setdiag(0)
    common.eliminate_zeros()
    common.sort_indices()
    rows = np.repeat(np.arange(n), np.diff(common.indptr))
    c = common.data
    jac = c / (deg[rows] + deg[common.indices] - c)
    counts = np.diff(common.indptr)
    # left-to-right sums per row, as in the compiled kernel: rows sorted by
    # length so that step k touches a prefix of them
    order = np.argsort(-counts, kind="stable")
    starts = common.indptr[:-1][order]
    lengths = counts[order]
    sums = np.zeros(n)
    for k in range(int(lengths[0]) if n else 0):
        m = np.searchsorted(-lengths, -k, side="left")
        sums[:m] += jac[starts[:m] + k]
    out = np.zeros(n)
    has = counts > 0
    out[order[has[order]]] = sums[has[order]] / lengths[has[order]]
    return out


def rbf_sum(x, wx, y, wy, gamma):
    total = 0.0
    for lo in range(0, len(x), _BLOCK):
        xs = x[lo:lo + _BLOCK]
        d = xs[:, None] - y[None, :]
        total += float(wx[lo:lo + _BLOCK] @ (np.exp(-gamma * d * d) @ wy))
    return total
