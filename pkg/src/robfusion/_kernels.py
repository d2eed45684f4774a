"""Compiled inner loops for the O(n^2) rank-one distance passes."""

import numba as nb
import numpy as np


@nb.njit(nogil=True, cache=True)
def block_distance_sq(gram, row_start, norms_sq, t_count, tol, out):
    """Squared HS distances from rows ``row_start + b`` to every row.

    ``gram[b, j]`` holds the *unnormalized* dot product of row ``row_start + b``
    with row ``j``. Returns the most negative rejected value (0.0 if none).
    """
    nb_rows, n = gram.shape
    worst = 0.0
    for b in range(nb_rows):
        i = row_start + b
        ai = norms_sq[i] * norms_sq[i]
        for j in range(n):
            if j == i:
                out[b, j] = 0.0
                continue
            aj = norms_sq[j] * norms_sq[j]
            g = gram[b, j] / t_count
            d = ai + aj - 2.0 * g * g
            if d < 0.0:
                if d < -tol * (1.0 + ai + aj) and d < worst:
                    worst = d
                d = 0.0
            out[b, j] = d
    return worst


@nb.njit(nogil=True, cache=True)
def block_kth_radius_sq(gram, row_start, norms_sq, t_count, tol, kth, bound, out):
    """``kth``-smallest squared distance per row (``kth`` is 0-based).

    Rows with fewer than ``kth + 1`` distances at or below ``bound`` cannot
    beat ``bound`` and get ``inf`` without a selection pass.
    """
    nb_rows, n = gram.shape
    buf = np.empty(n)
    worst = 0.0
    for b in range(nb_rows):
        i = row_start + b
        ai = norms_sq[i] * norms_sq[i]
        cnt = 0
        for j in range(n):
            if j == i:
                d = 0.0
            else:
                aj = norms_sq[j] * norms_sq[j]
                g = gram[b, j] / t_count
                d = ai + aj - 2.0 * g * g
                if d < 0.0:
                    if d < -tol * (1.0 + ai + aj) and d < worst:
                        worst = d
                    d = 0.0
            buf[j] = d
            if d <= bound:
                cnt += 1
        if cnt <= kth:
            out[b] = np.inf
        else:
            out[b] = np.partition(buf, kth)[kth]
    return worst
