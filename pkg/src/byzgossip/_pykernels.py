"""Numpy implementations of the hot kernels.

These are the reference versions: ``_ckernels.pyx`` mirrors every function
here with the same signature and semantics, and the test-suite checks the two
against each other.
"""

import numpy as np


def clip_rows(diffs, taus):
    """Project each row of ``diffs`` onto the L2 ball of radius ``taus[row]``.

    ``taus`` may hold ``inf`` (identity). Rows with zero norm map to zero.

    Returns:
        (clipped, norms) with ``norms`` the row norms before clipping.
    """
    diffs = np.asarray(diffs, dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    scale = np.ones_like(norms)
    over = norms > taus
    scale[over] = taus[over] / norms[over]
    return diffs * scale[:, None], norms


def scatter_add(out, index, rows, scale):
    """In place: ``out[index[k]] += scale * rows[k]`` for every k."""
    if len(index) == 0:
        return
    np.add.at(out, index, scale * np.asarray(rows, dtype=np.float64))


def segment_kth_largest(values, indptr, k):
    """k-th largest value in each CSR segment ``values[indptr[s]:indptr[s+1]]``.

    ``k == 0`` yields ``inf``; a segment with fewer than ``k`` entries yields
    ``nan``.
    """
    nseg = len(indptr) - 1
    out = np.empty(nseg)
    if k == 0:
        out.fill(np.inf)
        return out
    for s in range(nseg):
        seg = values[indptr[s]:indptr[s + 1]]
        if len(seg) < k:
            out[s] = np.nan
        else:
            out[s] = np.partition(seg, len(seg) - k)[len(seg) - k]
    return out


def segment_top_mask(values, indptr, k):
    """Mark the ``k`` largest entries of each segment; ties go to lower positions."""
    mask = np.zeros(len(values), dtype=bool)
    if k == 0:
        return mask
    for s in range(len(indptr) - 1):
        lo, hi = indptr[s], indptr[s + 1]
        order = np.argsort(-values[lo:hi], kind="stable")
        mask[lo + order[:k]] = True
    return mask


def gcr_interval_scan(norms_desc, const_term, rate, start):
    """Locate the highest threshold interval on which the clipping rule can hold.

    With norms sorted descending ``n_0 >= ... >= n_{m-1}``, a threshold in
    ``[n_k, n_{k-1})`` clips exactly ``k`` edges and the rule reads
    ``P_k >= const_term + rate * tau`` where ``P_k`` is the sum of the ``k``
    largest norms. Intervals are visited from ``k = start`` upward (i.e. from
    large thresholds down) and empty intervals caused by ties are skipped.

    Returns:
        (k, bound): the first admissible ``k`` and the largest ``tau`` allowed
        by the affine constraint there (``inf`` when ``rate == 0``), or
        ``(-1, 0.0)`` if no interval admits a positive threshold.
    """
    m = len(norms_desc)
    prefix = 0.0
    for k in range(m + 1):
        if k > 0:
            prefix += norms_desc[k - 1]
        if k < start:
            continue
        hi = np.inf if k == 0 else norms_desc[k - 1]
        lo = norms_desc[k] if k < m else 0.0
        if not lo < hi:
            continue
        if rate > 0.0:
            with np.errstate(over="ignore"):  # a tiny rate legitimately gives inf
                bound = (prefix - const_term) / rate
            if bound > lo or (bound == lo and k < m):
                return k, bound
        elif prefix >= const_term:
            return k, np.inf
    return -1, 0.0
