"""Hafnian and loop hafnian of complex symmetric matrices.

Both use the power-trace form of inclusion-exclusion over subsets of a fixed
pairing of the row indices, so an ``n x n`` matrix costs ``O(2^(n/2) n^4)``
with all subsets evaluated as one batched numpy computation.
"""

from __future__ import annotations

import numpy as np

SYMMETRY_TOL = 1e-10


def _check(mat) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    if mat.shape[0] % 2:
        raise ValueError(f"hafnian needs an even dimension, got {mat.shape[0]}")
    if mat.size and np.max(np.abs(mat - mat.T)) > SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric")
    return mat


def _subset_masks(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Row masks for all subsets of the pairs ``(0,1), (2,3), ...`` and their signs."""
    subsets = np.arange(1 << m)
    bits = (subsets[:, None] >> np.arange(m)) & 1
    mask = np.repeat(bits, 2, axis=1).astype(bool)
    signs = np.where((m - bits.sum(axis=1)) % 2, -1.0, 1.0)
    return mask, signs


def _power_trace_sum(offdiag: np.ndarray, loops: np.ndarray | None) -> complex:
    n = offdiag.shape[0]
    m = n // 2
    swap = np.arange(n) ^ 1  # partner index within each pair
    mask, signs = _subset_masks(m)
    keep = mask[:, :, None] & mask[:, None, :]
    # C_S = (A X) restricted to the rows/cols of subset S, zero-padded
    c = np.where(keep, offdiag[:, swap][None, :, :], 0.0)

    # g[:, j-1] is the coefficient of x^j in the exponent
    g = np.empty((len(signs), m), dtype=complex)
    power = np.broadcast_to(np.eye(n, dtype=complex), c.shape).copy()
    if loops is not None:
        v = np.where(mask, loops[None, :], 0.0)
        w = v[:, swap]
    for j in range(1, m + 1):
        prev = power
        power = prev @ c
        g[:, j - 1] = np.trace(power, axis1=1, axis2=2) / (2 * j)
        if loops is not None:
            g[:, j - 1] += np.einsum("si,sij,sj->s", w, prev, v) / 2

    # coefficients of exp(sum_j g_j x^j) via F_k = (1/k) sum_j j g_j F_{k-j}
    f = np.zeros((len(signs), m + 1), dtype=complex)
    f[:, 0] = 1.0
    jg = g * np.arange(1, m + 1)
    for k in range(1, m + 1):
        f[:, k] = np.sum(jg[:, :k] * f[:, k - 1 :: -1][:, :k], axis=1) / k
    return complex(np.sum(signs * f[:, m]))


def hafnian(mat) -> complex:
    """Sum over perfect matchings of the products of matched entries.

    The diagonal is ignored. A ``0 x 0`` matrix has hafnian 1.
    """
    mat = _check(mat)
    if mat.shape[0] == 0:
        return 1.0 + 0j
    offdiag = mat - np.diag(np.diag(mat))
    return _power_trace_sum(offdiag, None)


def loop_hafnian(mat) -> complex:
    """Hafnian where a matching may also leave vertices as loops.

    A vertex ``i`` left unmatched contributes the factor ``mat[i, i]``.
    """
    mat = _check(mat)
    if mat.shape[0] == 0:
        return 1.0 + 0j
    loops = np.diag(mat).copy()
    offdiag = mat - np.diag(loops)
    return _power_trace_sum(offdiag, loops)
