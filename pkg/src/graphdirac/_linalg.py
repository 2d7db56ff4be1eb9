"""Small dense linear-algebra helpers: ranks, null spaces, multiset matching."""

import numpy as np

from .errors import RankAmbiguous, SpectraMismatch

TAU_RANK = 1e-10
# singular values within this factor of the cut-off are considered undecidable
AMBIGUITY_FACTOR = 100.0


def rank_threshold(sv, shape, tau=TAU_RANK, scale=0.0):
    if len(sv) == 0:
        return 0.0
    return tau * max(float(sv[0]), scale) * max(shape)


def numerical_rank(a, tau=TAU_RANK, check=True, scale=0.0):
    """Rank of ``a`` from its singular values.

    The cut-off is ``tau * max(sigma_max, scale) * max(a.shape)``; ``scale``
    is the natural size of the matrix entries, so that a matrix which is zero
    up to rounding gets rank 0. With ``check`` set, a singular value within a
    factor of 100 of the cut-off raises :class:`RankAmbiguous` instead of
    being silently rounded.
    """
    a = np.asarray(a)
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    thr = rank_threshold(sv, a.shape, tau, scale)
    if check:
        gray = (sv > thr / AMBIGUITY_FACTOR) & (sv < thr * AMBIGUITY_FACTOR)
        if np.any(gray):
            raise RankAmbiguous(
                f"singular value {sv[gray][0]:.3e} too close to rank cut-off {thr:.3e}"
            )
    return int(np.count_nonzero(sv > thr))


def svd_split(a, tau=TAU_RANK, check=True, scale=0.0):
    """Return (rank, orthonormal range basis, orthonormal null-space basis)."""
    a = np.asarray(a, dtype=complex)
    m, n = a.shape
    if m == 0 or n == 0:
        return 0, np.zeros((m, 0), complex), np.eye(n, dtype=complex)
    u, sv, vh = np.linalg.svd(a)
    r = numerical_rank(a, tau, check, scale) if sv[0] > 0 else 0
    return r, u[:, :r], vh[r:].conj().T


def null_space(a, tau=TAU_RANK, check=True, scale=0.0):
    return svd_split(a, tau, check, scale)[2]


def range_basis(a, tau=TAU_RANK, check=True, scale=0.0):
    return svd_split(a, tau, check, scale)[1]


def fix_phase(vecs, tol=1e-12):
    """Rotate each column so its first entry of non-negligible modulus is real positive."""
    vecs = np.array(vecs, dtype=complex)
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size:
            z = col[idx[0]]
            vecs[:, j] = col * (abs(z) / z)
    return vecs


def match_multisets(a, b, tol):
    """Pair two sorted real multisets entry by entry.

    Returns the list of pairs. Raises :class:`SpectraMismatch` on a count
    difference or the first pair further apart than ``tol``.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size != b.size:
        extra = a[b.size] if a.size > b.size else b[a.size]
        raise SpectraMismatch(
            f"multiset sizes differ ({a.size} vs {b.size})", eigenvalue=float(extra)
        )
    bad = np.flatnonzero(np.abs(a - b) > tol)
    if bad.size:
        i = bad[0]
        raise SpectraMismatch(
            f"eigenvalue {a[i]!r} unmatched (nearest partner {b[i]!r})",
            eigenvalue=float(a[i]),
        )
    return list(zip(a.tolist(), b.tolist()))


def drop_near(values, points, tol):
    """Remove entries of ``values`` within ``tol`` of any of ``points``."""
    values = np.asarray(values, dtype=float)
    keep = np.ones(values.shape, bool)
    for p in points:
        keep &= np.abs(values - p) > tol
    return values[keep]


def haar_frame(rng, n, k):
    """Haar-distributed ``n x k`` complex matrix with orthonormal columns."""
    if k == 0:
        return np.zeros((n, 0), complex)
    z = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
