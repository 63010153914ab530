"""Dense linear-algebra helpers shared across modules.

Random draws always take an explicit ``numpy.random.Generator``; use
:func:`rng_for` to derive per-trial generators from a 64-bit seed.
"""

import numpy as np

ATOL = 1e-10


def rng_for(seed, *stream):
    """Generator for ``seed`` and an optional stream path (e.g. a trial index)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), *map(int, stream)]))


def random_matrix(rows, cols, rng):
    """Complex Gaussian matrix with unit-variance entries."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(n, rng):
    """Haar unitary from the QR decomposition of a Gaussian sample."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    q, r = np.linalg.qr(random_matrix(n, n, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_state(n, rng):
    v = random_matrix(n, 1, rng)[:, 0]
    return v / np.linalg.norm(v)


def random_density(n, rng, rank=None):
    g = random_matrix(n, rank or n, rng)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_contraction(rows, cols, rng, norm=None):
    """Gaussian matrix rescaled to operator norm ``norm`` (uniform in (0.5, 1] if None)."""
    m = random_matrix(rows, cols, rng)
    if m.size == 0:
        return m
    target = rng.uniform(0.5, 1.0) if norm is None else norm
    return m * (target / np.linalg.norm(m, 2))


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def operator_norm(m):
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def contraction_excess(w):
    """Largest eigenvalue of ``W^dagger W`` minus one (<= 0 for a contraction)."""
    if w.size == 0:
        return -1.0
    return float(np.linalg.eigvalsh(dagger(w) @ w)[-1]) - 1.0


def unitarity_residual(u):
    n = u.shape[0]
    return float(np.max(np.abs(u @ dagger(u) - np.eye(n)), initial=0.0))


def trace_norm(m):
    if m.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def psd_sqrt(rho):
    """Positive square root of a Hermitian PSD matrix via ``eigh``."""
    w, v = np.linalg.eigh((rho + dagger(rho)) / 2)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def polar_unitary(x):
    """Unitary ``U`` maximising ``|tr(U x)|``; then ``tr(U x) = ||x||_1``.

    From ``x = W S V^dagger`` take ``U = V W^dagger``; degenerate singular
    values need no pairing of vectors.
    """
    if x.size == 0:
        return np.zeros_like(x)
    w, _, vh = np.linalg.svd(x)
    return dagger(vh) @ dagger(w)


def uhlmann_fidelity(rho, sigma):
    """Root fidelity ``tr sqrt(sqrt(rho) sigma sqrt(rho))`` from Hermitian eigendecompositions."""
    if rho.size == 0:
        return 0.0
    s = psd_sqrt(rho)
    inner = s @ sigma @ s
    w = np.linalg.eigvalsh((inner + dagger(inner)) / 2)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def null_space(a, threshold=1e-8):
    """Orthonormal basis (columns) of the null space of ``a`` via SVD."""
    a = np.atleast_2d(a)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > threshold))
    return dagger(vh[rank:])


def orthonormal_span(vectors, threshold=1e-8):
    """Orthonormal basis (columns) for the span of the given column vectors."""
    if vectors.shape[1] == 0:
        return vectors
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    return u[:, s > threshold]


def span_residual(a, b):
    """Largest distance of a unit vector of span(a) from span(b); columns are vectors."""
    if a.shape[1] == 0:
        return 0.0
    qa = orthonormal_span(a)
    qb = orthonormal_span(b)
    if qb.shape[1] == 0:
        return 1.0 if qa.shape[1] else 0.0
    resid = qa - qb @ (dagger(qb) @ qa)
    return float(np.linalg.norm(resid, 2))
