"""Hot inner loops: group sums over conjugated operators, Cayley-table checks.

Each kernel exists twice, a numba ``@njit`` loop version and a vectorised
numpy version. The public names at the bottom point at one or the other
depending on ``_accel.USE_NUMBA``; both variants stay importable so tests and
the benchmark can compare them.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


# -- numba ------------------------------------------------------------------


@njit(cache=True)
def _conjugate_stack_nb(us, m):
    n, d, _ = us.shape
    out = np.zeros((n, d, d), dtype=np.complex128)
    tmp = np.zeros((d, d), dtype=np.complex128)
    for k in range(n):
        u = us[k]
        for i in range(d):
            for j in range(d):
                acc = 0j
                for l in range(d):
                    acc += u[i, l] * m[l, j]
                tmp[i, j] = acc
        for i in range(d):
            for j in range(d):
                acc = 0j
                for l in range(d):
                    acc += tmp[i, l] * np.conj(u[j, l])
                out[k, i, j] = acc
    return out


@njit(cache=True)
def _twirl_sum_nb(us, rho):
    n, d, _ = us.shape
    out = np.zeros((d, d), dtype=np.complex128)
    tmp = np.zeros((d, d), dtype=np.complex128)
    for k in range(n):
        u = us[k]
        for i in range(d):
            for j in range(d):
                acc = 0j
                for l in range(d):
                    acc += u[i, l] * rho[l, j]
                tmp[i, j] = acc
        for i in range(d):
            for j in range(d):
                acc = 0j
                for l in range(d):
                    acc += tmp[i, l] * np.conj(u[j, l])
                out[i, j] += acc
    return out / n


@njit(cache=True)
def _associativity_violation_nb(table):
    n = table.shape[0]
    for a in range(n):
        for b in range(n):
            ab = table[a, b]
            for c in range(n):
                if table[ab, c] != table[a, table[b, c]]:
                    return np.array([a, b, c])
    return np.array([-1, -1, -1])


# -- numpy ------------------------------------------------------------------


def _conjugate_stack_np(us, m):
    return np.einsum("kil,lm,kjm->kij", us, m, us.conj(), optimize=True)


def _twirl_sum_np(us, rho):
    return _conjugate_stack_np(us, rho).mean(axis=0)


def _associativity_violation_np(table):
    n = table.shape[0]
    lhs = table[table]  # lhs[a, b, c] = (a*b)*c
    rhs = table[np.arange(n)[:, None, None], table[None, :, :]]  # a*(b*c)
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        return bad[0]
    return np.array([-1, -1, -1])


# -- dispatch ---------------------------------------------------------------


def _as_c128(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


if USE_NUMBA:

    def conjugate_stack(us, m):
        """``out[k] = us[k] @ m @ us[k]^dagger``."""
        return _conjugate_stack_nb(_as_c128(us), _as_c128(m))

    def twirl_sum(us, rho):
        """``mean_k us[k] @ rho @ us[k]^dagger``."""
        return _twirl_sum_nb(_as_c128(us), _as_c128(rho))

    def associativity_violation(table):
        """First triple ``(a, b, c)`` with ``(ab)c != a(bc)``, else ``-1``s."""
        return _associativity_violation_nb(np.ascontiguousarray(table, dtype=np.int64))

else:
    conjugate_stack = _conjugate_stack_np
    twirl_sum = _twirl_sum_np
    associativity_violation = _associativity_violation_np

BACKEND = "numba" if USE_NUMBA else "numpy"
