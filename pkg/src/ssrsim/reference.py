"""Reference systems: invariant simulation of non-invariant operations.

Finite groups use a reference ``R`` carrying the left-regular representation;
``M`` on a system ``A`` becomes ``M^inv = sum_phi |phi><phi|_R (x) U(phi) M U(phi)^-1``
on ``R (x) A`` (``R`` is the first tensor factor throughout).

U(1) references are truncated charge windows. States are arrays indexed by
charge offset from the window's lower edge, and charge shifts are array
slices that refuse to push amplitude off the window.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import TruncationError, ValidationError
from .linalg import random_density, random_matrix, rng_for
from .representations import RegularRepSpace, RepSpace, fourier_regular, twirl
from .groups import build_group, irreps_of

VARIANTS = ("pure", "offset", "classical")


@dataclass(frozen=True, eq=False)
class ReferenceSystem:
    """Either a finite-group regular reference or a U(1) window of ``size`` charges."""

    kind: str
    space: RegularRepSpace = field(default=None, repr=False)
    size: int = 0

    @property
    def dim(self):
        return self.space.dim if self.kind == "group" else self.size

    @classmethod
    def regular(cls, group):
        g = build_group(group)
        return cls("group", fourier_regular(g, irreps_of(g)))

    @classmethod
    def u1(cls, size):
        if int(size) < 1:
            raise ValidationError("U(1) reference needs at least one charge")
        return cls("u1", size=int(size))


def conjugates(system, m):
    """Stack ``U(phi) m U(phi)^-1`` over all group elements."""
    return _kernels.conjugate_stack(system.mats, np.asarray(m, dtype=complex))


def lift_invariant(m, system, reference=None):
    """``M^inv`` on ``R (x) A``; ``system`` is A's ``RepSpace``."""
    if reference is not None:
        ref_group = reference.space.group if isinstance(reference, ReferenceSystem) else reference.group
        if ref_group is not system.group:
            raise ValidationError("reference and system carry different groups")
    m = np.asarray(m, dtype=complex)
    if m.shape != (system.dim, system.dim):
        raise ValidationError(f"operator shape {m.shape} does not match the system dim {system.dim}")
    stack = conjugates(system, m)
    n, d = stack.shape[0], system.dim
    out = np.zeros((n, d, n, d), dtype=complex)
    out[np.arange(n), :, np.arange(n), :] = stack
    return out.reshape(n * d, n * d)


def _test_system(irreps):
    """Each charge ``q`` with flavor multiplicity ``n_q + 1``: every irrep, some repeated."""
    return RepSpace.from_charges(irreps, {q: irreps[q].dim + 1 for q in range(len(irreps))})


def verify_minv_properties(group, trials=50, seed=0, system=None):
    """Max residuals of the four ``M^inv`` properties over random operators.

    ``expectation`` is reported separately for a pure basis state, the
    maximally mixed state and a random density matrix on ``R``.
    """
    g = build_group(group)
    irreps = irreps_of(g)
    ref = fourier_regular(g, irreps)
    a = system or _test_system(irreps)
    n, d = g.order, a.dim
    joint = ref.tensor(a)
    res = {"invariance": 0.0, "homomorphism": 0.0, "collapse": 0.0, "linearity": 0.0}
    exp = {"pure": 0.0, "mixed": 0.0, "random": 0.0}
    for t in range(trials):
        rng = rng_for(seed, t)
        m1, m2 = random_matrix(d, d, rng), random_matrix(d, d, rng)
        l1, l2 = lift_invariant(m1, a), lift_invariant(m2, a)
        u = joint.mats
        res["invariance"] = max(res["invariance"], float(np.max(np.abs(u @ l1 - l1 @ u))))
        res["homomorphism"] = max(res["homomorphism"], float(np.max(np.abs(lift_invariant(m1 @ m2, a) - l1 @ l2))))
        alpha, beta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        lin = lift_invariant(alpha * m1 + beta * m2, a) - (alpha * l1 + beta * l2)
        res["linearity"] = max(res["linearity"], float(np.max(np.abs(lin))))
        inv = twirl(a, m1)
        collapse = lift_invariant(inv, a) - np.kron(np.eye(n), inv)
        res["collapse"] = max(res["collapse"], float(np.max(np.abs(collapse))))
        rho = twirl(a, random_density(d, rng))
        target = np.trace(m1 @ rho)
        refs = {
            "pure": np.diag(np.eye(n)[int(rng.integers(n))]).astype(complex),
            "mixed": np.eye(n, dtype=complex) / n,
            "random": random_density(n, rng),
        }
        for key, rho_r in refs.items():
            val = np.trace(l1 @ np.kron(rho_r, rho))
            exp[key] = max(exp[key], abs(complex(val - target)))
    return {
        "group": g.name,
        "trials": trials,
        "seed": seed,
        **res,
        "expectation": exp,
        "max_residual": max(max(res.values()), max(exp.values())),
    }


# -- distributed references -------------------------------------------------


@dataclass(frozen=True, eq=False)
class DistributedReference:
    """Two-or-more-party reference over a finite group.

    ``pure``: ``(1/sqrt n) sum_phi |phi>^{(x) k}``; ``offset``: the second
    party holds ``|phi phi_tilde>``; ``classical``: the equal mixture of
    ``|phi><phi|^{(x) k}``.
    """

    space: RegularRepSpace
    variant: str = "pure"
    offset: int = 0
    parties: int = 2

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}")
        if self.variant == "offset" and self.parties != 2:
            raise ValidationError("offset references are two-party")

    @classmethod
    def build(cls, group, variant="pure", offset=0, parties=2):
        g = build_group(group)
        return cls(fourier_regular(g, irreps_of(g)), variant, offset, parties)

    @property
    def group(self):
        return self.space.group

    def elements(self):
        """Per branch ``phi``, the group element held by each party."""
        g = self.group
        out = []
        for phi in range(g.order):
            if self.variant == "offset":
                out.append((phi, g.mul(phi, self.offset)))
            else:
                out.append((phi,) * self.parties)
        return out

    def vector(self):
        if self.variant == "classical":
            raise ValidationError("the classical reference is mixed")
        n = self.group.order
        v = np.zeros((n,) * self.parties, dtype=complex)
        for idx in self.elements():
            v[idx] = 1 / np.sqrt(n)
        return v.reshape(-1)

    def density(self):
        n = self.group.order
        if self.variant != "classical":
            v = self.vector()
            return np.outer(v, v.conj())
        rho = np.zeros((n**self.parties,) * 2, dtype=complex)
        for idx in self.elements():
            k = np.ravel_multi_index(idx, (n,) * self.parties)
            rho[k, k] = 1 / n
        return rho

    def invariance_residual(self):
        """``max_g ||[U(g)^{(x) k}, rho]||``."""
        rho = self.density()
        n = self.group.order
        worst = 0.0
        for g in range(n):
            u = self.space.mats[g]
            for _ in range(self.parties - 1):
                u = np.kron(u, self.space.mats[g])
            worst = max(worst, float(np.max(np.abs(u @ rho - rho @ u))))
        return worst


def _lift_on(ref_party, stack, nparties, n, dc):
    """Dense ``M^inv`` acting on reference party ``ref_party`` and ``C`` (last factor)."""
    size = n**nparties * dc
    out = np.zeros((size, size), dtype=complex)
    for flat in range(n**nparties):
        idx = np.unravel_index(flat, (n,) * nparties)
        sl = slice(flat * dc, (flat + 1) * dc)
        out[sl, sl] = stack[idx[ref_party]]
    return out


def distributed_equivalence_check(ref, m, system, psi, pair=(0, 1)):
    """Residual between simulating ``M`` on ``C`` with reference half ``i`` versus half ``j``.

    For the offset variant, party 1 uses ``M`` and party 0 the twisted
    ``U(phi~) M U(phi~)^-1``. Pure and offset variants return a vector-norm
    residual; the classical variant compares output density matrices
    (Frobenius norm).
    """
    i, j = pair
    n, dc = ref.group.order, system.dim
    psi = np.asarray(psi, dtype=complex)
    m = np.asarray(m, dtype=complex)
    m_i = m
    if ref.variant == "offset":
        u = system.U(ref.offset)
        m_i = u @ m @ u.conj().T
    li = _lift_on(i, conjugates(system, m_i), ref.parties, n, dc)
    lj = _lift_on(j, conjugates(system, m), ref.parties, n, dc)
    if ref.variant == "classical":
        rho = np.kron(ref.density(), np.outer(psi, psi.conj()))
        diff = li @ rho @ li.conj().T - lj @ rho @ lj.conj().T
        return float(np.linalg.norm(diff))
    state = np.kron(ref.vector(), psi)
    return float(np.linalg.norm(li @ state - lj @ state))


# -- U(1) -------------------------------------------------------------------


def shift(arr, axis, delta):
    """Raise the charge along ``axis`` by ``delta`` (a U(1) ladder power).

    Charges are array offsets; amplitude pushed past either edge would be
    lost, so that raises ``TruncationError`` instead.
    """
    if delta == 0:
        return arr.copy()
    arr = np.moveaxis(arr, axis, 0)
    out = np.zeros_like(arr)
    k = abs(delta)
    if k >= arr.shape[0]:
        lost = arr
    elif delta > 0:
        out[k:] = arr[:-k]
        lost = arr[-k:]
    else:
        out[:-k] = arr[k:]
        lost = arr[:k]
    if lost.size and np.max(np.abs(lost)) > 0:
        raise TruncationError(f"charge shift by {delta} leaves the window")
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class ChargeShift:
    """``(|q - r><q|)^inv`` on ``R (x) A`` with both windows given as ``(lo, hi)``."""

    matrix: np.ndarray = field(repr=False)
    ref_window: tuple
    sys_window: tuple
    fidelity: float


def u1_simulate_charge_shift(ref_window, r, q=None, sys_window=None, ref_charge=0):
    """Simulate moving ``r`` units of charge from ``A`` into the reference.

    ``ref_window`` is an int ``w`` (charges ``-w..w``) or a ``(lo, hi)`` pair.
    ``A`` starts in charge ``q`` (default ``r``) and ends in ``q - r``.
    """
    lo, hi = (-ref_window, ref_window) if np.isscalar(ref_window) else ref_window
    q = r if q is None else q
    if sys_window is None:
        sys_window = (min(q, q - r, 0), max(q, q - r, 0))
    slo, shi = sys_window
    if not lo <= ref_charge <= hi or not lo <= ref_charge + r <= hi:
        raise TruncationError(f"reference charge {ref_charge} + {r} leaves the window {lo}..{hi}")
    if not (slo <= q <= shi and slo <= q - r <= shi):
        raise TruncationError(f"system charges {q} -> {q - r} leave the window {slo}..{shi}")
    dr, ds = hi - lo + 1, shi - slo + 1
    ref_part = sp.diags(np.ones(max(dr - abs(r), 0)), -r, shape=(dr, dr)) if abs(r) < dr else sp.csr_matrix((dr, dr))
    sys_part = sp.csr_matrix(([1.0], ([q - r - slo], [q - slo])), shape=(ds, ds))
    mat = sp.kron(ref_part, sys_part).toarray().astype(complex)
    start = np.zeros(dr * ds, dtype=complex)
    start[(ref_charge - lo) * ds + (q - slo)] = 1
    target = np.zeros_like(start)
    target[(ref_charge + r - lo) * ds + (q - r - slo)] = 1
    fid = abs(np.vdot(target, mat @ start)) ** 2
    return ChargeShift(mat, (lo, hi), (slo, shi), float(fid))


def u1_shared_reference(size):
    """``(1/sqrt N) sum_{q<N} |-q>_A |q>_B`` on windows ``A: -N-1..1``, ``B: -2..N+1``.

    Returns ``(psi, a_lo, b_lo)`` with ``psi[a, b]`` at charges ``a + a_lo``, ``b + b_lo``.
    """
    n = int(size)
    if n < 1:
        raise ValidationError("reference size N must be >= 1")
    a_lo, a_hi = -n - 1, 1
    b_lo, b_hi = -2, n + 1
    psi = np.zeros((a_hi - a_lo + 1, b_hi - b_lo + 1), dtype=complex)
    for q in range(n):
        psi[-q - a_lo, q - b_lo] = 1 / np.sqrt(n)
    return psi, a_lo, b_lo


def u1_coherence_protocol(size):
    """Failure probability of the two-message U(1) coherence check.

    Alice simulates ``(|0> + |1>)/sqrt 2`` on ``C`` with ``(U_-)_A (U_+)_C``,
    Bob simulates the Hadamard on ``C`` against his half and measures
    ``C``'s charge. Returns the probability of outcome 1.
    """
    psi, _, _ = u1_shared_reference(size)
    s = 1 / np.sqrt(2)
    # Alice: |psi>|0> -> s(|psi>|0> + U-_A |psi>|1>)
    c0, c1 = s * psi, s * shift(psi, 0, -1)
    # Bob: |0>_C -> s(|0> + U-_B |1>), |1>_C -> s(U+_B |0> - |1>)
    out1 = s * (shift(c0, 1, -1) - c1)
    return float(np.vdot(out1, out1).real)


def u1_p1_oracle(size):
    """``(1 - Re <psi|(U_-)_A (U_+)_B|psi>) / 2`` from sparse ladder matrices."""
    psi, _, _ = u1_shared_reference(size)
    da, db = psi.shape
    lower_a = sp.diags(np.ones(da - 1), 1, shape=(da, da))  # |q-1><q|
    raise_b = sp.diags(np.ones(db - 1), -1, shape=(db, db))  # |q+1><q|
    v = psi.reshape(-1)
    overlap = np.vdot(v, sp.kron(lower_a, raise_b) @ v)
    return float((1 - overlap.real) / 2)
