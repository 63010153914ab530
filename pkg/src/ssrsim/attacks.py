"""Bit-commitment steering attacks and data-hiding analysis.

Alice is party 0 and Bob party 1 of every two-party ``SectorSpace`` here.
An invariant local unitary of a party is a unitary per charge block acting
on that party's flavor, identity on everything else. Its best overlap
``max |<psi1| U |psi0>|`` is ``sum_q ||X_q||_1`` with ``X_q`` the flavor
overlap operator of block ``q``, attained by the polar unitary of ``X_q``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .charges import octet_like, su2_truncated, u1_truncated
from .errors import ChargeSystemError, NontrivialChargeError, UnsupportedError, ValidationError
from .linalg import polar_unitary, random_matrix, random_unitary, rng_for, trace_norm
from .sectors import SectorSpace, SectorState, reduced_density

TAMPER_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CommitmentPair:
    psi0: SectorState
    psi1: SectorState

    def __post_init__(self):
        if not self.psi0.space.same_layout(self.psi1.space):
            raise ValidationError("the two commitment states live in different spaces")
        if self.psi0.space.nparties != 2:
            raise ValidationError("a commitment pair is bipartite")
        if len(self.space.totals) != 1:
            raise ValidationError("commitment states need one definite total charge")
        for s in (self.psi0, self.psi1):
            if abs(s.norm2 - 1) > 1e-12:
                raise ValidationError(f"commitment state has squared norm {s.norm2:.17g}")

    @property
    def space(self):
        return self.psi0.space

    @property
    def total(self):
        return self.space.totals[0]


def overlap_operators(psi0, psi1, party):
    """``{q: X_q}`` with ``<psi1| U |psi0> = sum_q tr(U_q X_q)`` for ``U`` local to ``party``."""
    out = {}
    for q, idx in psi0.space.party_grid(party).items():
        out[q] = psi0.vec[idx].T @ psi1.vec[idx].conj()
    return out


def best_invariant_overlap(psi0, psi1, party):
    """Optimal invariant local unitary of ``party`` and the overlap it reaches.

    Returns ``(unitaries, overlap)``; ``unitaries[q]`` acts on the party's
    charge-``q`` flavor space.
    """
    xs = overlap_operators(psi0, psi1, party)
    us = {q: polar_unitary(x) for q, x in xs.items()}
    return us, float(sum(trace_norm(x) for x in xs.values()))


def local_operator(space, party, blocks):
    """Dense joint-space matrix of ``sum_q blocks[q] (x) I_rest``."""
    m = np.zeros((space.dim, space.dim), dtype=complex)
    for q, idx in space.party_grid(party).items():
        u = blocks.get(q, np.eye(idx.shape[1]))
        for r in range(idx.shape[0]):
            m[np.ix_(idx[r], idx[r])] = u
    return m


def concealment_check(pair, tol=1e-10):
    """Per-sector trace norms ``||rho0_q - rho1_q||_1`` of Bob's blocks.

    A difference only in ``p_q`` shows up as ``|p0_q - p1_q|``. The pair is
    concealing when every sector distance is within ``tol``.
    """
    r0 = reduced_density(pair.psi0, 1)
    r1 = reduced_density(pair.psi1, 1)
    per = {q: trace_norm(r0[q] - r1[q]) for q in r0}
    total = 0.5 * sum(per.values())
    return {
        "per_sector": {pair.space.cs.labels[q]: d for q, d in per.items()},
        "trace_distance": total,
        "concealing": all(d <= tol for d in per.values()),
    }


@dataclass(frozen=True)
class SteeringResult:
    unitaries: dict = field(repr=False)
    overlap: float
    operator: np.ndarray = field(repr=False)


def steering_unitary(pair):
    """Alice's charge-conditioned unitary taking ``psi0`` as close as possible to ``psi1``."""
    cs = pair.space.cs
    if pair.total != cs.trivial:
        raise NontrivialChargeError("steering needs trivial total charge; use compensating_charge_attack")
    us, ov = best_invariant_overlap(pair.psi0, pair.psi1, 0)
    return SteeringResult(us, ov, local_operator(pair.space, 0, us))


def bob_fidelity_oracle(pair):
    """Root fidelity of Bob's full reduced states via ``linalg.uhlmann_fidelity``."""
    from .linalg import uhlmann_fidelity
    from .sectors import dense_from_blocks

    shape = pair.space.shapes[1]
    r0 = dense_from_blocks(reduced_density(pair.psi0, 1), shape)
    r1 = dense_from_blocks(reduced_density(pair.psi1, 1), shape)
    return uhlmann_fidelity(r0, r1)


def attach_compensating_charge(pair):
    """Re-express a pair of total charge ``t`` on ``(AC, B)`` with ``C`` of charge ``dual(t)``.

    ``AC`` sector ``x`` has flavor ``sum_{q_A} H_{A,q_A} (x) V_x^{q_A, dual t}``.
    A block ``(q_A, q_B)`` moves to ``x = dual(q_B)``; its fusion label in
    ``V_t^{q_A q_B}`` is identified with the one in ``V_x^{q_A, dual t}``.
    """
    sp_ = pair.space
    cs = sp_.cs
    t = pair.total
    tb = cs.dual[t]
    shape_a, shape_b = sp_.shapes
    n = len(cs)
    # offsets[x][q_A] = row offset of A's charge-q_A part inside AC sector x
    offsets = [dict() for _ in range(n)]
    dims_ac = [0] * n
    for x in range(n):
        for qa in range(n):
            m = cs.N(qa, tb, x)
            if shape_a[qa] and m:
                offsets[x][qa] = (dims_ac[x], m)
                dims_ac[x] += shape_a[qa] * m
    if not any(dims_ac):
        raise ChargeSystemError("no AC sector survives")
    new_space = SectorSpace(cs, [dims_ac, shape_b], totals=cs.trivial, parties=("AC", "B"))

    def convert(state):
        blocks = {}
        for b in sp_.blocks:
            qa, qb = b.charges
            x = cs.dual[qb]
            if qa not in offsets[x] or offsets[x][qa][1] != b.mult:
                raise ChargeSystemError(
                    f"N^{cs.labels[t]}_({cs.labels[qa]},{cs.labels[qb]}) = {b.mult} has no matching "
                    f"AC fusion space"
                )
            o, m = offsets[x][qa]
            arr = blocks.setdefault((x, qb), np.zeros((dims_ac[x], shape_b[qb]), dtype=complex))
            psi = state.vec[b.slice].reshape(b.shape)  # (d_A, d_B, mu)
            arr[o : o + shape_a[qa] * m] = np.moveaxis(psi, 2, 1).reshape(shape_a[qa] * m, shape_b[qb])
        return SectorState.from_blocks(new_space, blocks)

    return CommitmentPair(convert(pair.psi0), convert(pair.psi1))


def compensating_charge_attack(pair):
    """Steer on ``AC`` after attaching a conjugate-charge purifier ``C`` to Alice."""
    if pair.total == pair.space.cs.trivial:
        return steering_unitary(pair), pair
    ext = attach_compensating_charge(pair)
    return steering_unitary(ext), ext


# -- random pairs -----------------------------------------------------------


def _trivial_space(cs, shape_b, shape_a=None):
    shape_a = shape_a or [shape_b[cs.dual[q]] for q in range(len(cs))]
    return SectorSpace(cs, [shape_a, shape_b], totals=cs.trivial)


def random_pair(cs, shape_b, rng, concealing=False, shape_a=None):
    """Random trivially charged pair; with ``concealing`` the second is a charge-conditioned rotation of the first.

    Alice's shape defaults to Bob's, read at the conjugate charge.
    """
    space = _trivial_space(cs, shape_b, shape_a)
    v0 = random_matrix(space.dim, 1, rng)[:, 0]
    v0 /= np.linalg.norm(v0)
    psi0 = SectorState(space, v0)
    if concealing:
        us = {q: random_unitary(idx.shape[1], rng) for q, idx in space.party_grid(0).items()}
        psi1 = SectorState(space, local_operator(space, 0, us) @ v0)
    else:
        v1 = random_matrix(space.dim, 1, rng)[:, 0]
        psi1 = SectorState(space, v1 / np.linalg.norm(v1))
    return CommitmentPair(psi0, psi1)


# -- data hiding ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HidingInstance:
    name: str
    plus: SectorState
    minus: SectorState

    def __post_init__(self):
        if abs(self.plus.overlap(self.minus)) > 1e-12:
            raise ValidationError("hidden-bit states must be orthogonal")

    @property
    def space(self):
        return self.plus.space


def _pm_instance(name, cs, shapes, total, key0, key1):
    space = SectorSpace(cs, shapes, totals=total)
    s = 1 / np.sqrt(2)

    def state(sign):
        v = np.zeros(space.dim, dtype=complex)
        for key, c in ((key0, s), (key1, sign * s)):
            v[key(space)] = c
        return SectorState(space, v)

    return HidingInstance(name, state(1), state(-1))


def u1_hiding():
    """``(|0 1> +- |1 0>)/sqrt 2`` with total charge 1."""
    cs = u1_truncated(1)
    z, o = cs.index(0), cs.index(1)
    shape = {z: 1, o: 1}
    return _pm_instance(
        "u1",
        cs,
        [shape, shape],
        o,
        lambda s: s.block((z, o)).offset,
        lambda s: s.block((o, z)).offset,
    )


def su2_hiding():
    """Total ``j = 1/2``, ``j_A = 1/2``; the bit sits in the relative sign of ``j_B = 0`` and ``j_B = 1``."""
    cs = su2_truncated(1)
    h, z, one = cs.index("1/2"), cs.index(0), cs.index(1)
    return _pm_instance(
        "su2",
        cs,
        [{h: 1}, {z: 1, one: 1}],
        h,
        lambda s: s.block((h, z)).offset,
        lambda s: s.block((h, one)).offset,
    )


def octet_hiding():
    """Total charge 8 from ``8 x 8``; the bit sits in the two fusion channels."""
    cs = octet_like()
    e = cs.index(8)
    return _pm_instance(
        "octet",
        cs,
        [{e: 1}, {e: 1}],
        e,
        lambda s: s.block((e, e)).offset,
        lambda s: s.block((e, e)).offset + 1,
    )


HIDING_INSTANCES = {"u1": u1_hiding, "su2": su2_hiding, "octet": octet_hiding}


def _random_invariant_unitary(space, party, rng):
    return {q: random_unitary(idx.shape[1], rng) for q, idx in space.party_grid(party).items()}


def data_hiding_analyze(h, samples=1000, seed=0):
    """Local invariant distinguishability and tamper power for each party.

    Distinguishing uses the Helstrom bound on the party's charge-block
    reduced states. Tamper power is the best invariant overlap
    ``max_U |<minus| U |plus>|`` (exact, via polar decomposition), checked
    against ``samples`` seeded draws of block-Haar invariant unitaries.
    """
    rng = rng_for(seed)
    report = {"instance": h.name}
    for party, name in enumerate(("alice", "bob")):
        r0 = reduced_density(h.plus, party)
        r1 = reduced_density(h.minus, party)
        dist = 0.5 * sum(trace_norm(r0[q] - r1[q]) for q in r0)
        _, best = best_invariant_overlap(h.plus, h.minus, party)
        xs = overlap_operators(h.plus, h.minus, party)
        sample_max = 0.0
        for _ in range(samples):
            us = _random_invariant_unitary(h.space, party, rng)
            val = abs(sum(np.trace(us[q] @ xs[q]) for q in xs))
            sample_max = max(sample_max, float(val))
        can = best >= 1 - TAMPER_TOL
        sample_says = sample_max >= 0.99 if can else sample_max <= TAMPER_TOL
        report[name] = {
            "trace_distance": dist,
            "distinguishing_probability": 0.5 + 0.5 * dist,
            "best_overlap": best,
            "sample_max_overlap": sample_max,
            "can_tamper": can,
            "sample_agrees": bool(sample_says and sample_max <= best + 1e-12),
        }
    return report


# -- unlocking with a shared U(1) reference ---------------------------------


def _ladder(d, delta, periodic=False):
    """Dense ``|q + delta><q|`` on a window of ``d`` charges."""
    m = np.eye(d, k=-delta)
    if periodic:
        m = np.roll(np.eye(d), delta, axis=0)
    return m


def _x_inv(d, periodic=False):
    """``X^inv = U_- (x) sigma+ + U_+ (x) sigma-`` on reference window (x) data qubit."""
    sig_p = np.array([[0.0, 0.0], [1.0, 0.0]])  # |1><0|
    return np.kron(_ladder(d, -1, periodic), sig_p) + np.kron(_ladder(d, 1, periodic), sig_p.T)


def _outcome_projectors(x):
    """``(P_+, P_-, P_0)`` for a partial involution ``X`` (``X^3 = X``)."""
    x2 = x @ x
    return (x2 + x) / 2, (x2 - x) / 2, np.eye(len(x)) - x2


def _reference_state(n, periodic):
    """``(1/sqrt N) sum_q |-q>_A |q>_B``; windows padded by one unless ``periodic``."""
    if periodic:
        psi = np.zeros((n, n), dtype=complex)
        for q in range(n):
            psi[(-q) % n, q] = 1 / np.sqrt(n)
        return psi
    psi = np.zeros((n + 2, n + 2), dtype=complex)  # A: -N..1, B: -1..N
    for q in range(n):
        psi[n - q, q + 1] = 1 / np.sqrt(n)
    return psi


def _check_u1(h):
    if h is not None and not h.space.cs.name.startswith("u1"):
        raise UnsupportedError("unlocking is implemented for the U(1) instance only")


def data_hiding_unlock(reference, h=None):
    """Success probability of unlocking the U(1) hidden bit.

    ``reference`` is the size ``N`` of the truncated condensate or
    ``"exact"``. Both parties measure ``X^inv`` on (reference half, data
    qubit) and guess ``+`` when the outcomes agree. The exact reference is a
    cyclic charge window, on which the condensate is an exact eigenstate of
    ``(U_-)_A (U_+)_B``; with ``N = 1`` it coincides with the truncated one.
    """
    _check_u1(h)
    periodic = reference == "exact"
    n = 4 if periodic else int(reference)
    if n < 1:
        raise ValidationError("reference size must be >= 1")
    ref = _reference_state(n, periodic)
    d = ref.shape[0]
    pa = _outcome_projectors(_x_inv(d, periodic))
    s = 1 / np.sqrt(2)
    success = 0.0
    for sign in (1, -1):
        data = np.zeros((2, 2), dtype=complex)  # data[a', b']
        data[0, 1], data[1, 0] = s, sign * s
        psi = np.einsum("ab,xy->axby", ref, data).reshape(2 * d, 2 * d)
        for i, pi in enumerate(pa[:2]):
            for j, pj in enumerate(pa[:2]):
                agree = (i == j) == (sign == 1)
                if agree:
                    m = pi @ psi @ pj.T
                    success += 0.5 * float(np.vdot(m, m).real)
    return success


def data_hiding_unlock_oracle(n):
    """Same experiment on the full ``A B A' B'`` space with sparse Kronecker products."""
    n = int(n)
    ref = _reference_state(n, False)
    d = ref.shape[0]
    ia, ib, i2 = sp.identity(d), sp.identity(d), sp.identity(2)
    lower = sp.csr_matrix(np.eye(d, k=1))  # |q-1><q|
    raise_ = lower.T
    sig_p = sp.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))
    sig_m = sig_p.T
    # order A, B, A', B'
    xa = sp.kron(sp.kron(lower, ib), sp.kron(sig_p, i2)) + sp.kron(sp.kron(raise_, ib), sp.kron(sig_m, i2))
    xb = sp.kron(sp.kron(ia, lower), sp.kron(i2, sig_p)) + sp.kron(sp.kron(ia, raise_), sp.kron(i2, sig_m))
    xa2, xb2 = xa @ xa, xb @ xb
    proj = {
        "a+": (xa2 + xa) / 2,
        "a-": (xa2 - xa) / 2,
        "b+": (xb2 + xb) / 2,
        "b-": (xb2 - xb) / 2,
    }
    s = 1 / np.sqrt(2)
    total = 0.0
    for sign in (1, -1):
        data = np.array([0, s, sign * s, 0], dtype=complex)
        v = np.kron(ref.reshape(-1), data)
        pairs = [("a+", "b+"), ("a-", "b-")] if sign == 1 else [("a+", "b-"), ("a-", "b+")]
        for ka, kb in pairs:
            w = proj[kb] @ (proj[ka] @ v)
            total += 0.5 * float(np.vdot(w, w).real)
    return total


def unlock_formula(n):
    """``(1 + Re <(U_-)_A (U_+)_B>)/2 = 1 - 1/(2N)``."""
    return 1 - 1 / (2 * n)
