import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssrsim.attacks import (
    HIDING_INSTANCES,
    CommitmentPair,
    best_invariant_overlap,
    bob_fidelity_oracle,
    compensating_charge_attack,
    concealment_check,
    data_hiding_analyze,
    data_hiding_unlock,
    data_hiding_unlock_oracle,
    random_pair,
    steering_unitary,
    unlock_formula,
)
from ssrsim.charges import charge_system
from ssrsim.errors import NontrivialChargeError, UnsupportedError, ValidationError
from ssrsim.groups import build_group, irreps_of
from ssrsim.linalg import rng_for, unitarity_residual
from ssrsim.sectors import SectorSpace, SectorState, dense_from_blocks, reduced_density
from ssrsim.representations import RepSpace, invariance_residual


def sqrtm_psd(m):
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fidelity_svd(rho, sigma):
    """Root fidelity as the trace norm of sqrt(rho) sqrt(sigma)."""
    return float(np.linalg.svd(sqrtm_psd(rho) @ sqrtm_psd(sigma), compute_uv=False).sum())


def bob_dense(state):
    return dense_from_blocks(reduced_density(state, 1), state.space.shapes[1])


def su2_pair():
    h = HIDING_INSTANCES["su2"]()
    return CommitmentPair(h.plus, h.minus)


def test_identical_states_conceal():
    pair = random_pair(charge_system("z3"), [1, 2, 1], rng_for(0))
    same = CommitmentPair(pair.psi0, pair.psi0)
    rep = concealment_check(same)
    assert rep["concealing"] and rep["trace_distance"] == 0


def test_su2_pm_differs_only_in_coherence():
    pair = su2_pair()
    rep = concealment_check(pair)
    assert rep["concealing"]
    assert max(rep["per_sector"].values()) <= 1e-12


def test_profile_mismatch_detected():
    cs = charge_system("z2")
    space = SectorSpace(cs, [[1, 1], [1, 1]], totals=0)
    a, b = 0.8, 0.5
    psi0 = SectorState.from_blocks(space, {(0, 0): [[np.sqrt(a)]], (1, 1): [[np.sqrt(1 - a)]]})
    psi1 = SectorState.from_blocks(space, {(0, 0): [[np.sqrt(b)]], (1, 1): [[np.sqrt(1 - b)]]})
    rep = concealment_check(CommitmentPair(psi0, psi1))
    assert not rep["concealing"]
    assert rep["per_sector"]["0"] == pytest.approx(abs(a - b), abs=1e-12)
    assert rep["trace_distance"] == pytest.approx(abs(a - b), abs=1e-12)


def test_pair_validation():
    cs = charge_system("z2")
    space = SectorSpace(cs, [[1, 1], [1, 1]], totals=0)
    with pytest.raises(ValidationError):
        CommitmentPair(SectorState(space, [0.5, 0]), SectorState(space, [1, 0]))


@pytest.mark.parametrize("spec", ["z2", "s3", "u1:2", "su2:1", "octet"])
def test_concealing_pairs_are_steered(spec):
    cs = charge_system(spec)
    rng = rng_for(11)
    shape = [int(rng.integers(1, 3)) for _ in range(len(cs))]
    for _ in range(5):
        pair = random_pair(cs, shape, rng, concealing=True)
        assert concealment_check(pair)["concealing"]
        res = steering_unitary(pair)
        assert res.overlap >= 1 - 1e-10
        moved = res.operator @ pair.psi0.vec
        assert abs(abs(np.vdot(pair.psi1.vec, moved)) - 1) <= 1e-10


@given(st.sampled_from(["z2", "z3", "s3", "u1:1", "su2:1/2", "octet"]), st.integers(0, 2**32))
def test_overlap_matches_fidelity(spec, seed):
    cs = charge_system(spec)
    rng = rng_for(seed)
    shape = [int(rng.integers(1, 3)) for _ in range(len(cs))]
    pair = random_pair(cs, shape, rng)
    res = steering_unitary(pair)
    assert abs(res.overlap - bob_fidelity_oracle(pair)) <= 1e-8
    assert abs(res.overlap - fidelity_svd(bob_dense(pair.psi0), bob_dense(pair.psi1))) <= 1e-8
    achieved = abs(np.vdot(pair.psi1.vec, res.operator @ pair.psi0.vec))
    assert abs(achieved - res.overlap) <= 1e-10
    for u in res.unitaries.values():
        assert unitarity_residual(u) <= 1e-10


def test_steering_unitary_is_gauge_invariant():
    # With color restored, Alice's flavor-block unitary commutes with U(g).
    cs = charge_system("s3")
    irreps = irreps_of(build_group("s3"))
    pair = random_pair(cs, [1, 1, 2], rng_for(3), concealing=True)
    us = steering_unitary(pair).unitaries
    mats = []
    for q, u in sorted(us.items()):
        mats.append(np.kron(np.eye(irreps[q].dim), u))  # color (x) flavor
    d = sum(m.shape[0] for m in mats)
    full = np.zeros((d, d), dtype=complex)
    o = 0
    for m in mats:
        full[o : o + len(m), o : o + len(m)] = m
        o += len(m)
    rep = RepSpace.from_charges(irreps, {q: pair.space.shapes[0][q] for q in us})
    # from_charges orders (color, flavor) inside each charge, as built above
    assert invariance_residual(rep, full) <= 1e-10


def test_su2_fails_without_compensating_charge():
    pair = su2_pair()
    with pytest.raises(NontrivialChargeError):
        steering_unitary(pair)
    _, best = best_invariant_overlap(pair.psi0, pair.psi1, 0)
    assert best <= 1e-10


def test_su2_succeeds_with_compensating_charge():
    res, ext = compensating_charge_attack(su2_pair())
    assert res.overlap >= 1 - 1e-10
    assert ext.total == ext.space.cs.trivial


def test_octet_compensating_charge():
    h = HIDING_INSTANCES["octet"]()
    res, _ = compensating_charge_attack(CommitmentPair(h.plus, h.minus))
    assert abs(res.overlap - 1) <= 1e-10


def test_trivial_charge_passthrough():
    pair = random_pair(charge_system("z3"), [1, 1, 2], rng_for(8))
    res, same = compensating_charge_attack(pair)
    assert same is pair
    assert res.overlap == steering_unitary(pair).overlap


# data hiding ------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "name, alice, bob",
    [("u1", True, True), ("su2", False, True), ("octet", False, False)],
)
def test_tamper_verdicts(name, alice, bob):
    rep = data_hiding_analyze(HIDING_INSTANCES[name](), samples=200, seed=1)
    assert rep["alice"]["can_tamper"] is alice
    assert rep["bob"]["can_tamper"] is bob
    for who in ("alice", "bob"):
        assert rep[who]["distinguishing_probability"] == pytest.approx(0.5, abs=1e-12)
        assert rep[who]["sample_agrees"]


def test_unlock_exact_reference():
    assert data_hiding_unlock("exact") == pytest.approx(1, abs=1e-12)


def test_unlock_single_charge_reference():
    assert data_hiding_unlock(1) == pytest.approx(0.5, abs=1e-12)


def test_unlock_sweep():
    vals = [data_hiding_unlock(n) for n in range(1, 17)]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
    for n, v in enumerate(vals, 1):
        assert abs(v - data_hiding_unlock_oracle(n)) <= 1e-10
        assert abs(v - unlock_formula(n)) <= 1e-10


def test_unlock_needs_u1():
    with pytest.raises(UnsupportedError):
        data_hiding_unlock(4, HIDING_INSTANCES["su2"]())
