import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssrsim.errors import TruncationError, ValidationError
from ssrsim.groups import build_group, irreps_of
from ssrsim.linalg import random_matrix, random_state, rng_for
from ssrsim.reference import (
    DistributedReference,
    ReferenceSystem,
    distributed_equivalence_check,
    lift_invariant,
    u1_coherence_protocol,
    u1_p1_oracle,
    u1_simulate_charge_shift,
    verify_minv_properties,
)
from ssrsim.representations import RepSpace, fourier_regular, global_action, invariance_residual

from conftest import BUILTIN_GROUPS


def regular(name):
    g = build_group(name)
    return fourier_regular(g, irreps_of(g))


def test_identity_lifts_to_identity():
    a = regular("s3")
    assert np.allclose(lift_invariant(np.eye(6), a), np.eye(36))


def test_z2_charge_flip_lift():
    a = regular("z2")
    flip = a.to_group_basis(np.array([[0, 1], [1, 0]], dtype=complex))  # X in charge coordinates
    lifted = lift_invariant(flip, a)
    # in the group basis the flip is Z, and conjugating by the nontrivial element negates it
    assert np.allclose(lifted, np.diag([1, -1, -1, 1]))
    joint = a.tensor(a)
    assert invariance_residual(joint, lifted) <= 1e-12


def test_homomorphism_s3():
    a = regular("s3")
    rng = rng_for(2)
    m1, m2 = random_matrix(6, 6, rng), random_matrix(6, 6, rng)
    diff = lift_invariant(m1 @ m2, a) - lift_invariant(m1, a) @ lift_invariant(m2, a)
    assert np.max(np.abs(diff)) <= 1e-10


def test_global_action_collapses():
    a = regular("d4")
    v = global_action(a, 3)
    assert np.allclose(lift_invariant(v, a), np.kron(np.eye(8), v))


def test_group_mismatch():
    with pytest.raises(ValidationError):
        lift_invariant(np.eye(2), regular("z2"), ReferenceSystem.regular("z3"))


def test_property_report_z2():
    rep = verify_minv_properties("z2", trials=50, seed=0)
    assert rep["max_residual"] <= 1e-10
    assert set(rep["expectation"]) == {"pure", "mixed", "random"}


def test_property_report_deterministic():
    a = verify_minv_properties("z3", trials=5, seed=9)
    b = verify_minv_properties("z3", trials=5, seed=9)
    assert a == b


@given(st.sampled_from(BUILTIN_GROUPS), st.integers(0, 2**32))
def test_lift_is_linear(name, seed):
    rng = rng_for(seed)
    irreps = irreps_of(build_group(name))
    a = RepSpace.from_charges(irreps, {q: 1 for q in range(len(irreps))})
    m1, m2 = random_matrix(a.dim, a.dim, rng), random_matrix(a.dim, a.dim, rng)
    al, be = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
    diff = lift_invariant(al * m1 + be * m2, a) - al * lift_invariant(m1, a) - be * lift_invariant(m2, a)
    assert np.max(np.abs(diff)) <= 1e-12


# distributed references -----------------------------------------------------------------


def check(ref, name, trials, seed=0):
    a = regular(name)
    worst = 0.0
    for t in range(trials):
        rng = rng_for(seed, t)
        m = random_matrix(a.dim, a.dim, rng)
        psi = random_state(a.dim, rng)
        worst = max(worst, distributed_equivalence_check(ref, m, a, psi))
    return worst


def test_pure_reference_z3():
    assert check(DistributedReference.build("z3"), "z3", 10) <= 1e-12


def test_offset_identity_is_pure():
    pure = DistributedReference.build("s3")
    off = DistributedReference.build("s3", "offset", offset=0)
    assert np.allclose(pure.vector(), off.vector())
    assert check(off, "s3", 5) <= 1e-12


def test_offset_twisted():
    assert check(DistributedReference.build("s3", "offset", offset=4), "s3", 5) <= 1e-10


def test_classical_s3():
    assert check(DistributedReference.build("s3", "classical"), "s3", 5) <= 1e-10


def test_three_party_pairs():
    ref = DistributedReference.build("z2", parties=3)
    a = regular("z2")
    rng = rng_for(4)
    for pair in ((0, 1), (0, 2), (1, 2)):
        m, psi = random_matrix(2, 2, rng), random_state(2, rng)
        assert distributed_equivalence_check(ref, m, a, psi, pair) <= 1e-10


@pytest.mark.parametrize("variant", ["pure", "classical"])
def test_reference_invariant(variant):
    ref = DistributedReference.build("q8", variant)
    assert ref.invariance_residual() <= 1e-12


def test_bad_variant():
    with pytest.raises(ValidationError):
        DistributedReference.build("z2", "quantum")


# U(1) -------------------------------------------------------------------------------------


def test_zero_shift_is_identity():
    sh = u1_simulate_charge_shift(1, 0)
    assert np.allclose(sh.matrix, np.eye(len(sh.matrix)))
    assert sh.fidelity == 1


def test_unit_shift_exact():
    assert u1_simulate_charge_shift(1, 1).fidelity == pytest.approx(1, abs=1e-15)


def test_shift_out_of_window():
    with pytest.raises(TruncationError):
        u1_simulate_charge_shift(1, 2)


@pytest.mark.parametrize("n, p1", [(1, 0.5), (10, 0.05), (64, 0.0078125)])
def test_p1_values(n, p1):
    assert abs(u1_coherence_protocol(n) - p1) <= 1e-12


def test_p1_monotone_and_matches_oracle():
    vals = [u1_coherence_protocol(n) for n in range(1, 65)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert max(abs(u1_p1_oracle(n) - v) for n, v in zip(range(1, 65), vals)) <= 1e-12


def test_p1_rejects_empty_reference():
    with pytest.raises(ValidationError):
        u1_coherence_protocol(0)
