import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssrsim.errors import UnsupportedError
from ssrsim.groups import build_group, irreps_of
from ssrsim.linalg import random_density, random_state, rng_for, unitarity_residual
from ssrsim.representations import (
    RepSpace,
    fourier_regular,
    gauge_action,
    global_action,
    invariance_residual,
    twirl,
)

from conftest import BUILTIN_GROUPS


def regular(name):
    g = build_group(name)
    return fourier_regular(g, irreps_of(g))


def test_z2_fourier_is_hadamard():
    f = regular("z2").fourier
    assert np.allclose(f, np.array([[1, 1], [1, -1]]) / np.sqrt(2))


def test_trivial_group_fourier():
    assert np.allclose(regular("z1").fourier, [[1]])


@pytest.mark.parametrize("name", BUILTIN_GROUPS)
def test_fourier_unitary(name):
    assert unitarity_residual(regular(name).fourier) <= 1e-12


def test_gauge_identity():
    space = regular("s3")
    assert np.array_equal(gauge_action(space, 0), np.eye(6))


def test_gauge_commutes_with_global():
    space = regular("s3")
    for g in range(6):
        for h in range(6):
            u, v = gauge_action(space, g), global_action(space, h)
            assert np.max(np.abs(u @ v - v @ u)) <= 1e-12


def test_z3_gauge_phases():
    space = regular("z3")
    irreps = space.irreps
    for g in range(3):
        u = gauge_action(space, g, basis="charge")
        expect = np.array([irreps[q].matrices[g, 0, 0] for q in range(3)])
        assert np.allclose(u, np.diag(expect), atol=1e-12)
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(sorted(np.angle(np.diag(gauge_action(space, 1, "charge")))), sorted(np.angle([1, w, w * w])))


@pytest.mark.parametrize("name", BUILTIN_GROUPS)
def test_global_action_is_flavor_only(name):
    space = regular(name)
    rng = rng_for(5)
    coeffs = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    m = sum(c * global_action(space, h) for h, c in enumerate(coeffs))
    for g in range(space.dim):
        u = gauge_action(space, g)
        assert np.max(np.abs(u @ m @ u.conj().T - m)) <= 1e-12


def test_twirl_kills_charge_coherence():
    irreps = irreps_of(build_group("z2"))
    rep = RepSpace.from_charges(irreps, {0: 1, 1: 1})
    plus = np.array([1, 1]) / np.sqrt(2)
    assert np.allclose(twirl(rep, plus), np.eye(2) / 2)


def test_twirl_fixes_invariant():
    irreps = irreps_of(build_group("s3"))
    rep = RepSpace.from_charges(irreps, {0: 2, 2: 1})
    rho = twirl(rep, random_density(rep.dim, rng_for(1)))
    assert np.allclose(twirl(rep, rho), rho, atol=1e-12)
    assert invariance_residual(rep, rho) <= 1e-12


def test_twirl_needs_group():
    with pytest.raises(UnsupportedError):
        twirl(None, np.eye(2))


@given(st.sampled_from(BUILTIN_GROUPS), st.integers(0, 2**32))
def test_twirl_idempotent(name, seed):
    space = regular(name)
    rho = random_density(space.dim, rng_for(seed))
    once = twirl(space, rho)
    assert np.max(np.abs(twirl(space, once) - once)) <= 1e-12


@given(st.sampled_from(BUILTIN_GROUPS), st.integers(0, 2**32))
def test_twirl_equals_reference_purification(name, seed):
    # Twirled |psi> is what is left after entangling with a uniform group register.
    irreps = irreps_of(build_group(name))
    rng = rng_for(seed)
    rep = RepSpace.from_charges(irreps, {q: int(rng.integers(0, 3)) or 1 for q in range(len(irreps))})
    psi = random_state(rep.dim, rng)
    n = rep.mats.shape[0]
    big = np.stack([rep.U(g) @ psi for g in range(n)]) / np.sqrt(n)  # big[g, :]
    reduced = big.T @ big.conj()
    assert np.max(np.abs(twirl(rep, psi) - reduced)) <= 1e-12


def test_tensor_product_rep():
    irreps = irreps_of(build_group("q8"))
    a = RepSpace.from_charges(irreps, {4: 1})
    ab = a.tensor(a)
    assert ab.dim == 4
    # 2 x 2 of Q8 contains the trivial irrep once
    proj = ab.mats.mean(axis=0)
    assert np.isclose(np.trace(proj).real, 1)
