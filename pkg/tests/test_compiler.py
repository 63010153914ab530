import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ssrsim.bundled import BUNDLED, bundled_protocol
from ssrsim.charges import charge_system, trivial_system, u1_truncated
from ssrsim.compiler import (
    ColorGame,
    _relabel,
    _invariant_measurement,
    _invariant_unitary,
    _invariant_vector,
    compile_to_uworld,
    lift_cheat_to_iworld_via_reference,
    lifted_private_rep,
    random_color_cheat,
    random_color_game,
    random_uworld_cheat,
    reduce_total_charge,
    translate_cheat_to_iworld,
    translate_cheat_to_uworld,
)
from ssrsim.errors import NontrivialChargeError, UnsupportedError
from ssrsim.games import (
    Protocol,
    _Runner,
    cheat,
    move_space,
    random_protocol,
    run_game,
    strategies_equivalent,
    trivial_protocol,
    validate_strategy,
)
from ssrsim.groups import build_group, irreps_of
from ssrsim.linalg import random_contraction, rng_for
from ssrsim.representations import RepSpace, invariance_residual


def conserving_cheat(p, party, rng):
    space = move_space(p.cs, p.shape(party), p.shape_m, party)
    moves = []
    for _ in range(p.rounds):
        w = np.zeros((space.dim, space.dim), dtype=complex)
        for ids in space.total_grid().values():
            w[np.ix_(ids, ids)] = random_contraction(len(ids), len(ids), rng)
        moves.append(w)
    return cheat(p, party, moves)


def seat(party, s):
    return {"alice" if party == "A" else "bob": s}


# compiled game ---------------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(BUNDLED))
def test_honest_play_matches(name):
    c = compile_to_uworld(bundled_protocol(name))
    assert c.target.world == "U"
    assert run_game(c.source).deviation(run_game(c.target), "joint") <= 1e-12


@pytest.mark.parametrize("name, dim", [("toy-coinflip", 4), ("u1-coherence", 7), ("bitcommit-su2", 11)])
def test_message_dimension(name, dim):
    c = compile_to_uworld(bundled_protocol(name))
    assert c.message_dim == dim


def test_message_dimension_trivial_protocol():
    p = trivial_protocol()
    assert compile_to_uworld(p).message_dim == p.shape_m[0]


@pytest.mark.parametrize("spec", ["z2", "z3", "u1:2", "su2:1", "octet", "s3"])
def test_message_dimension_counts_tags(spec):
    cs = charge_system(spec)
    p = random_protocol(cs, rng_for(0, len(cs)), max_dim=2)
    n = len(cs)
    want = sum(
        p.shape_m[qm] * cs.N(qa, qm, cs.dual[qb]) for qa in range(n) for qb in range(n) for qm in range(n)
    )
    assert compile_to_uworld(p).message_dim == want


@pytest.mark.parametrize("name", sorted(BUNDLED))
def test_verify_projectors(name):
    c = compile_to_uworld(bundled_protocol(name))
    for party in ("A", "B"):
        v = c.verify[party]
        assert np.max(np.abs(v @ v - v)) <= 1e-12
        assert np.max(np.abs(v - v.conj().T)) <= 1e-12


def test_verify_checks_own_charge():
    c = compile_to_uworld(bundled_protocol("toy-coinflip"))
    d_b = c.target.shape_b[0]
    for q in range(2):
        tag_q = c.tag_projector(lambda qa, qb, qm, q=q: qb == q)
        own_q = np.zeros((d_b, d_b))
        own_q[q, q] = 1  # Bob's flavor dims are 1 per charge, in charge order
        both = np.kron(own_q, tag_q)
        assert np.allclose(c.verify["B"] @ np.kron(own_q, np.eye(c.message_dim)), both)


def test_invalid_component_aborts():
    p = bundled_protocol("toy-coinflip")
    c = compile_to_uworld(p)
    t = c.target
    rng = rng_for(3)
    mix = np.linalg.qr(rng.standard_normal((c.message_dim,) * 2))[0]
    move = np.kron(np.eye(t.shape_a[0]), mix) @ t.alice_moves[0]
    s = cheat(t, "A", [move])
    runner = _Runner(t, s, t.honest("B"))
    psi = runner.apply("A", move, runner.initial())
    valid = runner.apply("B", c.verify["B"], psi)
    invalid = np.vdot(psi, psi).real - np.vdot(valid, valid).real
    assert invalid > 0.1
    assert abs(run_game(t, alice=s).abort - invalid) <= 1e-12


def test_flipping_bobs_charge_always_aborts():
    p = bundled_protocol("toy-coinflip")
    c = compile_to_uworld(p)
    perm = np.zeros((c.message_dim,) * 2)
    for qa, qb, qm in c.tags:
        perm[c.tag_offsets[(qa, 1 - qb, 1 - qm)], c.tag_offsets[(qa, qb, qm)]] = 1
    move = np.kron(np.eye(c.target.shape_a[0]), perm) @ c.target.alice_moves[0]
    u = cheat(c.target, "A", [move])
    assert run_game(c.target, alice=u).abort == pytest.approx(1, abs=1e-12)
    i = translate_cheat_to_iworld(c, u)
    assert validate_strategy(p, i, "I")["clean"]
    assert run_game(p, alice=i).abort == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("party", ["A", "B"])
def test_conserving_cheat_round_trip(party):
    p = bundled_protocol("bitcommit-su2")
    c = compile_to_uworld(p)
    s = conserving_cheat(p, party, rng_for(5))
    u = translate_cheat_to_uworld(c, s)
    ok, dev = strategies_equivalent(p, s, c.target, u)
    assert ok and dev <= 1e-12
    back = translate_cheat_to_iworld(c, u)
    ok, dev = strategies_equivalent(p, s, p, back)
    assert ok and dev <= 1e-12


def test_u1_two_round_violating_cheat():
    rng = rng_for(17)
    p = random_protocol(u1_truncated(2), rng, rounds=2, max_dim=2)
    c = compile_to_uworld(p)
    for party in ("A", "B"):
        u = random_uworld_cheat(c, party, rng, private_dim=2)
        assert not validate_strategy(c.source, translate_cheat_to_iworld(c, u), "I")["violations"]
        ok, dev = strategies_equivalent(c.target, u, p, translate_cheat_to_iworld(c, u))
        assert ok, dev


@settings(max_examples=15)
@given(st.sampled_from(["z2", "z3", "su2:1", "s3"]), st.integers(0, 2**32), st.sampled_from("AB"))
def test_translation_property(spec, seed, party):
    rng = rng_for(seed)
    p = random_protocol(charge_system(spec), rng, max_dim=2)
    c = compile_to_uworld(p)
    u = random_uworld_cheat(c, party, rng, private_dim=int(rng.integers(1, 3)))
    _, dev = strategies_equivalent(c.target, u, p, translate_cheat_to_iworld(c, u))
    assert dev <= 1e-10


def test_nontrivial_charge_requires_reduction():
    cs = charge_system("z3")
    rng = rng_for(2)
    base = random_protocol(cs, rng, rounds=1, max_dim=2)
    # the same game with every one of Alice's charges raised by 1, starting in charge 1
    sa = tuple(np.roll(base.shape_a, 1))
    f = {q: (q + 1) % 3 for q in range(3)}
    old = move_space(cs, base.shape_a, base.shape_m, "A")
    new = move_space(cs, sa, base.shape_m, "A")
    p = Protocol(
        cs, base.rounds, sa, base.shape_b, base.shape_m, base.xi_a, base.xi_b, base.xi_m,
        tuple(_relabel(cs, old, new, f, w) for w in base.alice_moves), base.bob_moves,
        tuple(_relabel(cs, old, new, f, e) for e in base.alice_measure), base.bob_measure, charge_a=1,
    )
    with pytest.raises(NontrivialChargeError):
        compile_to_uworld(p)
    reduced = reduce_total_charge(p)
    assert reduced.trivial_total
    assert run_game(reduced).deviation(run_game(base), "joint") <= 1e-12
    c = compile_to_uworld(p, reduce=True)
    assert run_game(c.target).deviation(run_game(base), "joint") <= 1e-12


def test_reduction_needs_abelian():
    p = bundled_protocol("bitcommit-su2")
    odd = Protocol(
        p.cs, p.rounds, p.shape_a, p.shape_b, p.shape_m, p.xi_a, p.xi_b, p.xi_m,
        p.alice_moves, p.bob_moves, p.alice_measure, p.bob_measure, charge_a=p.cs.index(1),
    )
    with pytest.raises(UnsupportedError):
        reduce_total_charge(odd)


# reference lift ---------------------------------------------------------------------------------


def z2_game(rng):
    irreps = irreps_of(build_group("z2"))
    rep = RepSpace.from_charges(irreps, {0: 1, 1: 1})
    ram = rep.tensor(rep)
    p = Protocol(
        trivial_system(), 1, (2,), (2,), (2,),
        _invariant_vector(rep, rng), _invariant_vector(rep, rng), _invariant_vector(rep, rng),
        (_invariant_unitary(ram, rng),), (_invariant_unitary(ram, rng),),
        _invariant_measurement(rep, 2, rng), _invariant_measurement(rep, 2, rng),
    )
    return ColorGame(p, rep, rep, rep)


def test_z2_charge_flip_lift():
    rng = rng_for(21)
    game = z2_game(rng)
    p = game.protocol
    flip = np.kron(np.eye(2), np.array([[0, 1], [1, 0]]))  # flip the message charge
    s = cheat(p, "A", [flip @ p.alice_moves[0]])
    assert invariance_residual(game.move_rep("A"), s.moves[0]) > 0.1
    lifted = lift_cheat_to_iworld_via_reference(game, s)
    rep = lifted_private_rep(game, "A").tensor(game.rep_m)
    assert invariance_residual(rep, lifted.moves[0]) <= 1e-12
    ok, dev = strategies_equivalent(p, s, p, lifted)
    assert ok and dev <= 1e-12
    assert run_game(p, alice=s).deviation(run_game(p, alice=lifted)) <= 1e-12


def test_invariant_cheat_lift_collapses():
    rng = rng_for(4)
    game = random_color_game("s3", rng, rounds=2)
    p = game.protocol
    s = cheat(p, "B", p.bob_moves)
    lifted = lift_cheat_to_iworld_via_reference(game, s)
    for w, lw in zip(s.moves, lifted.moves):
        assert np.max(np.abs(lw - np.kron(np.eye(6), w))) <= 1e-12


@settings(max_examples=10)
@given(st.sampled_from(["z2", "z3", "s3", "q8"]), st.integers(0, 2**32), st.sampled_from("AB"))
def test_lift_property(group, seed, party):
    rng = rng_for(seed)
    game = random_color_game(group, rng)
    s = random_color_cheat(game, party, rng)
    lifted = lift_cheat_to_iworld_via_reference(game, s)
    p = game.protocol
    _, dev = strategies_equivalent(p, s, p, lifted)
    assert dev <= 1e-10


def test_lift_scope_guards():
    rng = rng_for(0)
    game = random_color_game("z2", rng, rounds=1)
    s = random_color_cheat(game, "A", rng)
    with pytest.raises(UnsupportedError):
        lift_cheat_to_iworld_via_reference(game, s, cheaters=("A", "C"))
    with pytest.raises(UnsupportedError):
        lift_cheat_to_iworld_via_reference(bundled_protocol("u1-coherence"), s)
    with pytest.raises(UnsupportedError):
        lift_cheat_to_iworld_via_reference(bundled_protocol("toy-coinflip"), s)
