"""Small example games shipped with the package.

``u1-coherence``
    Alice splits a unit of U(1) charge coherently between her register and
    the message; Bob absorbs the message charge. Each then reads off a charge,
    giving a shared fair coin.
``toy-coinflip``
    The same pattern for Z2 in one round (demonstration only; trivially
    biasable).
``bitcommit-su2``
    Two rounds over spins ``{0, 1/2, 1}`` with private spaces
    ``A = {0: 1, 1: 1}`` and ``B = {0: 2, 1: 1}``; the moves are fixed
    seeded conserving unitaries and the measurements are fixed seeded private
    projectors. It exercises non-abelian multiplicity bookkeeping.
"""

import numpy as np

from .charges import charge_system, su2_truncated, u1_truncated
from .errors import ValidationError
from .games import Protocol, random_invariant_unitary, random_private_measurement, move_space, private_projector
from .linalg import rng_for

BUNDLED_SEED = 20040215


def labeled_move(space, rules):
    """Identity on ``space`` except inside the totals named in ``rules``.

    ``rules[total] = (basis, u)`` where ``basis`` lists charge pairs
    ``(q_own, q_M)`` whose blocks are one-dimensional and ``u`` is a unitary
    on their span. All indices are charge indices.
    """
    w = np.eye(space.dim, dtype=complex)
    for total, (basis, u) in rules.items():
        ids = []
        for qs in basis:
            b = space.block(qs, total)
            if b.size != 1:
                raise ValidationError(f"block {qs} is not one-dimensional")
            ids.append(b.offset)
        w[np.ix_(ids, ids)] = u
    return w


def _charge_projectors(space, groups):
    """Private measurement with outcome ``k`` = own charge in ``groups[k]``."""
    own = space.shapes[0]
    out = []
    for g in groups:
        out.append(private_projector(space, {q: np.eye(own[q]) for q in g if own[q]}))
    return tuple(out)


HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
SWAP = np.array([[0, 1], [1, 0]])


def u1_coherence():
    cs = u1_truncated(1)
    m, z, p = (cs.index(x) for x in ("-1", "0", "1"))
    sa, sb, sm = {m: 1, z: 1}, {z: 1, p: 1}, {m: 1, z: 1, p: 1}
    spa, spb = move_space(cs, sa, sm, "A"), move_space(cs, sb, sm, "B")
    # Alice: |0>_A|0>_M -> (|0>|0> + |-1>|+1>)/sqrt 2 inside total 0
    wa = labeled_move(spa, {z: ([(m, p), (z, z)], HADAMARD)})
    # Bob: |0>_B|+1>_M <-> |+1>_B|0>_M inside total +1
    wb = labeled_move(spb, {p: ([(z, p), (p, z)], SWAP)})
    return Protocol(
        cs, 1, sa, sb, sm, [1], [1], [1], (wa,), (wb,),
        _charge_projectors(spa, [(z,), (m,)]),
        _charge_projectors(spb, [(z,), (p,)]),
        name="u1-coherence",
    )


def toy_coinflip():
    cs = charge_system("z2")
    e, o = 0, 1
    shape = {e: 1, o: 1}
    spa, spb = move_space(cs, shape, shape, "A"), move_space(cs, shape, shape, "B")
    wa = labeled_move(spa, {e: ([(e, e), (o, o)], HADAMARD)})
    wb = labeled_move(spb, {o: ([(e, o), (o, e)], SWAP)})
    return Protocol(
        cs, 1, shape, shape, shape, [1], [1], [1], (wa,), (wb,),
        _charge_projectors(spa, [(e,), (o,)]),
        _charge_projectors(spb, [(e,), (o,)]),
        name="toy-coinflip",
    )


def bitcommit_su2():
    cs = su2_truncated(1)
    j0, j1 = cs.index("0"), cs.index("1")
    sa, sb, sm = {j0: 1, j1: 1}, {j0: 2, j1: 1}, {j0: 1, cs.index("1/2"): 1, j1: 1}
    rng = rng_for(BUNDLED_SEED, 1)
    spa, spb = move_space(cs, sa, sm, "A"), move_space(cs, sb, sm, "B")
    rounds = 2
    xi_b = np.array([1, 1j]) / np.sqrt(2)
    return Protocol(
        cs, rounds, sa, sb, sm, [1], xi_b, [1],
        tuple(random_invariant_unitary(spa, rng) for _ in range(rounds)),
        tuple(random_invariant_unitary(spb, rng) for _ in range(rounds)),
        random_private_measurement(spa, rng),
        random_private_measurement(spb, rng),
        name="bitcommit-su2",
    )


BUNDLED = {"u1-coherence": u1_coherence, "toy-coinflip": toy_coinflip, "bitcommit-su2": bitcommit_su2}


def bundled_protocol(name):
    try:
        return BUNDLED[name]()
    except KeyError:
        raise ValidationError(f"no bundled protocol {name!r}; choose from {sorted(BUNDLED)}") from None
