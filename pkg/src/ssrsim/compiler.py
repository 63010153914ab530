"""Moving games and cheating strategies between the I-world and the U-world.

``compile_to_uworld`` builds a single-charge game whose message carries the
sector data explicitly: the private spaces become ``(+)_q H_q`` and the
message becomes ``(+)_tag H_{M,q_M} (x) V`` over all tags ``(q_A, q_B, q_M)``
with a nonzero fusion space. The embedding ``F`` sends ``|q_A, a>|q_M, m, mu>``
(in the block where Bob holds ``q_B``) to ``|a>|tag, m, mu>``; honest moves
and measurements become ``F W F^dagger``, which includes the recipient's
coherent check that the tag agrees with its own charge.

``lift_cheat_to_iworld_via_reference`` works in the color picture: a
``ColorGame`` keeps explicit group representations on every system, and a
non-invariant cheat ``V`` is replaced by ``V^inv`` on ``R (x) A (x) M``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .charges import normalize_shape, trivial_system
from .errors import NontrivialChargeError, TruncationError, UnsupportedError, ValidationError
from .games import Protocol, Strategy, move_space
from .groups import build_group, irreps_of
from .linalg import dagger, random_contraction, random_state
from .reference import lift_invariant
from .representations import RepSpace, fourier_regular, twirl
from .sectors import project_to_tag


@dataclass(frozen=True, eq=False)
class CompiledGame:
    """``source`` (I-world) together with its U-world simulation ``target``."""

    source: Protocol
    target: Protocol
    tags: tuple  # (q_A, q_B, q_M) in message order
    tag_offsets: dict = field(repr=False)
    embed: dict = field(repr=False)  # party -> F on that party's move space
    verify: dict = field(repr=False)  # party -> F F^dagger on the target move space

    @property
    def message_dim(self):
        return self.target.shape_m[0]

    def tag_projector(self, predicate):
        """Projector on the target message onto tags satisfying ``predicate(q_A, q_B, q_M)``."""
        d = np.zeros(self.message_dim)
        for tag in self.tags:
            if predicate(*tag):
                d[self._tag_slice(tag)] = 1
        return np.diag(d)

    def _tag_slice(self, tag):
        off = self.tag_offsets[tag]
        size = self.source.shape_m[tag[2]] * _tag_mult(self.source.cs, tag)
        return slice(off, off + size)


def _tag_mult(cs, tag):
    qa, qb, qm = tag
    return cs.N(qa, qm, cs.dual[qb])


def _offsets(shape):
    out, o = {}, 0
    for q, d in enumerate(shape):
        out[q] = o
        o += d
    return out, o


def _tags(p):
    """Every ``(q_A, q_B, q_M)`` the message could describe, honest private support or not."""
    n = len(p.cs)
    return tuple(
        (qa, qb, qm)
        for qa in range(n)
        for qb in range(n)
        for qm, dm in enumerate(p.shape_m)
        if dm and _tag_mult(p.cs, (qa, qb, qm))
    )


def _embedding(cs, space, priv_offsets, priv_dim, tag_offsets, msg_dim):
    """``F`` from an I-world move space into ``C^priv_dim (x) C^msg_dim``.

    Blocks whose tag is not populated get zero columns; they never carry
    amplitude in the joint game.
    """
    own = space.parties[0]
    f = np.zeros((priv_dim * msg_dim, space.dim))
    for b in space.blocks:
        q, qm = b.charges
        qo = cs.dual[b.total]
        tag = (q, qo, qm) if own == "A" else (qo, q, qm)
        if tag not in tag_offsets:
            continue
        da, dm = b.dims
        cols = b.offset + np.arange(b.size)
        rows = (priv_offsets[q] + np.arange(da))[:, None] * msg_dim + tag_offsets[tag] + np.arange(dm * b.mult)
        f[rows.ravel(), cols] = 1
    return f


def _sandwich(f, w):
    return f @ w @ f.T


def compile_to_uworld(p, reduce=False):
    """U-world game that simulates ``p`` (honest play and every cheat, up to translation)."""
    if not p.trivial_total:
        if not reduce:
            raise NontrivialChargeError("initial state has nontrivial total charge; pass reduce=True or reduce first")
        p = reduce_total_charge(p)
    cs, t = p.cs, p.cs.trivial
    tags = _tags(p)
    tag_offsets, o = {}, 0
    for tag in tags:
        tag_offsets[tag] = o
        o += p.shape_m[tag[2]] * _tag_mult(cs, tag)
    d_m = o
    off_a, d_a = _offsets(p.shape_a)
    off_b, d_b = _offsets(p.shape_b)
    embed = {
        "A": _embedding(cs, move_space(cs, p.shape_a, p.shape_m, "A"), off_a, d_a, tag_offsets, d_m),
        "B": _embedding(cs, move_space(cs, p.shape_b, p.shape_m, "B"), off_b, d_b, tag_offsets, d_m),
    }
    xi_a = np.zeros(d_a, dtype=complex)
    xi_a[off_a[t] : off_a[t] + p.shape_a[t]] = p.xi_a
    xi_b = np.zeros(d_b, dtype=complex)
    xi_b[off_b[t] : off_b[t] + p.shape_b[t]] = p.xi_b
    xi_m = np.zeros(d_m, dtype=complex)
    start = tag_offsets[(t, t, t)]
    xi_m[start : start + p.shape_m[t]] = p.xi_m
    fa, fb = embed["A"], embed["B"]
    target = Protocol(
        trivial_system(),
        p.rounds,
        (d_a,),
        (d_b,),
        (d_m,),
        xi_a,
        xi_b,
        xi_m,
        tuple(_sandwich(fa, w) for w in p.alice_moves),
        tuple(_sandwich(fb, w) for w in p.bob_moves),
        tuple(_sandwich(fa, e) for e in p.alice_measure),
        tuple(_sandwich(fb, e) for e in p.bob_measure),
        name=f"{p.name}~",
    )
    verify = {"A": fa @ fa.T, "B": fb @ fb.T}
    return CompiledGame(p, target, tags, tag_offsets, embed, verify)


def translate_cheat_to_iworld(c, cheat):
    """I-world strategy in ``c.source`` equivalent to the U-world ``cheat`` in ``c.target``.

    The cheater's private space is ``H~'`` for every charge; each move keeps only the blocks that preserve the opponent's
    charge, ``sum_q Pi_q G^dagger W~ G Pi_q``.
    """
    p, cs = c.source, c.source.cs
    party = cheat.party
    (d_priv,) = cheat.shape
    shape = (d_priv,) * len(cs)
    space = move_space(cs, shape, p.shape_m, party)
    g = _embedding(cs, space, {q: 0 for q in range(len(cs))}, d_priv, c.tag_offsets, c.message_dim)
    moves = tuple(project_to_tag(space, g.T @ w @ g, "invariant") for w in cheat.moves)
    return Strategy(party, shape, cheat.xi, moves, None, honest=False, tag="preserves-opponent")


def translate_cheat_to_uworld(c, cheat):
    """U-world strategy in ``c.target`` equivalent to an I-world ``cheat`` in ``c.source``."""
    p, cs = c.source, c.source.cs
    shape = normalize_shape(cs, cheat.shape)
    offs, d_priv = _offsets(shape)
    f = _embedding(cs, move_space(cs, shape, p.shape_m, cheat.party), offs, d_priv, c.tag_offsets, c.message_dim)
    xi = np.zeros(d_priv, dtype=complex)
    t = cs.trivial
    xi[offs[t] : offs[t] + shape[t]] = cheat.xi
    return Strategy(cheat.party, (d_priv,), xi, tuple(_sandwich(f, w) for w in cheat.moves), None, tag="unrestricted")


def random_uworld_cheat(c, party, rng, private_dim=None, rounds=None):
    """Random contractions on the target move space; generally violate the message format."""
    d = int(private_dim or rng.integers(1, 4))
    dim = d * c.message_dim
    moves = tuple(random_contraction(dim, dim, rng) for _ in range(rounds or c.source.rounds))
    return Strategy(party, (d,), random_state(d, rng), moves, None, tag="unrestricted")


# Abelian reduction of a nontrivially charged start ------------------------------------


def _is_abelian(cs):
    return cs.fusion.max(initial=0) <= 1 and bool(np.all(cs.fusion.sum(axis=2) <= 1))


def _shift_map(cs, c):
    out = {}
    for q in range(len(cs)):
        hits = np.nonzero(cs.fusion[q, c])[0]
        if len(hits):
            out[q] = int(hits[0])
    return out


def _relabel(cs, old_space, new_space, f, w):
    old_ids, new_ids = [], []
    for b in old_space.blocks:
        q, qm = b.charges
        if q not in f or b.total not in f:
            raise TruncationError(f"charge {cs.labels[q]} leaves the truncated range when relabelled")
        nb = new_space.block((f[q], qm), f[b.total])
        old_ids.append(np.arange(b.offset, b.offset + b.size))
        new_ids.append(np.arange(nb.offset, nb.offset + nb.size))
    old_ids, new_ids = np.concatenate(old_ids), np.concatenate(new_ids)
    if len(new_ids) != new_space.dim:
        raise TruncationError("relabelled move space gains sectors with no counterpart")
    out = np.zeros((new_space.dim, new_space.dim), dtype=complex)
    out[np.ix_(new_ids, new_ids)] = w[np.ix_(old_ids, old_ids)]
    return out


def reduce_total_charge(p):
    """Equivalent game with trivial total charge, for abelian charge systems.

    Each player whose initial state carries charge ``q0`` is given a
    compensating charge ``dual(q0)`` fused into the private system; with
    one-dimensional fusion spaces this is a relabelling ``q -> q * dual(q0)``
    of that player's sectors and of the totals its moves act on.
    """
    cs = p.cs
    if p.trivial_total:
        return p
    if not _is_abelian(cs):
        raise UnsupportedError("the relabelling reduction needs one-dimensional fusion spaces (abelian charges)")
    out = {}
    for party, q0, shape, moves, meas in (
        ("A", p.charge_a, p.shape_a, p.alice_moves, p.alice_measure),
        ("B", p.charge_b, p.shape_b, p.bob_moves, p.bob_measure),
    ):
        f = _shift_map(cs, cs.dual[q0])
        new_shape = [0] * len(cs)
        for q, d in enumerate(shape):
            if d:
                if q not in f:
                    raise TruncationError(f"charge {cs.labels[q]} leaves the truncated range when relabelled")
                new_shape[f[q]] = d
        old = move_space(cs, shape, p.shape_m, party)
        new = move_space(cs, new_shape, p.shape_m, party)
        out[party] = (
            tuple(new_shape),
            tuple(_relabel(cs, old, new, f, w) for w in moves),
            tuple(_relabel(cs, old, new, f, e) for e in meas),
        )
    (sa, ma, ea), (sb, mb, eb) = out["A"], out["B"]
    return Protocol(cs, p.rounds, sa, sb, p.shape_m, p.xi_a, p.xi_b, p.xi_m, ma, mb, ea, eb, name=f"{p.name}/reduced")


# Color picture and the reference lift ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class ColorGame:
    """Single-charge game whose systems carry explicit representations of a finite group."""

    protocol: Protocol
    rep_a: RepSpace = field(repr=False)
    rep_b: RepSpace = field(repr=False)
    rep_m: RepSpace = field(repr=False)

    @property
    def group(self):
        return self.rep_a.group

    def rep(self, party):
        return self.rep_a if party == "A" else self.rep_b

    def move_rep(self, party):
        return self.rep(party).tensor(self.rep_m)


def _invariant_vector(rep, rng):
    proj = rep.mats.mean(axis=0)
    v = proj @ random_state(rep.dim, rng)
    n = np.linalg.norm(v)
    if n < 1e-8:
        raise ValidationError("representation has no invariant vector")
    return v / n


def _random_hermitian(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + dagger(g)) / 2


def _invariant_unitary(rep, rng):
    return scipy.linalg.expm(1j * twirl(rep, _random_hermitian(rep.dim, rng)))


def _invariant_measurement(rep_own, d_m, rng):
    w, v = np.linalg.eigh(twirl(rep_own, _random_hermitian(rep_own.dim, rng)))
    pos = v[:, w > 0]
    e0 = np.kron(pos @ dagger(pos), np.eye(d_m))
    return (e0, np.eye(e0.shape[0]) - e0)


def random_color_game(group, rng, rounds=None, max_mult=1):
    """Random invariant game; every system contains the trivial charge at least once.

    The message also carries at least one nontrivial irrep, so non-invariant
    moves exist for both players.
    """
    irreps = irreps_of(build_group(group))
    rounds = int(rounds if rounds is not None else rng.integers(1, 4))

    def rep(colored=False):
        mult = {q: int(rng.integers(0, max_mult + 1)) for q in range(len(irreps))}
        mult[irreps.trivial] = max(1, mult[irreps.trivial])
        others = [q for q in mult if q != irreps.trivial]
        if colored and others and not any(mult[q] for q in others):
            mult[others[int(rng.integers(len(others)))]] = 1
        return RepSpace.from_charges(irreps, mult)

    ra, rb, rm = rep(), rep(), rep(colored=True)
    ram, rbm = ra.tensor(rm), rb.tensor(rm)
    p = Protocol(
        trivial_system(),
        rounds,
        (ra.dim,),
        (rb.dim,),
        (rm.dim,),
        _invariant_vector(ra, rng),
        _invariant_vector(rb, rng),
        _invariant_vector(rm, rng),
        tuple(_invariant_unitary(ram, rng) for _ in range(rounds)),
        tuple(_invariant_unitary(rbm, rng) for _ in range(rounds)),
        _invariant_measurement(ra, rm.dim, rng),
        _invariant_measurement(rb, rm.dim, rng),
        name=f"color-{irreps.group.name}",
    )
    return ColorGame(p, ra, rb, rm)


def random_color_cheat(game, party, rng):
    """Non-invariant contractions on the cheater's ``(own, M)`` and an arbitrary start."""
    d = game.rep(party).dim
    dim = d * game.rep_m.dim
    moves = tuple(random_contraction(dim, dim, rng) for _ in range(game.protocol.rounds))
    return Strategy(party, (d,), random_state(d, rng), moves, None, tag="unrestricted")


def _preparation_unitary(src, dst):
    """Unitary ``U`` with ``U src = dst`` for unit vectors."""
    d = len(src)

    def frame(v):
        q, _ = np.linalg.qr(np.column_stack([v, np.eye(d, dtype=complex)]))
        q = q[:, :d]
        return q * (np.vdot(q[:, 0], v) / abs(np.vdot(q[:, 0], v)))

    return frame(dst) @ dagger(frame(src))


def lift_cheat_to_iworld_via_reference(game, cheat, cheaters=None):
    """Invariant strategy on ``R (x) own`` reproducing ``cheat``'s effect on the honest player.

    The reference starts in its trivial-charge state, so the whole private
    start is invariant. A non-invariant start of the cheat is folded into the
    first move as a preparation unitary acting on the honest start.
    """
    if cheaters is not None and len(tuple(cheaters)) > 1:
        raise UnsupportedError("the game engine is two-party; several cheaters sharing a reference are out of scope")
    if isinstance(game, Protocol):
        if not game.cs.group_backed:
            raise UnsupportedError(f"charge system {game.cs.name} has no group; the reference lift needs one")
        raise UnsupportedError("lift a ColorGame, which carries the group representations explicitly")
    party = cheat.party
    honest = game.protocol.honest(party)
    if cheat.shape != honest.shape:
        raise ValidationError("the cheat must act on the honest private system and the message")
    ref = fourier_regular(game.group, irreps_of(game.group))
    n = ref.dim
    system = game.move_rep(party)
    d_m = game.rep_m.dim
    xi0 = honest.xi / np.linalg.norm(honest.xi)
    start = _preparation_unitary(xi0, cheat.xi / np.linalg.norm(cheat.xi)) * np.linalg.norm(cheat.xi)
    moves = list(cheat.moves)
    if moves:
        moves[0] = moves[0] @ np.kron(start, np.eye(d_m))
    lifted = tuple(lift_invariant(w, system) for w in moves)
    xi_r = np.full(n, 1 / np.sqrt(n), dtype=complex)
    return Strategy(party, (n * honest.shape[0],), np.kron(xi_r, xi0), lifted, None, tag="invariant")


def lifted_private_rep(game, party):
    """Representation on ``R (x) own`` used by the lifted strategy."""
    ref = fourier_regular(game.group, irreps_of(game.group))
    return RepSpace(game.group, ref.mats).tensor(game.rep(party))


__all__ = [
    "CompiledGame",
    "ColorGame",
    "compile_to_uworld",
    "translate_cheat_to_iworld",
    "translate_cheat_to_uworld",
    "random_uworld_cheat",
    "reduce_total_charge",
    "random_color_game",
    "random_color_cheat",
    "lift_cheat_to_iworld_via_reference",
    "lifted_private_rep",
]
