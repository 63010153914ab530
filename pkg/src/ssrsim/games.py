"""Two-party alternating quantum games with abort semantics.

The joint state lives in ``H_A (x) H_B (x) H_M`` restricted to trivial total
charge and is kept as a dense, possibly subnormalized vector; its squared norm
is the probability that nobody has aborted. Round ``k`` is Alice's move
followed by Bob's move. A move is a contraction on the mover's private space
and the message, written on the flavor space ``SectorSpace([own, M])`` with
every total; the block of total ``x`` acts on the joint sector where the
opponent holds ``dual(x)``.

Final measurements are projector lists on the same (own, message) space, so
a party that must inspect the last message before measuring can say so. For
a measurement of the private system alone use :func:`private_projector`.

Multiplicity labels: the joint block ``(q_A, q_B, q_M)`` carries
``N[q_A, q_M, dual(q_B)]`` labels, read by Alice as the labels of her
``A (x) M -> dual(q_B)`` fusion and by Bob as those of ``B (x) M -> dual(q_A)``.
Both counts must agree, which holds for every bundled system.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .charges import normalize_shape, trivial_system
from .errors import NontrivialChargeError, ResourceError, ValidationError
from .linalg import contraction_excess, dagger, random_state, random_unitary
from .sectors import SectorSpace, tag_residual

MAX_JOINT_DIM = 4096
TOL = 1e-10
PARTIES = ("A", "B")


def _other(party):
    return "B" if party == "A" else "A"


def _check_party(party):
    if party not in PARTIES:
        raise ValidationError(f"party must be 'A' or 'B', got {party!r}")


def move_space(cs, shape_own, shape_m, party="A"):
    """Flavor space of the mover's private system and the message, all totals."""
    return SectorSpace(cs, [shape_own, shape_m], parties=(party, "M"))


def private_projector(space, blocks):
    """``E (x) I_M`` on a move space from per-charge private blocks ``{q: E_q}``."""
    own = space.parties[0]
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for q, idx in space.party_grid(own).items():
        e = np.asarray(blocks.get(q, np.zeros((idx.shape[1],) * 2)), dtype=complex)
        if e.shape != (idx.shape[1],) * 2:
            raise ValidationError(f"private block for charge {q} has shape {e.shape}, expected {(idx.shape[1],) * 2}")
        rows = idx.shape[0]
        out[idx[:, :, None, None], idx[None, None, :, :]] = np.einsum("rs,ij->risj", np.eye(rows), e)
    return out


@dataclass(frozen=True, eq=False)
class Strategy:
    """One player's behaviour: private shape, initial vector, moves and final measurement.

    ``xi`` lives in the trivial-charge sector of the private space and has
    length ``shape[trivial]``. ``measurement`` may be ``None`` for a cheater,
    whose outcomes are never reported.
    """

    party: str
    shape: tuple
    xi: np.ndarray = field(repr=False)
    moves: tuple = field(repr=False)
    measurement: tuple = field(default=None, repr=False)
    honest: bool = False
    tag: str = "preserves-opponent"

    def __post_init__(self):
        _check_party(self.party)
        object.__setattr__(self, "shape", tuple(int(d) for d in self.shape))
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=complex).ravel())
        object.__setattr__(self, "moves", tuple(np.asarray(w, dtype=complex) for w in self.moves))
        if self.measurement is not None:
            object.__setattr__(self, "measurement", tuple(np.asarray(e, dtype=complex) for e in self.measurement))


@dataclass(frozen=True, eq=False)
class Protocol:
    """An honest two-party game. ``world`` is ``"U"`` for a single-charge system."""

    cs: object
    rounds: int
    shape_a: tuple
    shape_b: tuple
    shape_m: tuple
    xi_a: np.ndarray = field(repr=False)
    xi_b: np.ndarray = field(repr=False)
    xi_m: np.ndarray = field(repr=False)
    alice_moves: tuple = field(repr=False)
    bob_moves: tuple = field(repr=False)
    alice_measure: tuple = field(repr=False)
    bob_measure: tuple = field(repr=False)
    name: str = "protocol"
    charge_a: int = None  # initial private charges; None means trivial
    charge_b: int = None

    def __post_init__(self):
        t = self.cs.trivial
        object.__setattr__(self, "charge_a", t if self.charge_a is None else int(self.charge_a))
        object.__setattr__(self, "charge_b", t if self.charge_b is None else int(self.charge_b))
        for key in ("shape_a", "shape_b", "shape_m"):
            object.__setattr__(self, key, normalize_shape(self.cs, getattr(self, key)))
        for key in ("xi_a", "xi_b", "xi_m"):
            object.__setattr__(self, key, np.asarray(getattr(self, key), dtype=complex).ravel())
        for key in ("alice_moves", "bob_moves", "alice_measure", "bob_measure"):
            object.__setattr__(self, key, tuple(np.asarray(w, dtype=complex) for w in getattr(self, key)))
        if len(self.alice_moves) != self.rounds or len(self.bob_moves) != self.rounds:
            raise ValidationError(f"need {self.rounds} moves per player")
        for key, shape, q in (
            ("xi_a", self.shape_a, self.charge_a),
            ("xi_b", self.shape_b, self.charge_b),
            ("xi_m", self.shape_m, t),
        ):
            if getattr(self, key).shape != (shape[q],):
                raise ValidationError(f"{key} must have length {shape[q]} (its initial charge sector)")
            if abs(np.linalg.norm(getattr(self, key)) - 1) > 1e-12:
                raise ValidationError(f"{key} is not normalized")

    @property
    def trivial_total(self):
        t = self.cs.trivial
        return self.charge_a == t and self.charge_b == t

    @property
    def world(self):
        return "U" if len(self.cs) == 1 else "I"

    def shape(self, party):
        return self.shape_a if party == "A" else self.shape_b

    def honest(self, party):
        _check_party(party)
        if party == "A":
            return Strategy("A", self.shape_a, self.xi_a, self.alice_moves, self.alice_measure, honest=True)
        return Strategy("B", self.shape_b, self.xi_b, self.bob_moves, self.bob_measure, honest=True)


@dataclass(frozen=True)
class OutcomeDistribution:
    """``probs`` is a joint table ``[a, b]`` when both play honestly, else the honest party's vector."""

    probs: np.ndarray
    party: str  # "joint", "A" or "B"

    @property
    def total(self):
        return float(np.sum(self.probs))

    @property
    def abort(self):
        return 1.0 - self.total

    def marginal(self, party):
        if self.party == party:
            return self.probs
        if self.party != "joint":
            raise ValidationError(f"distribution only reports party {self.party}")
        return self.probs.sum(axis=1 if party == "A" else 0)

    def deviation(self, other, party=None):
        """Max absolute difference of outcome probabilities and of the abort probability."""
        party = party or (self.party if self.party != "joint" else other.party)
        if party == "joint":
            a, b = self.probs, other.probs
        else:
            a, b = self.marginal(party), other.marginal(party)
        if a.shape != b.shape:
            raise ValidationError(f"outcome tables differ in shape: {a.shape} vs {b.shape}")
        return float(max(np.max(np.abs(a - b), initial=0.0), abs(self.abort - other.abort)))

    def to_dict(self):
        return {"party": self.party, "probabilities": np.asarray(self.probs).tolist(), "abort": self.abort}


def joint_space(cs, shape_a, shape_b, shape_m):
    """Trivial-total space of ``A B M`` with Alice's view of the multiplicity labels."""
    dual = cs.dual

    def mult(qs, total):
        qa, qb, qm = qs
        n_a = cs.N(qa, qm, dual[qb])
        if n_a != cs.N(qb, qm, dual[qa]):
            raise ValidationError(
                f"fusion counts for sector {[cs.labels[q] for q in qs]} differ between the players' views"
            )
        return n_a

    space = SectorSpace(cs, [shape_a, shape_b, shape_m], totals=cs.trivial, parties=("A", "B", "M"), mult=mult)
    if space.dim > MAX_JOINT_DIM:
        raise ResourceError(f"joint dimension {space.dim} exceeds the dense limit {MAX_JOINT_DIM}")
    return space


class _Runner:
    """Evolution of one joint state; builds the index maps once per strategy pair."""

    def __init__(self, p, alice, bob):
        self.p = p
        cs = p.cs
        if not p.trivial_total:
            raise NontrivialChargeError(
                "initial state carries nontrivial charge; reduce it first (compiler.reduce_total_charge)"
            )
        self.players = {"A": alice, "B": bob}
        for s, party in ((alice, "A"), (bob, "B")):
            if s.party != party:
                raise ValidationError(f"strategy for {s.party} given in the {party} seat")
        sa = normalize_shape(cs, alice.shape)
        sb = normalize_shape(cs, bob.shape)
        self.joint = joint_space(cs, sa, sb, p.shape_m)
        self.spaces = {"A": move_space(cs, sa, p.shape_m, "A"), "B": move_space(cs, sb, p.shape_m, "B")}
        self.maps = {}
        for party in PARTIES:
            s, space = self.players[party], self.spaces[party]
            if s.xi.shape != (space.shapes[0][cs.trivial],):
                raise ValidationError(f"initial vector of {party} has the wrong length")
            if np.linalg.norm(s.xi) > 1 + 1e-12:
                raise ValidationError(f"initial vector of {party} has norm above 1")
            if len(s.moves) != p.rounds:
                raise ValidationError(f"{party} supplies {len(s.moves)} moves for {p.rounds} rounds")
            for k, w in enumerate(s.moves):
                self._check_move(party, w, f"round {k + 1}")
            grid = space.total_grid()
            opp = self.joint.party_grid(_other(party))
            self.maps[party] = [(opp[qo], grid[cs.dual[qo]]) for qo in opp]

    def _check_move(self, party, w, where):
        space = self.spaces[party]
        if w.shape != (space.dim, space.dim):
            raise ValidationError(f"{party} {where}: map has shape {w.shape}, move space has dim {space.dim}")
        exc = contraction_excess(w)
        if exc > TOL:
            raise ValidationError(f"{party} {where}: not a contraction (W^dagger W exceeds I by {exc:.3g})")
        res = tag_residual(space, w, "invariant")
        if res > TOL:
            raise ValidationError(f"{party} {where}: changes the opponent's charge (residual {res:.3g})")

    def initial(self):
        p, t = self.p, self.p.cs.trivial
        b = self.joint.block((t, t, t))
        psi = np.zeros(self.joint.dim, dtype=complex)
        xa, xb = self.players["A"].xi, self.players["B"].xi
        psi[b.slice] = np.einsum("a,b,m->abm", xa, xb, p.xi_m).ravel()
        return psi

    def apply(self, party, w, psi):
        out = psi.copy()
        for rows, cols in self.maps[party]:
            out[rows] = w[np.ix_(cols, cols)] @ psi[rows]
        return out

    def run(self):
        psi = self.initial()
        for k in range(self.p.rounds):
            psi = self.apply("A", self.players["A"].moves[k], psi)
            psi = self.apply("B", self.players["B"].moves[k], psi)
        return psi

    def measure(self, party, psi):
        effects = self.players[party].measurement
        if effects is None:
            raise ValidationError(f"party {party} has no final measurement")
        for k, e in enumerate(effects):
            self._check_move(party, e, f"measurement {k}")
        return [self.apply(party, e, psi) for e in effects]


def run_game(p, alice=None, bob=None):
    """Outcome distribution of ``p`` with the given strategies (honest by default)."""
    alice = alice or p.honest("A")
    bob = bob or p.honest("B")
    runner = _Runner(p, alice, bob)
    psi = runner.run()
    if alice.honest and bob.honest:
        branches = runner.measure("A", psi)
        table = np.array([[np.vdot(x, x).real for x in runner.measure("B", b)] for b in branches])
        return OutcomeDistribution(table, "joint")
    if alice.honest == bob.honest:
        raise ValidationError("at most one player may deviate when outcomes are reported")
    party = "A" if alice.honest else "B"
    probs = np.array([np.vdot(x, x).real for x in runner.measure(party, psi)])
    return OutcomeDistribution(probs, party)


def final_state(p, alice=None, bob=None):
    """Joint vector after the last round, with its ``SectorSpace``."""
    runner = _Runner(p, alice or p.honest("A"), bob or p.honest("B"))
    return runner.run(), runner.joint


def validate_strategy(p, s, world=None):
    """Report contraction and (I-world) conservation violations without raising."""
    world = world or p.world
    space = move_space(p.cs, s.shape, p.shape_m, s.party)
    violations = []
    worst_c = worst_q = 0.0
    maps = [(f"round {k + 1}", w) for k, w in enumerate(s.moves)]
    maps += [(f"measurement {k}", e) for k, e in enumerate(s.measurement or ())]
    if len(s.moves) != p.rounds:
        violations.append({"kind": "rounds", "where": "moves", "value": len(s.moves)})
    for where, w in maps:
        if w.shape != (space.dim, space.dim):
            violations.append({"kind": "shape", "where": where, "value": list(w.shape)})
            continue
        exc = contraction_excess(w)
        worst_c = max(worst_c, exc)
        if exc > TOL:
            violations.append({"kind": "contraction", "where": where, "value": exc})
        if world == "I":
            res = tag_residual(space, w, "invariant")
            worst_q = max(worst_q, res)
            if res > TOL:
                violations.append({"kind": "conservation", "where": where, "value": res})
    return {
        "party": s.party,
        "world": world,
        "clean": not violations,
        "contraction_excess": worst_c,
        "conservation_residual": worst_q,
        "violations": violations,
    }


def strategies_equivalent(p1, s1, p2, s2, opponents=None, tol=1e-10):
    """Compare the honest opponent's distribution (abort included) across two games."""
    if s1.party != s2.party:
        raise ValidationError("strategies must belong to the same seat")
    opp = _other(s1.party)
    o1, o2 = opponents or (p1.honest(opp), p2.honest(opp))

    def seat(p, s, o):
        return run_game(p, alice=s, bob=o) if s.party == "A" else run_game(p, alice=o, bob=s)

    d1, d2 = seat(p1, s1, o1), seat(p2, s2, o2)
    dev = d1.deviation(d2, opp)
    return dev <= tol, dev


def scaled(s, factors):
    """Copy of ``s`` with move ``k`` multiplied by ``factors[k]`` (marks it dishonest)."""
    return replace(s, moves=tuple(c * w for c, w in zip(factors, s.moves)), honest=False)


def cheat(p, party, moves, xi=None, shape=None):
    """Dishonest strategy sharing the honest private shape unless ``shape`` is given."""
    s = p.honest(party)
    return Strategy(
        party,
        shape if shape is not None else s.shape,
        s.xi if xi is None else xi,
        moves,
        s.measurement if shape is None else None,
    )


def random_invariant_unitary(space, rng):
    u = np.zeros((space.dim, space.dim), dtype=complex)
    for ids in space.total_grid().values():
        u[np.ix_(ids, ids)] = random_unitary(len(ids), rng)
    return u


def random_private_measurement(space, rng):
    """Two-outcome measurement ``{E, I - E}`` with ``E`` a random projector per private charge."""
    blocks = {}
    for q, d in enumerate(space.shapes[0]):
        if d:
            v = random_unitary(d, rng)[:, : rng.integers(0, d + 1)]
            blocks[q] = v @ dagger(v)
    e0 = private_projector(space, blocks)
    return (e0, np.eye(space.dim) - e0)


def random_shape(cs, rng, max_dim=3, zero_prob=0.3):
    shape = [int(rng.integers(1, max_dim + 1)) if rng.random() > zero_prob else 0 for _ in range(len(cs))]
    shape[cs.trivial] = max(shape[cs.trivial], 1)
    return tuple(shape)


def random_protocol(cs, rng, rounds=None, max_dim=3, name="random"):
    """Honest game with Haar-random conserving unitaries and random private measurements."""
    rounds = int(rounds if rounds is not None else rng.integers(1, 4))
    sa, sb, sm = (random_shape(cs, rng, max_dim) for _ in range(3))
    spa, spb = move_space(cs, sa, sm, "A"), move_space(cs, sb, sm, "B")
    t = cs.trivial
    return Protocol(
        cs,
        rounds,
        sa,
        sb,
        sm,
        random_state(sa[t], rng),
        random_state(sb[t], rng),
        random_state(sm[t], rng),
        tuple(random_invariant_unitary(spa, rng) for _ in range(rounds)),
        tuple(random_invariant_unitary(spb, rng) for _ in range(rounds)),
        random_private_measurement(spa, rng),
        random_private_measurement(spb, rng),
        name=name,
    )


def trivial_protocol(outcomes=2, rounds=1):
    """Single-charge game that starts in ``|0>`` and never moves; measures ``|k><k|``."""
    cs = trivial_system()
    e0 = np.zeros(outcomes)
    e0[0] = 1
    eye = np.eye(outcomes)
    meas = tuple(np.diag(eye[k]) for k in range(outcomes))
    return Protocol(cs, rounds, (outcomes,), (outcomes,), (1,), e0, e0, [1.0],
                    (eye,) * rounds, (eye,) * rounds, meas, meas, name="trivial")
