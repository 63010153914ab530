"""Flavor-only sector spaces, states, operators and their algebras.

A ``SectorSpace`` over parties ``P_1..P_k`` is the direct sum of blocks
``H_{1,q_1} (x) ... (x) H_{k,q_k} (x) V_t^{q_1..q_k}`` over sector tuples
with nonzero fusion into an allowed total ``t``. Color is suppressed. The
multiplicity space ``V`` is an abstract orthonormal label ``mu`` stored as
the last axis of each block; by default its size is the left-fold fusion
count.

States and operators are dense arrays over the flattened space; blocks are
views. The flattening order is: blocks by sector tuple (lexicographic in
charge index), then total, then row-major over ``(flavors..., mu)``.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import ResourceError, SectorError, UnsupportedError, ValidationError
from .linalg import contraction_excess, dagger, null_space, psd_sqrt

NORM_TOL = 1e-12
COMMUTANT_MAX_DIM = 64

INVARIANT = "invariant"
UNRESTRICTED = "unrestricted"
TAGS = (INVARIANT, UNRESTRICTED, "preserves", "local")


@dataclass(frozen=True)
class Block:
    charges: tuple
    total: int
    dims: tuple
    mult: int
    offset: int

    @property
    def shape(self):
        return self.dims + (self.mult,)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def slice(self):
        return slice(self.offset, self.offset + self.size)


class SectorSpace:
    """Direct sum of sector blocks; see the module docstring for the layout.

    ``mult(charges, total)`` overrides the left-fold fusion count; the game
    engine uses this to give both players the same multiplicity labels.
    """

    def __init__(self, cs, shapes, totals=None, parties=None, mult=None):
        from .charges import normalize_shape

        self.cs = cs
        self.shapes = tuple(normalize_shape(cs, s) for s in shapes)
        k = len(self.shapes)
        self.parties = tuple(parties) if parties is not None else tuple("ABCDEFGH"[:k])
        if len(self.parties) != k:
            raise ValidationError("one party name per shape")
        if totals is None:
            totals = range(len(cs))
        elif isinstance(totals, (int, np.integer)):
            totals = (int(totals),)
        self.totals = tuple(sorted(set(int(t) for t in totals)))
        self._mult_fn = mult
        blocks = []
        offset = 0
        support = [[q for q, d in enumerate(s) if d] for s in self.shapes]
        for qs in product(*support):
            for t in self.totals:
                m = self.multiplicity(qs, t)
                if m:
                    dims = tuple(self.shapes[p][q] for p, q in enumerate(qs))
                    b = Block(tuple(qs), t, dims, m, offset)
                    blocks.append(b)
                    offset += b.size
        self.blocks = tuple(blocks)
        self.dim = offset
        self._lookup = {(b.charges, b.total): b for b in blocks}

    def multiplicity(self, charges, total):
        if self._mult_fn is not None:
            return int(self._mult_fn(tuple(charges), total))
        if len(charges) == 1:
            return int(charges[0] == total)
        return int(self.cs.fuse_many(charges)[total])

    @property
    def nparties(self):
        return len(self.shapes)

    def party(self, p):
        if isinstance(p, str):
            if p not in self.parties:
                raise ValidationError(f"no party {p!r}; parties are {self.parties}")
            return self.parties.index(p)
        if not 0 <= p < self.nparties:
            raise ValidationError(f"party index {p} out of range")
        return int(p)

    def block(self, charges, total=None):
        if total is None:
            if len(self.totals) != 1:
                raise SectorError("space has several totals; name one")
            total = self.totals[0]
        try:
            return self._lookup[(tuple(charges), total)]
        except KeyError:
            raise SectorError(f"sector {tuple(charges)} -> {total} is not populated in this space") from None

    def party_grid(self, p):
        """For each charge ``q`` of party ``p``: int array ``idx[r, i]`` of flat indices.

        Row ``r`` runs over everything except party ``p``'s flavor (other
        charges, total, other flavors, ``mu``), in flattening order with
        ``p``'s axis removed. Column ``i`` is party ``p``'s flavor.
        """
        p = self.party(p)
        rows = {}
        for b in self.blocks:
            ids = np.arange(b.offset, b.offset + b.size).reshape(b.shape)
            ids = np.moveaxis(ids, p, -1).reshape(-1, b.dims[p])
            rows.setdefault(b.charges[p], []).append(ids)
        return {q: np.vstack(v) for q, v in rows.items()}

    def total_grid(self):
        out = {}
        for b in self.blocks:
            out.setdefault(b.total, []).append(np.arange(b.offset, b.offset + b.size))
        return {t: np.concatenate(v) for t, v in out.items()}

    def same_layout(self, other):
        return self is other or (
            self.cs is other.cs
            and [(b.charges, b.total, b.dims, b.mult) for b in self.blocks]
            == [(b.charges, b.total, b.dims, b.mult) for b in other.blocks]
        )

    def describe(self):
        lab = self.cs.labels
        return [
            {
                "charges": [lab[q] for q in b.charges],
                "total": lab[b.total],
                "dims": list(b.dims),
                "mult": b.mult,
            }
            for b in self.blocks
        ]

    def __repr__(self):
        return f"SectorSpace({self.cs.name}, parties={self.parties}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class SectorState:
    """Pure, possibly subnormalized state; ``norm2`` is the continue probability."""

    space: SectorSpace
    vec: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=complex).reshape(-1)
        if v.shape[0] != self.space.dim:
            raise SectorError(f"amplitude vector has length {v.shape[0]}, space has dim {self.space.dim}")
        if v @ v.conj() > 1 + NORM_TOL:
            raise SectorError(f"squared norm {float(np.vdot(v, v).real):.17g} exceeds 1")
        object.__setattr__(self, "vec", v)

    @property
    def norm2(self):
        return float(np.vdot(self.vec, self.vec).real)

    def block(self, charges, total=None):
        b = self.space.block(charges, total)
        return self.vec[b.slice].reshape(b.shape)

    def blocks(self):
        return {(b.charges, b.total): self.vec[b.slice].reshape(b.shape) for b in self.space.blocks}

    def overlap(self, other):
        return complex(np.vdot(self.vec, other.vec))

    @classmethod
    def from_blocks(cls, space, blocks):
        """Keys are sector tuples, or ``(tuple, total)`` pairs when the space has several totals.

        A block may omit the trailing ``mu`` axis when the multiplicity is 1.
        """
        v = np.zeros(space.dim, dtype=complex)
        for key, arr in blocks.items():
            if len(key) == 2 and isinstance(key[0], tuple):
                charges, total = key
            else:
                charges, total = tuple(key), None
            b = space.block(charges, total)
            a = np.asarray(arr, dtype=complex)
            if a.shape == b.dims and b.mult == 1:
                a = a[..., None]
            if a.shape != b.shape:
                raise SectorError(f"block {charges}: shape {a.shape}, expected {b.shape}")
            v[b.slice] = a.reshape(-1)
        return cls(space, v)


@dataclass(frozen=True, eq=False)
class SectorOperator:
    """Dense operator between sector spaces with a conservation tag.

    Tags: ``"invariant"`` (block diagonal in the total), ``("preserves", p)``
    (acts as identity on party ``p``'s flavor and keeps its charge),
    ``("local", p)`` (party ``p``'s invariant algebra), ``"unrestricted"``.
    """

    domain: SectorSpace
    codomain: SectorSpace
    matrix: np.ndarray = field(repr=False)
    tag: object = UNRESTRICTED

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise SectorError(f"matrix shape {m.shape} != ({self.codomain.dim}, {self.domain.dim})")
        object.__setattr__(self, "matrix", m)

    def apply(self, state):
        if not state.space.same_layout(self.domain):
            raise SectorError("state does not live in the operator's domain")
        return SectorState(self.codomain, self.matrix @ state.vec)

    def __matmul__(self, other):
        if isinstance(other, SectorState):
            return self.apply(other)
        return SectorOperator(other.domain, self.codomain, self.matrix @ other.matrix, UNRESTRICTED)

    def dagger(self):
        return SectorOperator(self.codomain, self.domain, dagger(self.matrix), self.tag)

    def contraction_excess(self):
        return contraction_excess(self.matrix)

    def tag_residual(self):
        if self.domain is not self.codomain and not self.domain.same_layout(self.codomain):
            return 0.0 if self.tag == UNRESTRICTED else float("inf")
        return tag_residual(self.domain, self.matrix, self.tag)


def _normalize_tag(space, tag):
    if isinstance(tag, str):
        if tag in (INVARIANT, UNRESTRICTED):
            return tag, None
        for kind in ("preserves", "local"):
            if tag.startswith(kind + "-"):
                return kind, space.party(tag.split("-", 1)[1])
        raise ValidationError(f"unknown conservation tag {tag!r}")
    kind, p = tag
    if kind not in ("preserves", "local"):
        raise ValidationError(f"unknown conservation tag {tag!r}")
    return kind, space.party(p)


def project_to_tag(space, m, tag):
    """Orthogonal (Hilbert-Schmidt) projection of ``m`` onto the tagged algebra."""
    kind, p = _normalize_tag(space, tag)
    m = np.asarray(m, dtype=complex)
    if kind == UNRESTRICTED:
        return m.copy()
    out = np.zeros_like(m)
    if kind == INVARIANT:
        for ids in space.total_grid().values():
            out[np.ix_(ids, ids)] = m[np.ix_(ids, ids)]
        return out
    for idx in space.party_grid(p).values():
        rest, d = idx.shape
        sub = m[idx[:, :, None, None], idx[None, None, :, :]]  # sub[r, i, s, j]
        if kind == "preserves":
            core = np.einsum("risi->rs", sub) / d
            out[idx[:, :, None, None], idx[None, None, :, :]] = np.einsum("rs,ij->risj", core, np.eye(d))
        else:
            core = np.einsum("rirj->ij", sub) / rest
            out[idx[:, :, None, None], idx[None, None, :, :]] = np.einsum("rs,ij->risj", np.eye(rest), core)
    return out


def tag_residual(space, m, tag):
    """Largest entry of ``m`` outside the tagged algebra."""
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - project_to_tag(space, m, tag))))


def algebra_basis(space, tag):
    """Hilbert-Schmidt orthonormal basis of the tagged algebra, as a list of matrices."""
    kind, p = _normalize_tag(space, tag)
    d = space.dim
    out = []

    def unit(rows, cols, scale):
        e = np.zeros((d, d), dtype=complex)
        e[rows, cols] = scale
        return e

    if kind == UNRESTRICTED:
        return [unit(i, j, 1.0) for i in range(d) for j in range(d)]
    if kind == INVARIANT:
        for ids in space.total_grid().values():
            out.extend(unit(i, j, 1.0) for i in ids for j in ids)
        return out
    for idx in space.party_grid(p).values():
        rest, n = idx.shape
        if kind == "local":
            out.extend(unit(idx[:, i], idx[:, j], 1 / np.sqrt(rest)) for i in range(n) for j in range(n))
        else:
            out.extend(unit(idx[r], idx[s], 1 / np.sqrt(n)) for r in range(rest) for s in range(rest))
    return out


def _as_stack(basis):
    if isinstance(basis, np.ndarray) and basis.ndim == 3:
        return basis.astype(complex)
    mats = [b.matrix if isinstance(b, SectorOperator) else np.asarray(b, dtype=complex) for b in basis]
    return np.stack(mats) if mats else np.zeros((0, 0, 0), dtype=complex)


def commutant(basis, dim=None, threshold=1e-8):
    """Orthonormal basis of ``{X : [X, B] = 0 for all B in basis}``.

    The constraints ``X B - B X`` are linear in ``vec(X)``; the commutant is
    their null space. Small systems use a direct SVD, larger ones the Gram
    matrix, whose eigenvalues are squared singular values.
    """
    stack = _as_stack(basis)
    d = stack.shape[1] if stack.size else dim
    if d is None:
        raise ValidationError("empty basis needs an explicit dim")
    if d > COMMUTANT_MAX_DIM:
        raise ResourceError(f"commutant of a {d}-dim space exceeds the cap of {COMMUTANT_MAX_DIM}")
    k = len(stack)
    eye = np.eye(d)
    if k == 0:
        return [e.astype(complex) for e in np.eye(d * d).reshape(-1, d, d)]
    if k * d**4 <= 4_000_000:
        # Row-major vec: vec(X B) = (I (x) B^T) vec X, vec(B X) = (B (x) I) vec X.
        c = np.concatenate([np.kron(eye, b.T) - np.kron(b, eye) for b in stack])
        ns = null_space(c, threshold)
    else:
        flat = stack.reshape(k, d * d)
        bb = (flat.T @ flat.conj()).reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
        bdb = np.einsum("kji,kjl->il", stack.conj(), stack)  # sum B^dagger B
        bbt = np.einsum("kij,klj->il", stack.conj(), stack)  # sum conj(B) B^T
        gram = np.kron(eye, bbt) + np.kron(bdb, eye) - bb - dagger(bb)
        w, v = np.linalg.eigh((gram + dagger(gram)) / 2)
        # Eigenvalues carry roundoff of order eps * ||G||, far above threshold**2.
        ns = v[:, w <= 1e-10 * max(1.0, w[-1])]
    return [ns[:, i].reshape(d, d) for i in range(ns.shape[1])]


def span_containment(a, b):
    """Largest distance of a unit operator in span(a) from span(b) (Hilbert-Schmidt)."""
    from .linalg import span_residual

    sa, sb = _as_stack(a), _as_stack(b)
    if len(sa) == 0:
        return 0.0
    va = sa.reshape(len(sa), -1).T
    vb = sb.reshape(len(sb), -1).T if len(sb) else np.zeros((va.shape[0], 0), dtype=complex)
    return span_residual(va, vb)


def span_dim(a, threshold=1e-8):
    s = _as_stack(a)
    if len(s) == 0:
        return 0
    sv = np.linalg.svd(s.reshape(len(s), -1), compute_uv=False)
    return int(np.sum(sv > threshold))


# -- reduced states and purification ----------------------------------------


def reduced_density(state, keep):
    """Blocks ``{q: rho_q}`` of party ``keep``'s flavor density, everything else traced."""
    grid = state.space.party_grid(keep)
    out = {}
    for q, idx in grid.items():
        x = state.vec[idx]
        out[q] = x.T @ x.conj()
    return out


def partial_trace(state, party):
    """Trace out ``party``.

    Two-party states give one block per remaining charge. For three or more
    parties only the last party can be traced (blocks keyed by the fused
    charge of the rest), since other orders would need recoupling data.
    """
    sp = state.space
    p = sp.party(party)
    if sp.nparties < 2:
        raise ValidationError("partial trace needs at least two parties")
    if sp.nparties == 2:
        return reduced_density(state, 1 - p)
    if p != sp.nparties - 1 or sp._mult_fn is not None:
        raise UnsupportedError("only the last party of a left-fold space can be traced out")
    cs = sp.cs
    rest = SectorSpace(cs, sp.shapes[:-1], parties=sp.parties[:-1])
    acc = {x: np.zeros((rest.dim, rest.dim), dtype=complex) for x in rest.totals}
    for b in sp.blocks:
        psi = state.vec[b.slice].reshape(b.shape)
        mu = 0
        for x in range(len(cs)):
            m_in = rest.multiplicity(b.charges[:-1], x) if x in rest.totals else 0
            m_out = cs.N(x, b.charges[-1], b.total)
            width = m_in * m_out
            if not width:
                continue
            rb = rest.block(b.charges[:-1], x)
            part = psi[..., mu : mu + width].reshape(b.dims + (m_in, m_out))
            part = np.moveaxis(part, len(b.dims) - 1, -2)  # (..., m_in, d_last, m_out)
            flat = part.reshape(rb.size, -1)
            acc[x][rb.slice, rb.slice] += flat @ dagger(flat)
            mu += width
    out = {}
    for x, m in acc.items():
        ids = rest.total_grid().get(x)
        if ids is not None:
            out[x] = m[np.ix_(ids, ids)]
    return out


def decohere(rho, sizes):
    """Charge twirl in the flavor picture: keep only the diagonal charge blocks.

    ``sizes`` lists the block sizes along the diagonal of the dense ``rho``.
    """
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    o = 0
    for s in sizes:
        out[o : o + s, o : o + s] = rho[o : o + s, o : o + s]
        o += s
    return out


def blocks_from_dense(rho, shape, tol=1e-10):
    """Split a dense single-party operator into charge blocks; off-diagonal blocks must vanish."""
    rho = np.asarray(rho, dtype=complex)
    offs, o = {}, 0
    for q, d in enumerate(shape):
        if d:
            offs[q] = slice(o, o + d)
            o += d
    if rho.shape != (o, o):
        raise SectorError(f"operator shape {rho.shape} does not match the sector shape (dim {o})")
    for q, sq in offs.items():
        for r, sr in offs.items():
            if q != r and rho[sq, sr].size and np.max(np.abs(rho[sq, sr])) > tol:
                raise SectorError(f"operator mixes charges {q} and {r}: not invariant")
    return {q: rho[s, s] for q, s in offs.items()}


def purify_with_conjugate(cs, rho, parties=("A", "P")):
    """Trivially charged purification of invariant density blocks ``{q: rho_q}``.

    The purifier holds charge ``dual(q)`` with the same flavor dimension as
    ``rho_q``; the block amplitude is ``sqrt(rho_q)``, so tracing out the
    purifier gives back ``rho_q``.
    """
    if not isinstance(rho, dict):
        raise SectorError("pass density blocks; use blocks_from_dense for a dense operator")
    rho = {q: np.asarray(r, dtype=complex) for q, r in rho.items()}
    shape = [0] * len(cs)
    pur = [0] * len(cs)
    for q, r in rho.items():
        shape[q] = r.shape[0]
        pur[cs.dual[q]] = r.shape[0]
    space = SectorSpace(cs, [shape, pur], totals=cs.trivial, parties=parties)
    blocks = {(q, cs.dual[q]): psd_sqrt(r) for q, r in rho.items() if r.shape[0]}
    return SectorState.from_blocks(space, blocks)


def dense_from_blocks(blocks, shape):
    """Inverse of ``blocks_from_dense``."""
    n = sum(shape)
    out = np.zeros((n, n), dtype=complex)
    o = 0
    for q, d in enumerate(shape):
        if d:
            if q in blocks:
                out[o : o + d, o : o + d] = blocks[q]
            o += d
    return out
