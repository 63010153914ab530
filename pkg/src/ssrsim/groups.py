"""Finite groups as Cayley tables, with explicit unitary irreps for built-ins.

Built-in groups and their fixed element orderings:

``z<n>``
    element ``k`` is the residue ``k``; irrep ``q`` maps ``k`` to ``exp(2 pi i qk/n)``.
``s3``
    permutations of ``(0, 1, 2)`` in lexicographic order; the product
    ``g*h`` applies ``h`` first. Irreps ``1``, ``1'`` (sign), ``2`` (standard).
``d4``
    element ``k + 4m`` is ``r^k s^m`` (rotation by 90 degrees, reflection).
    Irreps ``A1 A2 B1 B2 E``.
``q8``
    ``1, -1, i, -i, j, -j, k, -k``. Irreps ``1``, ``1i``, ``1j``, ``1k``
    (kernel contains the named element) and the 2-dim spinor ``2``.

Irreps of user-supplied tables are never synthesised.
"""

from dataclasses import dataclass, field
from itertools import permutations
import json
import re

import numpy as np

from . import _kernels
from .errors import GroupAxiomError, InconsistentIrrepsError, SchemaError, UnsupportedGroupError

BUILTIN_NAMES = ("z<n>", "s3", "d4", "q8")


@dataclass(frozen=True, eq=False)
class GroupTable:
    table: np.ndarray
    inverse: np.ndarray
    identity: int
    name: str | None = None
    labels: tuple = ()

    @property
    def order(self):
        return self.table.shape[0]

    def mul(self, a, b):
        return int(self.table[a, b])

    def inv(self, a):
        return int(self.inverse[a])

    def conjugacy_classes(self):
        seen = set()
        classes = []
        for a in range(self.order):
            if a in seen:
                continue
            cls = sorted({self.mul(self.mul(g, a), self.inv(g)) for g in range(self.order)})
            seen.update(cls)
            classes.append(tuple(cls))
        return classes

    def left_regular(self, g):
        """Permutation matrix of ``|phi> -> |g phi>``."""
        n = self.order
        p = np.zeros((n, n))
        p[self.table[g, :], np.arange(n)] = 1.0
        return p

    def right_regular(self, h):
        """Permutation matrix of ``|phi> -> |phi h^-1>``."""
        n = self.order
        p = np.zeros((n, n))
        p[self.table[:, self.inv(h)], np.arange(n)] = 1.0
        return p

    def __repr__(self):
        return f"GroupTable(name={self.name!r}, order={self.order})"


@dataclass(frozen=True, eq=False)
class Irrep:
    label: str
    matrices: np.ndarray  # (n_G, dim, dim)

    @property
    def dim(self):
        return self.matrices.shape[1]

    @property
    def character(self):
        return np.trace(self.matrices, axis1=1, axis2=2)


@dataclass(frozen=True, eq=False)
class IrrepSet:
    group: GroupTable
    irreps: tuple
    trivial: int
    conjugate: tuple
    characters: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.irreps)

    def __iter__(self):
        return iter(self.irreps)

    def __getitem__(self, q):
        return self.irreps[q]

    @property
    def labels(self):
        return tuple(r.label for r in self.irreps)

    @property
    def dims(self):
        return tuple(r.dim for r in self.irreps)

    def index(self, label):
        return self.labels.index(str(label))


def validate_table(table):
    """Check the group axioms; return ``(inverse, identity)`` or raise GroupAxiomError."""
    t = np.asarray(table)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
        raise GroupAxiomError("shape", f"table must be square and non-empty, got shape {t.shape}")
    if not np.issubdtype(t.dtype, np.integer):
        if not np.all(np.equal(np.mod(t, 1), 0)):
            raise GroupAxiomError("shape", "entries must be integers")
        t = t.astype(np.int64)
    n = t.shape[0]
    if t.min() < 0 or t.max() >= n:
        raise GroupAxiomError("closure", f"entries must lie in 0..{n - 1}")
    ar = np.arange(n)
    ids = [e for e in range(n) if np.array_equal(t[e], ar) and np.array_equal(t[:, e], ar)]
    if not ids:
        raise GroupAxiomError("identity", "no element e with e*a = a*e = a for all a")
    e = ids[0]
    inverse = np.full(n, -1, dtype=np.int64)
    for a in range(n):
        hits = np.flatnonzero((t[a] == e) & (t[:, a] == e))
        if len(hits) == 0:
            raise GroupAxiomError("inverse", f"element {a} has no two-sided inverse")
        inverse[a] = hits[0]
    bad = _kernels.associativity_violation(t)
    if bad[0] >= 0:
        a, b, c = map(int, bad)
        raise GroupAxiomError("associativity", f"({a}*{b})*{c} != {a}*({b}*{c})")
    return t.astype(np.int64), inverse, e


def _table_from_products(elements, product, same):
    n = len(elements)
    table = np.zeros((n, n), dtype=np.int64)
    for a, x in enumerate(elements):
        for b, y in enumerate(elements):
            z = product(x, y)
            table[a, b] = next(i for i, w in enumerate(elements) if same(w, z))
    return table


def _cyclic(n):
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    labels = tuple(str(k) for k in range(n))
    k = np.arange(n)
    irreps = [
        (str(q), np.exp(2j * np.pi * q * k / n).reshape(n, 1, 1)) for q in range(n)
    ]
    return table, labels, irreps


def _s3():
    perms = list(permutations(range(3)))
    table = _table_from_products(perms, lambda s, t: tuple(s[t[i]] for i in range(3)), lambda a, b: a == b)
    pm = np.zeros((6, 3, 3))
    for k, s in enumerate(perms):
        pm[k, list(s), [0, 1, 2]] = 1.0
    basis = np.array([[1, 1], [-1, 1], [0, -2]]) / np.array([np.sqrt(2), np.sqrt(6)])
    std = np.einsum("ia,kij,jb->kab", basis, pm, basis)
    sign = np.linalg.det(pm).round().reshape(6, 1, 1)
    irreps = [("1", np.ones((6, 1, 1))), ("1'", sign), ("2", std)]
    labels = tuple("".join(map(str, s)) for s in perms)
    return table, labels, irreps


def _d4():
    r = np.array([[0, -1], [1, 0]])
    s = np.array([[1, 0], [0, -1]])
    mats = [np.linalg.matrix_power(r, k) @ np.linalg.matrix_power(s, m) for m in range(2) for k in range(4)]
    table = _table_from_products(mats, np.matmul, np.array_equal)
    labels = tuple(f"r{k}" + ("s" if m else "") for m in range(2) for k in range(4))
    one_dim = []
    for label, cr, cs in (("A1", 1, 1), ("A2", 1, -1), ("B1", -1, 1), ("B2", -1, -1)):
        vals = np.array([cr**k * cs**m for m in range(2) for k in range(4)], dtype=float)
        one_dim.append((label, vals.reshape(8, 1, 1)))
    irreps = one_dim + [("E", np.array(mats, dtype=float))]
    return table, labels, irreps


def _q8():
    one = np.eye(2, dtype=complex)
    qi = np.array([[1j, 0], [0, -1j]])
    qj = np.array([[0, 1], [-1, 0]], dtype=complex)
    qk = qi @ qj
    mats = [one, -one, qi, -qi, qj, -qj, qk, -qk]
    table = _table_from_products(mats, np.matmul, np.allclose)
    labels = ("1", "-1", "i", "-i", "j", "-j", "k", "-k")
    # 1-dim irreps factor through Q8/{+-1}; kernel holds +-1 and the named pair.
    pair = np.array([0, 0, 1, 1, 2, 2, 3, 3])
    irreps = [("1", np.ones((8, 1, 1)))]
    for name, keep in (("1i", 1), ("1j", 2), ("1k", 3)):
        vals = np.where((pair == 0) | (pair == keep), 1.0, -1.0)
        irreps.append((name, vals.reshape(8, 1, 1)))
    irreps.append(("2", np.array(mats)))
    return table, labels, irreps


def _builtin(name):
    key = name.strip().lower()
    if key == "trivial":
        key = "z1"
    m = re.fullmatch(r"z(\d+)", key)
    if m and int(m.group(1)) >= 1:
        return key, _cyclic(int(m.group(1)))
    if key == "s3":
        return key, _s3()
    if key == "d4":
        return key, _d4()
    if key == "q8":
        return key, _q8()
    return key, None


def parse_cayley_table(text):
    """Parse a row-major integer matrix given as JSON or whitespace/comma rows."""
    text = text.strip()
    if text.startswith("["):
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {exc.lineno} col {exc.colno}", exc.msg) from exc
    else:
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                rows.append([int(tok) for tok in re.split(r"[,\s]+", line) if tok])
            except ValueError as exc:
                raise SchemaError(f"line {lineno}", f"non-integer entry ({exc})") from exc
    if not rows or len({len(r) for r in rows}) != 1:
        raise SchemaError("table", "rows must be non-empty and of equal length")
    return np.array(rows, dtype=np.int64)


def build_group(spec):
    """GroupTable from a built-in name, a structured-text table, or an integer matrix."""
    if isinstance(spec, GroupTable):
        return spec
    if isinstance(spec, str):
        name, data = _builtin(spec)
        if data is not None:
            table, labels, _ = data
            table, inverse, e = validate_table(table)
            return GroupTable(table, inverse, e, name=name, labels=labels)
        if re.fullmatch(r"[A-Za-z_][\w-]*", spec.strip()):
            raise UnsupportedGroupError(f"unknown group {spec!r}; built-ins are {', '.join(BUILTIN_NAMES)}")
        spec = parse_cayley_table(spec)
    table, inverse, e = validate_table(spec)
    labels = tuple(str(k) for k in range(table.shape[0]))
    return GroupTable(table, inverse, e, name=None, labels=labels)


def irrep_residuals(irreps):
    """Max homomorphism, unitarity and irreducibility residuals over all irreps."""
    g = irreps.group
    hom = uni = irr = 0.0
    for rep in irreps:
        d = rep.matrices
        prod = np.einsum("aij,bjk->abik", d, d)
        hom = max(hom, float(np.max(np.abs(prod - d[g.table]))))
        uu = np.einsum("aij,akj->aik", d, d.conj())
        uni = max(uni, float(np.max(np.abs(uu - np.eye(rep.dim)))))
        chi = rep.character
        irr = max(irr, abs(float(np.mean(np.abs(chi) ** 2)) - 1.0))
    return {"homomorphism": hom, "unitarity": uni, "irreducibility": irr}


def irreps_of(group, tol=1e-10):
    """Complete set of unitary irreps for a built-in group."""
    if group.name is None:
        raise UnsupportedGroupError("irreps are only stored for built-in groups; user tables are not decomposed")
    _, data = _builtin(group.name)
    if data is None:
        raise UnsupportedGroupError(f"no irrep data for {group.name!r}")
    _, _, raw = data
    reps = tuple(Irrep(label, np.asarray(m, dtype=complex)) for label, m in raw)
    chars = np.array([r.character for r in reps])
    n = group.order
    if sum(r.dim**2 for r in reps) != n:
        raise InconsistentIrrepsError("irreps are incomplete: sum of squared dims != group order")
    trivial = next(q for q, r in enumerate(reps) if r.dim == 1 and np.allclose(r.matrices, 1.0))
    conj = []
    for q in range(len(reps)):
        pairing = (chars[q][None, :] * chars).mean(axis=1)  # <chi_q chi_p, chi_trivial>
        hits = np.flatnonzero(np.abs(pairing - 1) < tol)
        if len(hits) != 1:
            raise InconsistentIrrepsError(f"irrep {reps[q].label} lacks a unique conjugate")
        conj.append(int(hits[0]))
    out = IrrepSet(group, reps, trivial, tuple(conj), chars)
    res = irrep_residuals(out)
    if res["homomorphism"] > 1e-12 or res["unitarity"] > 1e-12 or res["irreducibility"] > tol:
        raise InconsistentIrrepsError(f"stored irreps fail validation: {res}")
    return out


def fusion_multiplicities(irreps, tol=1e-8):
    """Integer tensor ``N[a, b, c]``: multiplicity of ``c`` in ``a (x) b``."""
    chi = irreps.characters
    raw = np.einsum("ag,bg,cg->abc", chi, chi, chi.conj()) / irreps.group.order
    n = np.rint(raw.real)
    resid = float(np.max(np.abs(raw - n)))
    if resid >= tol or n.min() < 0:
        raise InconsistentIrrepsError(f"fusion multiplicities not integral (residual {resid:.3g})")
    return n.astype(np.int64)
