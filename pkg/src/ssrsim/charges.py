"""Abstract superselection data: charges, duals and fusion multiplicities.

Everything downstream works with charge *indices* ``0..n-1``; labels are
strings used for display and serialization. ``fusion[a, b, c]`` is the
number of ways ``a`` and ``b`` combine to ``c``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import re

import numpy as np

from .errors import ChargeSystemError, TruncationError
from .groups import build_group, fusion_multiplicities, irreps_of

SU2_JMAX = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))


@dataclass(frozen=True)
class Fusion:
    outcomes: dict  # charge index -> multiplicity
    clipped: bool


@dataclass(frozen=True, eq=False)
class ChargeSystem:
    labels: tuple
    trivial: int
    dual: tuple
    fusion: np.ndarray = field(repr=False)
    clipped: frozenset = frozenset()  # pairs (a, b) whose product was cut off
    name: str = "custom"
    irreps: object = field(default=None, repr=False)

    def __post_init__(self):
        fusion = np.asarray(self.fusion, dtype=np.int64)
        fusion.setflags(write=False)
        object.__setattr__(self, "fusion", fusion)
        problems = check_invariants(self)
        if problems:
            raise ChargeSystemError("; ".join(problems))

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f"ChargeSystem({self.name!r}, labels={list(self.labels)})"

    @property
    def group_backed(self):
        return self.irreps is not None

    @property
    def truncated(self):
        return bool(self.clipped)

    def index(self, label):
        """Charge index for a label; numbers are matched by value (``0.5`` finds ``"1/2"``)."""
        key = str(label).strip()
        if key in self.labels:
            return self.labels.index(key)
        try:
            val = Fraction(key)
        except ValueError:
            val = None
        if val is not None:
            for i, lab in enumerate(self.labels):
                try:
                    if Fraction(lab) == val:
                        return i
                except ValueError:
                    continue
        raise ChargeSystemError(f"unknown charge {label!r} in {self.name}")

    def label(self, q):
        return self.labels[q]

    def N(self, a, b, c):
        return int(self.fusion[a, b, c])

    def fuse(self, a, b, strict=False):
        outcomes = {int(c): int(m) for c, m in enumerate(self.fusion[a, b]) if m}
        clipped = (a, b) in self.clipped
        if strict and clipped:
            raise TruncationError(f"{self.labels[a]} x {self.labels[b]} leaves the truncated charge set of {self.name}")
        return Fusion(outcomes, clipped)

    def fuse_many(self, charges):
        """Multiplicity vector over totals for a left-fold fusion of ``charges``."""
        vec = np.zeros(len(self), dtype=np.int64)
        vec[self.trivial] = 1
        for q in charges:
            vec = vec @ self.fusion[:, q, :]
        return vec

    def to_data(self):
        triples = [
            [self.labels[a], self.labels[b], self.labels[c], int(m)]
            for a, b, c in zip(*np.nonzero(self.fusion))
            for m in [self.fusion[a, b, c]]
        ]
        duals = sorted({tuple(sorted((self.labels[q], self.labels[d]))) for q, d in enumerate(self.dual)})
        return {
            "name": self.name,
            "labels": list(self.labels),
            "trivial": self.labels[self.trivial],
            "duals": [list(p) for p in duals],
            "fusion": triples,
            "clipped": sorted([self.labels[a], self.labels[b]] for a, b in self.clipped),
        }


def check_invariants(cs):
    n = len(cs.labels)
    f = cs.fusion
    out = []
    if f.shape != (n, n, n):
        return [f"fusion tensor has shape {f.shape}, expected {(n, n, n)}"]
    if len(set(cs.labels)) != n:
        out.append("labels are not unique")
    if f.min(initial=0) < 0:
        out.append("negative fusion multiplicity")
    if not 0 <= cs.trivial < n:
        return out + ["trivial charge index out of range"]
    if len(cs.dual) != n or any(not 0 <= d < n for d in cs.dual):
        return out + ["dual map must send every charge to a charge"]
    eye = np.eye(n, dtype=np.int64)
    if not np.array_equal(f[:, cs.trivial, :], eye) or not np.array_equal(f[cs.trivial], eye):
        out.append("fusion with the trivial charge is not the identity")
    if any(cs.dual[cs.dual[q]] != q for q in range(n)):
        out.append("dual map is not an involution")
    want = eye[list(cs.dual)]  # want[a, b] = delta(b, dual a)
    if not np.array_equal(f[:, :, cs.trivial], want):
        out.append("N^trivial_ab != delta(b, dual a)")
    return out


def from_group(irreps):
    g = irreps.group
    return ChargeSystem(
        labels=irreps.labels,
        trivial=irreps.trivial,
        dual=irreps.conjugate,
        fusion=fusion_multiplicities(irreps),
        name=g.name or "group",
        irreps=irreps,
    )


def u1_truncated(q_max):
    if int(q_max) != q_max or q_max < 1:
        raise ChargeSystemError(f"q_max must be an integer >= 1, got {q_max!r}")
    q_max = int(q_max)
    charges = list(range(-q_max, q_max + 1))
    n = len(charges)
    f = np.zeros((n, n, n), dtype=np.int64)
    clipped = set()
    for a, qa in enumerate(charges):
        for b, qb in enumerate(charges):
            if abs(qa + qb) <= q_max:
                f[a, b, qa + qb + q_max] = 1
            else:
                clipped.add((a, b))
    return ChargeSystem(
        labels=tuple(str(q) for q in charges),
        trivial=q_max,
        dual=tuple(n - 1 - a for a in range(n)),
        fusion=f,
        clipped=frozenset(clipped),
        name=f"u1:{q_max}",
    )


def u1_value(cs, q):
    """Integer charge of index ``q`` in a U(1) system."""
    return int(cs.labels[q])


def _spin_label(two_j):
    return str(two_j // 2) if two_j % 2 == 0 else f"{two_j}/2"


def su2_truncated(j_max):
    try:
        j = Fraction(str(j_max))
    except (ValueError, ZeroDivisionError) as exc:
        raise ChargeSystemError(f"bad j_max {j_max!r}") from exc
    if j not in SU2_JMAX:
        raise ChargeSystemError(f"j_max must be one of 1/2, 1, 3/2, 2; got {j_max!r}")
    top = int(2 * j)
    n = top + 1
    f = np.zeros((n, n, n), dtype=np.int64)
    clipped = set()
    for a in range(n):
        for b in range(n):
            for c in range(abs(a - b), a + b + 1, 2):
                if c <= top:
                    f[a, b, c] = 1
            if a + b > top:
                clipped.add((a, b))
    return ChargeSystem(
        labels=tuple(_spin_label(k) for k in range(n)),
        trivial=0,
        dual=tuple(range(n)),
        fusion=f,
        clipped=frozenset(clipped),
        name=f"su2:{_spin_label(top)}",
    )


def octet_like():
    """Two charges ``1`` and ``8`` with ``8 x 8 = 1 + 2*8`` (the 10s and 27 are dropped)."""
    f = np.zeros((2, 2, 2), dtype=np.int64)
    f[0, 0, 0] = f[0, 1, 1] = f[1, 0, 1] = f[1, 1, 0] = 1
    f[1, 1, 1] = 2
    return ChargeSystem(
        labels=("1", "8"),
        trivial=0,
        dual=(0, 1),
        fusion=f,
        clipped=frozenset({(1, 1)}),
        name="octet",
    )


def trivial_system():
    """Single-charge system: the U-world."""
    return ChargeSystem(labels=("1",), trivial=0, dual=(0,), fusion=np.ones((1, 1, 1)), name="trivial")


def charge_system(spec):
    """Look up a system by name: ``z<n> s3 d4 q8``, ``u1:<q>``, ``su2:<j>``, ``octet``, ``trivial``."""
    if isinstance(spec, ChargeSystem):
        return spec
    key = str(spec).strip().lower()
    if key in ("trivial", "u"):
        return trivial_system()
    if key in ("octet", "octet_like"):
        return octet_like()
    m = re.fullmatch(r"u1[:_](\d+)", key)
    if m:
        return u1_truncated(int(m.group(1)))
    m = re.fullmatch(r"su2[:_]([\d/.]+)", key)
    if m:
        return su2_truncated(m.group(1))
    return from_group(irreps_of(build_group(key)))


def from_data(data):
    """Build a system from the structured-text schema (see ``ChargeSystem.to_data``)."""
    from .errors import SchemaError

    def need(key, kind):
        if key not in data:
            raise SchemaError(key, "missing field")
        if not isinstance(data[key], kind):
            raise SchemaError(key, f"expected {kind.__name__}")
        return data[key]

    labels = tuple(str(x) for x in need("labels", list))
    index = {lab: i for i, lab in enumerate(labels)}

    def idx(where, lab):
        if str(lab) not in index:
            raise SchemaError(where, f"unknown label {lab!r}")
        return index[str(lab)]

    trivial = idx("trivial", data.get("trivial"))
    dual = list(range(len(labels)))
    for k, pair in enumerate(need("duals", list)):
        if not isinstance(pair, list) or len(pair) != 2:
            raise SchemaError(f"duals[{k}]", "expected a pair of labels")
        a, b = idx(f"duals[{k}][0]", pair[0]), idx(f"duals[{k}][1]", pair[1])
        dual[a], dual[b] = b, a
    n = len(labels)
    f = np.zeros((n, n, n), dtype=np.int64)
    for k, row in enumerate(need("fusion", list)):
        if not isinstance(row, list) or len(row) != 4:
            raise SchemaError(f"fusion[{k}]", "expected [a, b, c, multiplicity]")
        a, b, c = (idx(f"fusion[{k}][{i}]", row[i]) for i in range(3))
        if not isinstance(row[3], int) or row[3] < 0:
            raise SchemaError(f"fusion[{k}][3]", "multiplicity must be a nonnegative integer")
        f[a, b, c] = row[3]
    clipped = frozenset(
        (idx(f"clipped[{k}][0]", p[0]), idx(f"clipped[{k}][1]", p[1])) for k, p in enumerate(data.get("clipped", []))
    )
    return ChargeSystem(labels, trivial, tuple(dual), f, clipped, name=str(data.get("name", "custom")))


def normalize_shape(cs, dims):
    """Flavor dimensions per charge as a tuple of length ``len(cs)``.

    ``dims`` may be a sequence, or a mapping keyed by charge index or label.
    """
    if isinstance(dims, dict):
        out = [0] * len(cs)
        for key, d in dims.items():
            q = int(key) if isinstance(key, (int, np.integer)) else cs.index(key)
            if not 0 <= q < len(cs):
                raise ChargeSystemError(f"charge index {q} out of range for {cs.name}")
            out[q] = int(d)
    else:
        out = [int(d) for d in dims]
        if len(out) != len(cs):
            raise ChargeSystemError(f"shape has {len(out)} entries for {len(cs)} charges")
    if min(out) < 0 or max(out) == 0:
        raise ChargeSystemError("flavor dimensions must be >= 0 with at least one nonzero")
    return tuple(out)
