"""Spaces that carry explicit color indices: group representations.

This is the only place the redundant color description appears. A
``RepSpace`` is a Hilbert space together with the unitaries ``U(g)`` of a
finite group; ``RegularRepSpace`` adds the Fourier change of basis between
group elements ``|phi>`` and charge states ``|q, i, a>`` (``i`` color, ``a``
flavor).
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InconsistentIrrepsError, UnsupportedError, ValidationError
from .linalg import dagger


@dataclass(frozen=True, eq=False)
class RepSpace:
    """Hilbert space of dimension ``dim`` with ``U(g) = mats[g]``."""

    group: object
    mats: np.ndarray = field(repr=False)  # (n_G, d, d)

    @property
    def dim(self):
        return self.mats.shape[1]

    def U(self, g):
        return self.mats[g]

    def tensor(self, other):
        if other.group is not self.group:
            raise ValidationError("tensor product of representations of different groups")
        mats = np.einsum("gij,gkl->gikjl", self.mats, other.mats)
        d = self.dim * other.dim
        return RepSpace(self.group, mats.reshape(-1, d, d))

    def is_invariant(self, m, tol=1e-10):
        return invariance_residual(self, m) <= tol

    @classmethod
    def from_charges(cls, irreps, multiplicities):
        """``sum_q D^q (x) I_{m_q}``; ``multiplicities`` maps charge index to flavor count."""
        blocks = []
        for q, m in sorted(dict(multiplicities).items()):
            if m:
                d = irreps[q].matrices
                blocks.append(np.einsum("gij,ab->giajb", d, np.eye(m)).reshape(len(d), d.shape[1] * m, -1))
        n = irreps.group.order
        dim = sum(b.shape[1] for b in blocks)
        mats = np.zeros((n, dim, dim), dtype=complex)
        o = 0
        for b in blocks:
            k = b.shape[1]
            mats[:, o : o + k, o : o + k] = b
            o += k
        return cls(irreps.group, mats)

    @classmethod
    def trivial(cls, group, dim=1):
        return cls(group, np.broadcast_to(np.eye(dim, dtype=complex), (group.order, dim, dim)).copy())


@dataclass(frozen=True, eq=False)
class RegularRepSpace(RepSpace):
    """Left-regular representation with its charge basis.

    ``fourier[(q, i, a), phi] = sqrt(n_q / n_G) D^q_ia(phi)``; the columns are
    the group-basis states written in charge coordinates, so an operator
    ``M`` in the group basis reads ``F M F^dagger`` in charge coordinates.
    Charge coordinates are ordered by charge, then color ``i``, then flavor ``a``.
    """

    irreps: object = field(default=None, repr=False)
    fourier: np.ndarray = field(default=None, repr=False)

    def to_charge_basis(self, m):
        f = self.fourier
        return f @ m @ dagger(f) if m.ndim == 2 else f @ m

    def to_group_basis(self, m):
        f = self.fourier
        return dagger(f) @ m @ f if m.ndim == 2 else dagger(f) @ m

    def gauge(self, g, basis="group"):
        """``U(g)|phi> = |g phi>``; on charge states it acts on color by ``D^q(g)``."""
        u = self.group.left_regular(g).astype(complex)
        return u if basis == "group" else self.to_charge_basis(u)

    def global_(self, h, basis="group"):
        """``V(h)|phi> = |phi h^-1>``; on charge states it acts on flavor by ``conj(D^q(h))``."""
        v = self.group.right_regular(h).astype(complex)
        return v if basis == "group" else self.to_charge_basis(v)

    def charge_slices(self):
        """Start offsets of each charge block in charge coordinates."""
        out, o = {}, 0
        for q, rep in enumerate(self.irreps):
            out[q] = slice(o, o + rep.dim**2)
            o += rep.dim**2
        return out


def fourier_regular(group, irreps):
    n = group.order
    if sum(d * d for d in irreps.dims) != n:
        raise InconsistentIrrepsError("irreps are incomplete; the regular representation needs all of them")
    rows = []
    for rep in irreps:
        d = rep.dim
        rows.append(np.sqrt(d / n) * rep.matrices.reshape(n, d * d).T)
    f = np.vstack(rows)
    mats = np.stack([group.left_regular(g) for g in range(n)]).astype(complex)
    return RegularRepSpace(group, mats, irreps=irreps, fourier=f)


def gauge_action(space, g, basis="group"):
    return space.gauge(g, basis)


def global_action(space, h, basis="group"):
    return space.global_(h, basis)


def twirl(space, x):
    """Group average ``(1/n_G) sum_g U(g) x U(g)^-1``; a state vector is first made a density matrix."""
    if not isinstance(space, RepSpace):
        raise UnsupportedError("twirl needs a group representation; use sectors.decohere for abstract charges")
    x = np.asarray(x, dtype=complex)
    if x.ndim == 1:
        x = np.outer(x, x.conj())
    return _kernels.twirl_sum(space.mats, x)


def invariance_residual(space, m):
    """``max_g ||U(g) m - m U(g)||`` (entrywise max)."""
    u = space.mats
    return float(np.max(np.abs(u @ m - m @ u)))
