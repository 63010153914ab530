"""Superselection rules, reference frames and two-party quantum protocols.

Modules, bottom up: ``groups`` and ``charges`` (symmetry data), ``sectors``
(flavor-only Hilbert spaces), ``representations`` and ``reference``
(explicit color, reference systems), ``games`` and ``compiler`` (protocol
simulation), ``attacks`` (bit commitment and data hiding), ``cli``.
"""

__version__ = "0.1.0"

from .charges import ChargeSystem, charge_system, octet_like, su2_truncated, trivial_system, u1_truncated
from .groups import build_group, irreps_of
from .sectors import SectorOperator, SectorSpace, SectorState

__all__ = [
    "__version__",
    "ChargeSystem",
    "charge_system",
    "octet_like",
    "su2_truncated",
    "trivial_system",
    "u1_truncated",
    "build_group",
    "irreps_of",
    "SectorSpace",
    "SectorState",
    "SectorOperator",
]
