"""Brute-force membership oracle, independent of the symbolic classifier.

Sums the defining series at N and 16N. A series counts as convergent when
its tail majorant is finite and the p-th power grew by less than
``RATIO_TOL`` relative between the two levels; as divergent when the norm
module certifies a minorant above ``DIVERGENT_AT``. Anything else is Unknown.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import norms

RATIO_TOL = 1e-3
DIVERGENT_AT = 1e3


class OracleVerdict(enum.Enum):
    CONVERGENT = "CONVERGENT"
    DIVERGENT = "DIVERGENT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class OracleResult:
    verdict: OracleVerdict
    coarse: norms.NormEnclosure
    fine: norms.NormEnclosure


def oracle(seq, scale: str, q: float, N: int = 1 << 16) -> OracleResult:
    coarse = norms.norm(seq, scale, q, N)
    fine = norms.norm(seq, scale, q, 16 * N)
    for enc in (coarse, fine):
        if enc.method is norms.Method.DIVERGENT_LOWER_BOUND and enc.lo ** q >= DIVERGENT_AT:
            return OracleResult(OracleVerdict.DIVERGENT, coarse, fine)
    if coarse.finite and fine.finite:
        s0, s1 = coarse.lo ** q, fine.lo ** q
        if s1 == 0.0 or (s1 - s0) / s1 < RATIO_TOL:
            return OracleResult(OracleVerdict.CONVERGENT, coarse, fine)
    return OracleResult(OracleVerdict.UNKNOWN, coarse, fine)


def is_member(seq, scale: str, q: float, N: int = 1 << 16) -> bool | None:
    """True/False when the oracle decides, None when it cannot."""
    v = oracle(seq, scale, q, N).verdict
    if v is OracleVerdict.UNKNOWN:
        return None
    return v is OracleVerdict.CONVERGENT
