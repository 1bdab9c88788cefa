"""Explicit elements certifying proper inclusions and failures of the strong Bennett property.

Each catalog row maps exponents to concrete sequences plus the membership
verdicts that make the claim true. Building a row re-checks every verdict
with the classifier and attaches norm enclosures as numeric evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

from . import norms
from .classify import (
    CesaroImage,
    Exact,
    Grade,
    GradeKind,
    Minus,
    Plus,
    Scale,
    SpaceSpec,
    Status,
    Target,
    membership,
    profile,
    target_to_json,
)
from .sequences import LacunarySpike, PowerLog, SequenceError

__all__ = [
    "ClaimError",
    "ClaimInfo",
    "Assertion",
    "WitnessResult",
    "list_claims",
    "build_witness",
    "default_params",
]

EVIDENCE_N = 1 << 16


class ClaimError(SequenceError):
    """Unknown claim key (UNKNOWN_CLAIM) or exponents outside its domain (PARAMS_OUT_OF_DOMAIN)."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class Assertion:
    target: Target
    space: SpaceSpec
    expected: Status

    def to_json(self) -> dict[str, Any]:
        return {"target": target_to_json(self.target), "space": str(self.space), "expected": self.expected.value}


@dataclass
class WitnessResult:
    claim: str
    params: dict[str, float]
    sequence: Any
    assertions: list[Assertion]
    numeric_evidence: list[dict[str, Any]] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "claim": self.claim,
            "params": {k: (v if math.isfinite(v) else None) for k, v in self.params.items()},
            "sequence": target_to_json(self.sequence),
            "assertions": [a.to_json() for a in self.assertions],
            "numeric_evidence": self.numeric_evidence,
        }


# ---------------------------------------------------------------------------
# parameter domains
# ---------------------------------------------------------------------------

def _between(p: float, q: float) -> float:
    """An exponent strictly between p and q (q may be inf)."""
    return p + 1.0 if q == math.inf else 0.5 * (p + q)


def _half_step(q: float) -> float:
    """Spike growth rate gamma whose ces exponent 2q/(q+1) sits below q (1/2 for q = inf)."""
    return 0.5 if q == math.inf else 0.5 * (1.0 - 1.0 / q)


def _need(cond: bool, claim: str, what: str) -> None:
    if not cond:
        raise ClaimError("PARAMS_OUT_OF_DOMAIN", f"{claim} requires {what}")


# strict inequalities between exponents must hold with this margin, so that
# witnesses built from midpoints do not collapse onto an endpoint in floating point
_GAP = 1e-9


def _gt(a: float, b: float) -> bool:
    return a > b + _GAP * max(1.0, abs(b))


def _order(p: float, q: float, strict: bool) -> bool:
    if strict:
        return p < math.inf and (q == math.inf or _gt(q, p))
    return p <= q


def _exact_pq(claim: str, p: float, q: float, strict: bool) -> None:
    ok = _gt(p, 1.0) and q < math.inf and _order(p, q, strict)
    _need(ok, claim, f"1 < p {'<' if strict else '<='} q < inf")


def _plus_pq(claim: str, p: float, q: float, strict: bool) -> None:
    ok = 1.0 <= p and q < math.inf and _order(p, q, strict)
    _need(ok, claim, f"1 <= p {'<' if strict else '<='} q < inf")


def _minus_pq(claim: str, p: float, q: float, strict: bool) -> None:
    ok = _gt(p, 1.0) and _order(p, q, strict)
    _need(ok, claim, f"1 < p {'<' if strict else '<='} q <= inf")


def _in(target: Target, scale: Scale, grade: Grade) -> Assertion:
    return Assertion(target, SpaceSpec(scale, grade), Status.IN)


def _out(target: Target, scale: Scale, grade: Grade) -> Assertion:
    return Assertion(target, SpaceSpec(scale, grade), Status.OUT)


# ---------------------------------------------------------------------------
# catalog rows: each returns (primary sequence, assertions)
# ---------------------------------------------------------------------------

def _proper_exact(scale: Scale, claim: str):
    def build(p: float, q: float):
        _exact_pq(claim, p, q, strict=True)
        x = PowerLog(1.0 / _between(p, q))
        return x, [_in(x, scale, Exact(q)), _out(x, scale, Exact(p))]
    return build


def _proper_minus(scale: Scale, claim: str):
    def build(p: float, q: float):
        _minus_pq(claim, p, q, strict=True)
        x = PowerLog(1.0 / _between(p, q))
        return x, [_in(x, scale, Minus(q)), _out(x, scale, Minus(p))]
    return build


def _d_plus_proper(p: float, q: float):
    _plus_pq("d-plus-proper", p, q, strict=True)
    x = PowerLog(1.0 / _between(p, q))
    return x, [_in(x, Scale.D, Plus(q)), _out(x, Scale.D, Plus(p))]


def _ell_proper_in_ces(p: float, q: float):
    _exact_pq("ell-proper-in-ces", p, q, strict=False)
    x = LacunarySpike(_half_step(q), 0.0)
    return x, [_in(x, Scale.CES, Exact(q)), _out(x, Scale.ELL, Exact(p)), _out(x, Scale.ELL, Exact(q))]


def _d_proper_in_ell(p: float, q: float):
    _exact_pq("d-proper-in-ell", p, q, strict=False)
    x = LacunarySpike(0.0, 2.0 / q)
    outs = [_out(x, Scale.D, Exact(s)) for s in sorted({p, q, 1.5, 2.0, 4.0})]
    return x, [_in(x, Scale.ELL, Exact(q)), *outs]


def _d_proper_in_ces(p: float, q: float):
    _exact_pq("d-proper-in-ces", p, q, strict=False)
    x = LacunarySpike(0.0, 2.0 / q)
    return x, [_in(x, Scale.CES, Exact(q)), _out(x, Scale.D, Exact(p))]


def _ellplus_proper_in_cesplus(p: float, q: float):
    _plus_pq("ellplus-proper-in-cesplus", p, q, strict=False)
    x = LacunarySpike(_half_step(q), 0.0)
    return x, [_in(x, Scale.CES, Plus(q)), _out(x, Scale.ELL, Plus(p))]


def _ellminus_proper_in_cesminus(p: float, q: float):
    _minus_pq("ellminus-proper-in-cesminus", p, q, strict=False)
    x = LacunarySpike(_half_step(q), 0.0)
    return x, [_in(x, Scale.CES, Minus(q)), _out(x, Scale.ELL, Minus(p))]


def _dplus_proper_chain(p: float, q: float):
    _plus_pq("dplus-proper-chain", p, q, strict=False)
    slow = LacunarySpike(0.0, 1.0)
    grow = LacunarySpike(_half_step(q), 0.0)
    return slow, [
        _in(slow, Scale.ELL, Plus(q)),
        _out(slow, Scale.D, Plus(p)),
        _in(grow, Scale.CES, Plus(q)),
        _out(grow, Scale.ELL, Plus(q)),
    ]


def _dminus_proper_chain(p: float, q: float):
    _minus_pq("dminus-proper-chain", p, q, strict=False)
    slow = LacunarySpike(0.0, 1.0)
    grow = LacunarySpike(_half_step(q), 0.0)
    return slow, [
        _in(slow, Scale.ELL, Minus(q)),
        _out(slow, Scale.D, Minus(p)),
        _in(grow, Scale.CES, Minus(q)),
        _out(grow, Scale.ELL, Minus(q)),
    ]


def _d_into_dminus_proper(p: float, q: float):
    # p is the exact exponent, q the graded one: d(p) inside d(q-) properly for p < q
    _minus_pq("d-into-dminus-proper", p, q, strict=True)
    x = PowerLog(1.0 / _between(p, q))
    return x, [_in(x, Scale.D, Minus(q)), _out(x, Scale.D, Exact(p))]


def _bennett_fails_ellplus(p: float, q: float):
    _need(1.0 <= p < math.inf, "bennett-fails-ellplus", "1 <= p < inf")
    x = LacunarySpike(_half_step(p), 0.0)
    return x, [_in(x, Scale.CES, Plus(p)), _out(x, Scale.ELL, Plus(p)), _in(CesaroImage(x), Scale.ELL, Plus(p))]


def _bennett_fails_ellminus(p: float, q: float):
    _need(_gt(p, 1.0), "bennett-fails-ellminus", "1 < p <= inf")
    x = LacunarySpike(_half_step(p), 0.0)
    return x, [_in(x, Scale.CES, Minus(p)), _out(x, Scale.ELL, Minus(p)), _in(CesaroImage(x), Scale.ELL, Minus(p))]


def _bennett_fails_dplus(p: float, q: float):
    _need(1.0 <= p < math.inf, "bennett-fails-dplus", "1 <= p < inf")
    x = LacunarySpike(0.0, 2.0 / p)
    return x, [_in(x, Scale.ELL, Plus(p)), _out(x, Scale.D, Plus(p)), _in(CesaroImage(x), Scale.D, Plus(p))]


def _bennett_fails_dminus(p: float, q: float):
    _need(_gt(p, 1.0), "bennett-fails-dminus", "1 < p <= inf")
    x = LacunarySpike(0.0, 1.0)
    return x, [_in(x, Scale.ELL, Minus(p)), _out(x, Scale.D, Minus(p)), _in(CesaroImage(x), Scale.D, Minus(p))]


@dataclass(frozen=True)
class ClaimInfo:
    id: str
    statement: str
    params: tuple[str, ...]
    defaults: tuple[dict[str, float], ...]
    builder: Callable[[float, float], tuple[Any, list[Assertion]]] = field(repr=False, compare=False)
    aliases: tuple[str, ...] = ()

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"id": self.id, "statement": self.statement, "params": list(self.params)}
        if self.aliases:
            out["aliases"] = list(self.aliases)
        return out


_INF = math.inf
_PQ = ("p", "q")
_P = ("p",)

_CATALOG: tuple[ClaimInfo, ...] = (
    ClaimInfo("ellp-proper-in-ellq", "l_p is a proper subspace of l_q for 1 < p < q", _PQ,
              ({"p": 2, "q": 3}, {"p": 1.5, "q": 2}, {"p": 3, "q": 8}),
              _proper_exact(Scale.ELL, "ellp-proper-in-ellq")),
    ClaimInfo("ces-proper", "ces(p) is a proper subspace of ces(q) for 1 < p < q", _PQ,
              ({"p": 2, "q": 3}, {"p": 1.5, "q": 2}, {"p": 3, "q": 8}),
              _proper_exact(Scale.CES, "ces-proper")),
    ClaimInfo("d-proper", "d(p) is a proper subspace of d(q) for 1 < p < q", _PQ,
              ({"p": 2, "q": 3}, {"p": 1.5, "q": 2}, {"p": 3, "q": 8}),
              _proper_exact(Scale.D, "d-proper")),
    ClaimInfo("ell-proper-in-ces", "l_p is a proper subspace of ces(q) for 1 < p <= q", _PQ,
              ({"p": 2, "q": 2}, {"p": 1.5, "q": 3}, {"p": 4, "q": 6}),
              _ell_proper_in_ces),
    ClaimInfo("d-proper-in-ell", "d(p) is a proper subspace of l_q for 1 < p <= q", _PQ,
              ({"p": 2, "q": 2}, {"p": 1.5, "q": 3}, {"p": 4, "q": 6}),
              _d_proper_in_ell),
    ClaimInfo("d-proper-in-ces", "d(p) is a proper subspace of ces(q) for 1 < p <= q", _PQ,
              ({"p": 2, "q": 2}, {"p": 1.5, "q": 3}, {"p": 4, "q": 6}),
              _d_proper_in_ces),
    ClaimInfo("ellplus-proper-in-cesplus", "l_{p+} is a proper subspace of ces(q+) for 1 <= p <= q", _PQ,
              ({"p": 2, "q": 2}, {"p": 1, "q": 1}, {"p": 1.5, "q": 4}),
              _ellplus_proper_in_cesplus),
    ClaimInfo("ellminus-proper-in-cesminus", "l_{p-} is a proper subspace of ces(q-) for 1 < p <= q <= inf", _PQ,
              ({"p": 2, "q": 2}, {"p": 1.5, "q": 4}, {"p": 3, "q": _INF}),
              _ellminus_proper_in_cesminus),
    ClaimInfo("ellminus-proper", "l_{p-} is a proper subspace of l_{q-} for 1 < p < q <= inf", _PQ,
              ({"p": 2, "q": 3}, {"p": 1.5, "q": 2}, {"p": 3, "q": _INF}),
              _proper_minus(Scale.ELL, "ellminus-proper")),
    ClaimInfo("cesminus-proper", "ces(p-) is a proper subspace of ces(q-) for 1 < p < q <= inf", _PQ,
              ({"p": 2, "q": 3}, {"p": 1.5, "q": 2}, {"p": 3, "q": _INF}),
              _proper_minus(Scale.CES, "cesminus-proper")),
    ClaimInfo("d-plus-proper", "d(p+) is a proper subspace of d(q+) for 1 <= p < q", _PQ,
              ({"p": 2, "q": 3}, {"p": 1, "q": 2}, {"p": 3, "q": 8}),
              _d_plus_proper),
    ClaimInfo("d-minus-proper", "d(p-) is a proper subspace of d(q-) for 1 < p < q <= inf", _PQ,
              ({"p": 2, "q": 3}, {"p": 1.5, "q": 2}, {"p": 3, "q": _INF}),
              _proper_minus(Scale.D, "d-minus-proper")),
    ClaimInfo("dplus-proper-chain", "d(p+) inside l_{q+} inside ces(q+), both properly, for 1 <= p <= q", _PQ,
              ({"p": 2, "q": 2}, {"p": 1, "q": 1}, {"p": 1.5, "q": 4}),
              _dplus_proper_chain),
    ClaimInfo("dminus-proper-chain", "d(p-) inside l_{q-} inside ces(q-), both properly, for 1 < p <= q <= inf", _PQ,
              ({"p": 2, "q": 2}, {"p": 1.5, "q": 4}, {"p": 3, "q": _INF}),
              _dminus_proper_chain),
    ClaimInfo("d-into-dminus-proper", "d(p) is a proper subspace of d(q-) for 1 < p < q <= inf", _PQ,
              ({"p": 2, "q": 3}, {"p": 1.5, "q": 2}, {"p": 3, "q": _INF}),
              _d_into_dminus_proper),
    ClaimInfo("bennett-fails-ellplus", "some x in ces(p+) outside l_{p+} has C(|x|) in l_{p+}", _P,
              ({"p": 2}, {"p": 1}, {"p": 4}),
              _bennett_fails_ellplus, ("bennett-fails-ell-plus",)),
    ClaimInfo("bennett-fails-ellminus", "some x in ces(p-) outside l_{p-} has C(|x|) in l_{p-}", _P,
              ({"p": 2}, {"p": 1.5}, {"p": _INF}),
              _bennett_fails_ellminus, ("bennett-fails-ell-minus",)),
    ClaimInfo("bennett-fails-dplus", "some x in l_{p+} outside d(p+) has C(|x|) in d(p+)", _P,
              ({"p": 2}, {"p": 1}, {"p": 4}),
              _bennett_fails_dplus, ("bennett-fails-d-plus",)),
    ClaimInfo("bennett-fails-dminus", "some x in l_{p-} outside d(p-) has C(|x|) in d(p-)", _P,
              ({"p": 2}, {"p": 1.5}, {"p": _INF}),
              _bennett_fails_dminus, ("bennett-fails-d-minus",)),
)

_BY_KEY: dict[str, ClaimInfo] = {}
for _info in _CATALOG:
    _BY_KEY[_info.id] = _info
    for _alias in _info.aliases:
        _BY_KEY[_alias] = _info


def list_claims() -> list[ClaimInfo]:
    return list(_CATALOG)


def _lookup(claim: str) -> ClaimInfo:
    try:
        return _BY_KEY[claim]
    except KeyError:
        raise ClaimError("UNKNOWN_CLAIM", f"no claim {claim!r}; see list_claims()") from None


def default_params(claim: str) -> tuple[dict[str, float], ...]:
    return _lookup(claim).defaults


# ---------------------------------------------------------------------------
# numeric corroboration
# ---------------------------------------------------------------------------

def _probe_exponent(crit: float, grade: Grade, member: bool) -> float | None:
    """An exact exponent at which the norm must be finite (member) or infinite (not)."""
    p = grade.p
    if grade.kind is GradeKind.EXACT:
        if member:
            return p
        return p if p < crit else None
    if grade.kind is GradeKind.PLUS:
        if member:
            return p + 0.25
        return p + 1.0 if crit == math.inf else 0.5 * (p + crit)
    if member:
        return crit + 1.0 if p == math.inf else 0.5 * (crit + p)
    return 2.0 if p == math.inf else 0.5 * (1.0 + p)


def _evidence(assertion: Assertion, crit: float) -> dict[str, Any] | None:
    target, spec = assertion.target, assertion.space
    member = assertion.expected is Status.IN
    q = _probe_exponent(crit, spec.grade, member)
    if q is None:
        return None
    if isinstance(target, CesaroImage):
        # ‖C(|x|)‖_q is the ces(q) norm of x; the d scale has its own routine
        if target.times != 1 or spec.scale is Scale.CES:
            return None
        if spec.scale is Scale.ELL:
            enc = norms.ces_norm(target.seq, q, EVIDENCE_N)
        else:
            enc = norms.cesaro_image_d_norm(target.seq, q, EVIDENCE_N)
    else:
        enc = norms.norm(target, spec.scale.value, q, EVIDENCE_N)
    consistent = enc.finite if member else enc.method is norms.Method.DIVERGENT_LOWER_BOUND
    return {
        "target": target_to_json(target),
        "space": str(spec),
        "exponent": q,
        "enclosure": enc.to_json(),
        "consistent": consistent,
    }


def build_witness(claim: str, p: float | None = None, q: float | None = None) -> WitnessResult:
    """Construct and verify the witness for ``claim``; raises ClaimError on any mismatch."""
    info = _lookup(claim)
    if p is None or (q is None and "q" in info.params):
        d = info.defaults[0]
        p = d["p"] if p is None else p
        q = d.get("q") if q is None else q
    p = float(p)
    q = float(q) if q is not None else math.nan
    if math.isnan(p) or ("q" in info.params and math.isnan(q)):
        raise ClaimError("PARAMS_OUT_OF_DOMAIN", f"{info.id} needs numeric {', '.join(info.params)}")
    seq, assertions = info.builder(p, q)
    evidence: list[dict[str, Any]] = []
    for a in assertions:
        verdict = membership(a.target, a.space)
        if verdict.status is not a.expected:
            raise ClaimError(
                "WITNESS_MISMATCH",
                f"{info.id}: expected {a.expected.value} for {a.space}, classifier says {verdict.certificate}",
            )
        ev = _evidence(a, profile(a.target, a.space.scale).crit)
        if ev is None:
            continue
        if not ev["consistent"]:
            raise ClaimError("WITNESS_MISMATCH", f"{info.id}: norm enclosure contradicts {a.space}")
        evidence.append(ev)
    params = {"p": p} if "q" not in info.params else {"p": p, "q": q}
    return WitnessResult(info.id, params, seq, assertions, evidence)
