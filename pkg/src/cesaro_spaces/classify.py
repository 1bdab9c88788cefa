"""Critical exponents and membership verdicts for the l_p, ces(p) and d(p) scales.

Everything reduces to one rule: a sequence of exact order
n^(-a) L(n)^(-b) LL(n)^(-c) lies in l_q iff (qa, qb, qc) beats (1, 1, 1)
lexicographically. A family's profile on a scale is that rule applied to
the right asymptotic class (of x, of C(|x|), or of the envelope of x).
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Any, Union

from .ops import UnsupportedError, spike_monotone_from
from .sequences import (
    FiniteSupport,
    LacunarySpike,
    PowerLog,
    SequenceError,
    SymbolicSequence,
    UnitBasis,
    sequence_to_json,
)

__all__ = [
    "Scale",
    "GradeKind",
    "Grade",
    "Exact",
    "Plus",
    "Minus",
    "SpaceSpec",
    "AsymptoticClass",
    "NOT_REPRESENTABLE",
    "MembershipProfile",
    "Status",
    "Verdict",
    "CesaroImage",
    "ell_rule",
    "apply_cesaro",
    "cesaro_class",
    "image_class",
    "ell_profile",
    "ces_profile",
    "d_profile",
    "profile",
    "membership",
]


class Scale(enum.Enum):
    ELL = "ELL"
    CES = "CES"
    D = "D"


class GradeKind(enum.Enum):
    EXACT = "Exact"
    PLUS = "Plus"
    MINUS = "Minus"


@dataclass(frozen=True)
class Grade:
    kind: GradeKind
    p: float

    def __post_init__(self) -> None:
        p = float(self.p)
        object.__setattr__(self, "p", p)
        ok = {
            GradeKind.EXACT: 1.0 < p < math.inf,
            GradeKind.PLUS: 1.0 <= p < math.inf,
            GradeKind.MINUS: 1.0 < p <= math.inf,
        }[self.kind]
        if not ok:
            raise SequenceError(f"{self.kind.value}({p}) is outside the grade's exponent domain")

    def __str__(self) -> str:
        return f"{self.kind.value}({_fmt(self.p)})"


def Exact(p: float) -> Grade:
    return Grade(GradeKind.EXACT, p)


def Plus(p: float) -> Grade:
    return Grade(GradeKind.PLUS, p)


def Minus(p: float) -> Grade:
    return Grade(GradeKind.MINUS, p)


def _fmt(x: float) -> str:
    if x == math.inf:
        return "inf"
    return f"{x:g}"


_SPEC_RE = re.compile(r"^\s*(ell|ces|d)\s*:\s*(inf|[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*([+-]?)\s*$", re.I)
_SUFFIX = {"": GradeKind.EXACT, "+": GradeKind.PLUS, "-": GradeKind.MINUS}


@dataclass(frozen=True)
class SpaceSpec:
    scale: Scale
    grade: Grade

    @classmethod
    def parse(cls, text: str) -> "SpaceSpec":
        """Parse "ell:2", "ces:2+", "d:3-" or "d:inf-"."""
        m = _SPEC_RE.match(text)
        if not m:
            raise SequenceError(f"cannot parse space {text!r}; expected scale:p with optional + or -")
        scale = Scale(m.group(1).upper())
        p = math.inf if m.group(2).lower() == "inf" else float(m.group(2))
        return cls(scale, Grade(_SUFFIX[m.group(3)], p))

    def __str__(self) -> str:
        suffix = {GradeKind.EXACT: "", GradeKind.PLUS: "+", GradeKind.MINUS: "-"}[self.grade.kind]
        return f"{self.scale.value.lower()}:{_fmt(self.grade.p)}{suffix}"


@dataclass(frozen=True)
class AsymptoticClass:
    """Exact order n^(-a) L(n)^(-b) LL(n)^(-c), with LL(n) = 1 + ln L(n)."""

    a: float
    b: float = 0.0
    c: float = 0.0
    representable: bool = True

    def to_json(self) -> dict[str, Any]:
        if not self.representable:
            return {"representable": False}
        return {"a": self.a, "b": self.b, "c": self.c}


NOT_REPRESENTABLE = AsymptoticClass(math.nan, math.nan, math.nan, representable=False)
_SUMMABLE_MEAN = AsymptoticClass(1.0, 0.0, 0.0)


@dataclass(frozen=True)
class MembershipProfile:
    crit: float
    attained: bool
    scale: Scale

    def member(self, grade: Grade) -> bool:
        if grade.kind is GradeKind.EXACT:
            return self.crit < grade.p or (self.crit == grade.p and self.attained)
        if grade.kind is GradeKind.PLUS:
            return self.crit <= grade.p
        return self.crit < grade.p

    def to_json(self) -> dict[str, Any]:
        return {
            "crit": self.crit if math.isfinite(self.crit) else None,
            "attained": self.attained,
            "scale": self.scale.value,
        }


class Status(enum.Enum):
    IN = "IN"
    OUT = "OUT"
    UNSUPPORTED = "UNSUPPORTED"


@dataclass(frozen=True)
class CesaroImage:
    """The sequence C^times(|seq|), classified symbolically."""

    seq: SymbolicSequence
    times: int = 1

    def __post_init__(self) -> None:
        if self.times not in (1, 2):
            raise SequenceError(f"only C and C^2 images are supported, got times={self.times!r}")

    def to_json(self) -> dict[str, Any]:
        return {"cesaro_image": sequence_to_json(self.seq), "times": self.times}


Target = Union[PowerLog, LacunarySpike, UnitBasis, FiniteSupport, CesaroImage]


def target_to_json(target: Target) -> dict[str, Any]:
    if isinstance(target, CesaroImage):
        return target.to_json()
    return sequence_to_json(target)


@dataclass(frozen=True)
class Verdict:
    status: Status
    space: SpaceSpec
    profile: MembershipProfile | None
    certificate: str

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status.value, "space": str(self.space)}
        if self.profile is not None:
            out.update(self.profile.to_json())
        out["certificate"] = self.certificate
        return out


# ---------------------------------------------------------------------------
# class algebra
# ---------------------------------------------------------------------------

def ell_rule(cls: AsymptoticClass, scale: Scale = Scale.ELL) -> MembershipProfile:
    """Profile of a sequence of exact order ``cls`` on the l_q scale."""
    if not cls.representable:
        raise UnsupportedError("asymptotic class is not representable")
    if cls.a >= 1.0:
        # n^(-qa) with qa > 1 converges for every q > 1; nothing to attain at q = 1
        return MembershipProfile(1.0, False, scale)
    if cls.a <= 0.0:
        return MembershipProfile(math.inf, False, scale)
    crit = 1.0 / cls.a
    attained = cls.b > cls.a or (cls.b == cls.a and cls.c > cls.a)
    return MembershipProfile(crit, attained, scale)


def apply_cesaro(cls: AsymptoticClass) -> AsymptoticClass:
    """Order of the Cesàro means of a positive sequence of order ``cls``."""
    if not cls.representable:
        return cls
    a, b, c = cls.a, cls.b, cls.c
    if a < 1.0:
        return cls
    if a > 1.0:
        return _SUMMABLE_MEAN
    # a = 1: partial sums of n^-1 L^-b LL^-c
    if b < 1.0:
        return AsymptoticClass(1.0, b - 1.0, c)
    if b > 1.0:
        return _SUMMABLE_MEAN
    if c < 1.0:
        return AsymptoticClass(1.0, 0.0, c - 1.0)
    if c > 1.0:
        return _SUMMABLE_MEAN
    return NOT_REPRESENTABLE


def cesaro_class(seq: SymbolicSequence) -> AsymptoticClass:
    """Exact order of C(|x|)."""
    if isinstance(seq, PowerLog):
        return apply_cesaro(AsymptoticClass(seq.a, seq.b, 0.0))
    if isinstance(seq, LacunarySpike):
        g, dl = seq.gamma, seq.delta
        if g > 0.0:
            # partial sums are dominated by the last spike
            return AsymptoticClass(1.0 - g, dl, 0.0)
        if g < 0.0:
            return _SUMMABLE_MEAN
        # gamma = 0: partial sums behave like sum_{j <= log2 n} j^-delta
        return apply_cesaro(AsymptoticClass(1.0, dl, 0.0))
    if isinstance(seq, (UnitBasis, FiniteSupport)):
        return _SUMMABLE_MEAN
    raise UnsupportedError(f"no asymptotic class for {type(seq).__name__}")


def image_class(seq: SymbolicSequence, times: int) -> AsymptoticClass:
    """Exact order of C^times(|x|) for times >= 1."""
    cls = cesaro_class(seq)
    for _ in range(times - 1):
        cls = apply_cesaro(cls)
    return cls


# ---------------------------------------------------------------------------
# profiles of the base families
# ---------------------------------------------------------------------------

def _unwrap(target: Target) -> tuple[SymbolicSequence, int]:
    if isinstance(target, CesaroImage):
        return target.seq, target.times
    return target, 0


def ell_profile(target: Target) -> MembershipProfile:
    seq, times = _unwrap(target)
    if times:
        return ell_rule(image_class(seq, times), Scale.ELL)
    if isinstance(seq, PowerLog):
        return ell_rule(AsymptoticClass(seq.a, seq.b, 0.0), Scale.ELL)
    if isinstance(seq, LacunarySpike):
        # sum_j 2^(q j gamma) j^(-q delta)
        if seq.gamma < 0.0:
            return MembershipProfile(1.0, False, Scale.ELL)
        if seq.gamma > 0.0 or seq.delta == 0.0:
            return MembershipProfile(math.inf, False, Scale.ELL)
        return MembershipProfile(max(1.0, 1.0 / seq.delta), False, Scale.ELL)
    if isinstance(seq, (UnitBasis, FiniteSupport)):
        return MembershipProfile(1.0, False, Scale.ELL)
    raise UnsupportedError(f"no l_p profile for {type(seq).__name__}")


def ces_profile(target: Target) -> MembershipProfile:
    seq, times = _unwrap(target)
    return ell_rule(image_class(seq, times + 1), Scale.CES)


def d_profile(target: Target) -> MembershipProfile:
    seq, times = _unwrap(target)
    if times:
        # regularly varying with index -a < 0 is comparable to its envelope;
        # for a <= 0 both sides give crit = inf
        return ell_rule(image_class(seq, times), Scale.D)
    if isinstance(seq, PowerLog):
        return ell_rule(AsymptoticClass(seq.a, seq.b, 0.0), Scale.D)
    if isinstance(seq, LacunarySpike):
        if spike_monotone_from(seq) is None or seq.gamma == 0.0:
            # unbounded, or an envelope bounded below by a positive power of j^-delta
            return MembershipProfile(math.inf, False, Scale.D)
        # the envelope is h_J on 2^(J-1) indices: sum_J 2^(J(1 + q gamma)) J^(-q delta)
        crit = -1.0 / seq.gamma
        if crit <= 1.0:
            return MembershipProfile(1.0, False, Scale.D)
        return MembershipProfile(crit, seq.delta * crit > 1.0, Scale.D)
    if isinstance(seq, (UnitBasis, FiniteSupport)):
        return MembershipProfile(1.0, False, Scale.D)
    raise UnsupportedError(f"no d(p) profile for {type(seq).__name__}")


_PROFILES = {Scale.ELL: ell_profile, Scale.CES: ces_profile, Scale.D: d_profile}


def profile(target: Target, scale: Scale) -> MembershipProfile:
    return _PROFILES[scale](target)


def _describe(target: Target) -> str:
    if isinstance(target, CesaroImage):
        power = "" if target.times == 1 else "^2"
        return f"C{power}(|{_describe(target.seq)}|)"
    return type(target).__name__


def membership(target: Target, spec: SpaceSpec) -> Verdict:
    """IN/OUT verdict for ``target`` in the space ``spec``."""
    try:
        prof = profile(target, spec.scale)
    except UnsupportedError as exc:
        return Verdict(Status.UNSUPPORTED, spec, None, str(exc))
    inside = prof.member(spec.grade)
    crit = _fmt(prof.crit)
    tag = "attained" if prof.attained else "not attained"
    reason = f"{_describe(target)}: {spec.scale.value} crit {crit} ({tag}); {spec.grade}"
    return Verdict(Status.IN if inside else Status.OUT, spec, prof, reason)
