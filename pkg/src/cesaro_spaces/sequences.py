"""Symbolic sequence families, pointwise evaluation and finite views.

Every family is an immutable value with a vectorised ``terms_at`` kernel;
``evaluate`` and ``truncate`` both route through that kernel so a truncated
view agrees with pointwise evaluation bit for bit.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

__all__ = [
    "SequenceError",
    "PowerLog",
    "LacunarySpike",
    "UnitBasis",
    "FiniteSupport",
    "StepSequence",
    "SymbolicSequence",
    "TailKind",
    "TruncatedView",
    "log_factor",
    "evaluate",
    "truncate",
    "powerlog_peak",
    "tail_monotone_index",
    "support_end",
    "sequence_from_json",
    "sequence_to_json",
]


class SequenceError(ValueError):
    """Invalid family parameters, indices or serialized input."""


def log_factor(n):
    """L(n) = 1 + ln n, the log factor used by the power-log family."""
    return 1.0 + np.log(n)


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise SequenceError(f"{name} must be finite, got {value!r}")
    return value


def _is_positive_int(n) -> bool:
    if isinstance(n, bool) or not isinstance(n, (int, float, np.integer, np.floating)):
        return False
    return math.isfinite(n) and int(n) == n and n >= 1


def _as_index_array(ns) -> np.ndarray:
    arr = np.asarray(ns, dtype=np.int64)
    if arr.size and arr.min() < 1:
        raise SequenceError("sequence indices start at 1")
    return arr


@dataclass(frozen=True)
class PowerLog:
    """x_n = n^(-a) * L(n)^(-b) with L(n) = 1 + ln n."""

    a: float
    b: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _finite("a", self.a))
        object.__setattr__(self, "b", _finite("b", self.b))
        if self.a < 0:
            raise SequenceError("power-log family needs a >= 0")
        if self.a == 0 and self.b < 0:
            raise SequenceError("a = 0 requires b >= 0 (bounded sequence)")

    def terms_at(self, ns) -> np.ndarray:
        n = _as_index_array(ns).astype(np.float64)
        return np.power(n, -self.a) * np.power(log_factor(n), -self.b)


@dataclass(frozen=True)
class LacunarySpike:
    """x_n = 2^(j*gamma) * j^(-delta) at n = 2^j (j >= 1), zero elsewhere."""

    gamma: float
    delta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", _finite("gamma", self.gamma))
        object.__setattr__(self, "delta", _finite("delta", self.delta))
        if self.gamma == 0 and self.delta < 0:
            raise SequenceError("gamma = 0 requires delta >= 0")

    def heights(self, js) -> np.ndarray:
        j = np.asarray(js, dtype=np.float64)
        return np.exp2(j * self.gamma) * np.power(j, -self.delta)

    def log_heights(self, js) -> np.ndarray:
        j = np.asarray(js, dtype=np.float64)
        return j * self.gamma * math.log(2.0) - self.delta * np.log(j)

    def terms_at(self, ns) -> np.ndarray:
        n = _as_index_array(ns)
        out = np.zeros(n.shape, dtype=np.float64)
        spike = (n >= 2) & ((n & (n - 1)) == 0)
        if spike.any():
            j = np.frexp(n[spike].astype(np.float64))[1] - 1
            out[spike] = self.heights(j)
        return out


@dataclass(frozen=True)
class UnitBasis:
    """The canonical unit vector e_n."""

    n: int

    def __post_init__(self) -> None:
        if not _is_positive_int(self.n):
            raise SequenceError(f"unit basis index must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    def terms_at(self, ns) -> np.ndarray:
        n = _as_index_array(ns)
        return (n == self.n).astype(np.float64)


@dataclass(frozen=True)
class FiniteSupport:
    """x_k = values[k-1] for k <= len(values), zero afterwards. Entries may be signed."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(_finite("values[]", v) for v in self.values)
        object.__setattr__(self, "values", vals)

    def terms_at(self, ns) -> np.ndarray:
        n = _as_index_array(ns)
        table = np.asarray(self.values, dtype=np.float64)
        out = np.zeros(n.shape, dtype=np.float64)
        inside = n <= table.size
        out[inside] = table[n[inside] - 1]
        return out


@dataclass(frozen=True)
class StepSequence:
    """Piecewise-constant finite sequence given as (value, run length) pairs.

    Produced by the symbolic envelope of finitely supported sequences; a run
    length may be astronomically large without materialising anything.
    """

    runs: tuple[tuple[float, int], ...]
    _edges: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        runs = tuple((float(v), int(c)) for v, c in self.runs if int(c) > 0)
        object.__setattr__(self, "runs", runs)
        object.__setattr__(self, "_edges", np.cumsum([c for _, c in runs], dtype=np.int64))

    @property
    def length(self) -> int:
        return int(self._edges[-1]) if self.runs else 0

    def power_sum(self, p: float) -> float:
        return math.fsum(c * abs(v) ** p for v, c in self.runs)

    def terms_at(self, ns) -> np.ndarray:
        n = _as_index_array(ns)
        out = np.zeros(n.shape, dtype=np.float64)
        if not self.runs:
            return out
        table = np.asarray([v for v, _ in self.runs], dtype=np.float64)
        idx = np.searchsorted(self._edges, n, side="left")
        inside = idx < table.size
        out[inside] = table[idx[inside]]
        return out


SymbolicSequence = Union[PowerLog, LacunarySpike, UnitBasis, FiniteSupport]


class TailKind(enum.Enum):
    ZERO = "ZERO"
    EVENTUALLY_MONOTONE = "EVENTUALLY_MONOTONE_FROM"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class TruncatedView:
    """First N terms of a sequence plus what is known about the rest."""

    terms: np.ndarray
    tail_kind: TailKind
    monotone_from: int | None = None

    @property
    def N(self) -> int:
        return int(self.terms.size)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "N": self.N,
            "terms": [float(t) for t in self.terms],
            "tail_kind": self.tail_kind.value,
        }
        if self.monotone_from is not None:
            out["monotone_from"] = self.monotone_from
        return out


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def make_view(terms: np.ndarray, tail_kind: TailKind, monotone_from: int | None = None) -> TruncatedView:
    return TruncatedView(_frozen(np.asarray(terms, dtype=np.float64)), tail_kind, monotone_from)


def evaluate(seq: SymbolicSequence, n: int) -> float:
    """x_n for n >= 1."""
    if not _is_positive_int(n):
        raise SequenceError(f"index must be a positive integer, got {n!r}")
    return float(seq.terms_at(np.array([n], dtype=np.int64))[0])


def support_end(seq) -> int | None:
    """Last nonzero index of a finitely supported sequence (0 if identically zero)."""
    if isinstance(seq, UnitBasis):
        return seq.n
    if isinstance(seq, FiniteSupport):
        nz = [k for k, v in enumerate(seq.values, start=1) if v != 0.0]
        return nz[-1] if nz else 0
    if isinstance(seq, StepSequence):
        nz = [int(e) for (v, _), e in zip(seq.runs, seq._edges) if v != 0.0]
        return nz[-1] if nz else 0
    return None


def tail_monotone_index(seq) -> int | None:
    """Least N0 (in closed form) from which |x_n| is nonincreasing, or None."""
    if isinstance(seq, PowerLog):
        if seq.b >= 0:
            return 1
        # d/dt [-a ln t + |b| ln L(t)] <= 0  iff  L(t) >= |b|/a
        t_star = math.exp(-seq.b / seq.a - 1.0)
        return max(1, math.ceil(t_star) + 1)
    end = support_end(seq)
    if end is not None:
        return end + 1
    # envelope objects are nonincreasing by construction
    return getattr(seq, "monotone_from", None)


def powerlog_peak(seq: PowerLog) -> tuple[int, float]:
    """Index and value of the largest term; the terms rise before it and fall after."""
    if seq.b >= 0:
        return 1, 1.0
    t_star = math.exp(-seq.b / seq.a - 1.0)
    cands = sorted({max(1, math.floor(t_star)), max(1, math.ceil(t_star))})
    vals = seq.terms_at(np.array(cands, dtype=np.int64))
    i = int(np.argmax(vals))
    return cands[i], float(vals[i])


def truncate(seq, N: int) -> TruncatedView:
    """The first N terms of ``seq`` with tail metadata."""
    if not _is_positive_int(N):
        raise SequenceError(f"truncation length must be a positive integer, got {N!r}")
    N = int(N)
    terms = seq.terms_at(np.arange(1, N + 1, dtype=np.int64))
    end = support_end(seq)
    if end is not None and end <= N:
        return make_view(terms, TailKind.ZERO)
    n0 = tail_monotone_index(seq)
    if n0 is None:
        return make_view(terms, TailKind.UNKNOWN)
    return make_view(terms, TailKind.EVENTUALLY_MONOTONE, n0)


_FAMILY_FIELDS = {
    "powerlog": ("a", "b"),
    "spike": ("gamma", "delta"),
    "basis": ("n",),
    "finite": ("values",),
}


def sequence_from_json(obj) -> SymbolicSequence:
    """Parse {"family": ..., ...} (a dict or a JSON string) into a family."""
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise SequenceError(f"sequence is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise SequenceError("sequence JSON must be an object")
    family = obj.get("family")
    if family not in _FAMILY_FIELDS:
        raise SequenceError(f"unknown family {family!r}; expected one of {sorted(_FAMILY_FIELDS)}")
    unknown = set(obj) - {"family", *_FAMILY_FIELDS[family]}
    if unknown:
        raise SequenceError(f"unexpected keys for {family}: {sorted(unknown)}")
    try:
        if family == "powerlog":
            return PowerLog(obj["a"], obj.get("b", 0.0))
        if family == "spike":
            return LacunarySpike(obj["gamma"], obj.get("delta", 0.0))
        if family == "basis":
            return UnitBasis(obj["n"])
        values = obj["values"]
        if not isinstance(values, list):
            raise SequenceError("finite family needs a list of values")
        return FiniteSupport(tuple(values))
    except KeyError as exc:
        raise SequenceError(f"{family} family is missing {exc.args[0]!r}") from None
    except TypeError as exc:
        raise SequenceError(str(exc)) from None


def sequence_to_json(seq: SymbolicSequence) -> dict[str, Any]:
    if isinstance(seq, PowerLog):
        return {"family": "powerlog", "a": seq.a, "b": seq.b}
    if isinstance(seq, LacunarySpike):
        return {"family": "spike", "gamma": seq.gamma, "delta": seq.delta}
    if isinstance(seq, UnitBasis):
        return {"family": "basis", "n": seq.n}
    if isinstance(seq, FiniteSupport):
        return {"family": "finite", "values": list(seq.values)}
    raise SequenceError(f"cannot serialize {type(seq).__name__}")
