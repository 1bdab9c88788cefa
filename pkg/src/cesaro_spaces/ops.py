"""Cesàro averaging, its square, and the decreasing envelope.

Prefix sums go through a compensated (Neumaier) streaming kernel; the
envelope is a single right-to-left suffix-max sweep. The symbolic envelope
returns an exact description for every supported family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .sequences import (
    FiniteSupport,
    LacunarySpike,
    PowerLog,
    SequenceError,
    StepSequence,
    TailKind,
    TruncatedView,
    UnitBasis,
    evaluate,
    make_view,
    support_end,
    powerlog_peak,
    tail_monotone_index,
)

__all__ = [
    "UnsupportedError",
    "compensated_prefix_sum",
    "compensated_sum",
    "cesaro",
    "cesaro_iterate",
    "envelope",
    "envelope_symbolic",
    "tail_sup",
    "spike_monotone_from",
    "MonotoneTailEnvelope",
    "DyadicEnvelope",
]


class UnsupportedError(SequenceError):
    """The requested transform has no certified answer for this family."""


@numba.njit(cache=True)
def _neumaier_prefix(x, out):
    s = 0.0
    c = 0.0
    for i in range(x.size):
        v = x[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i] = s + c


@numba.njit(cache=True)
def _neumaier_sum(x):
    s = 0.0
    c = 0.0
    for i in range(x.size):
        v = x[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def compensated_prefix_sum(values) -> np.ndarray:
    x = np.ascontiguousarray(values, dtype=np.float64)
    out = np.empty_like(x)
    if x.size:
        _neumaier_prefix(x, out)
    return out


def compensated_sum(values) -> float:
    x = np.ascontiguousarray(values, dtype=np.float64)
    return float(_neumaier_sum(x)) if x.size else 0.0


def cesaro(view: TruncatedView) -> TruncatedView:
    """Prefix means (1/k) * sum_{i<=k} x_i of a finite view."""
    prefix = compensated_prefix_sum(view.terms)
    k = np.arange(1, view.N + 1, dtype=np.float64)
    return make_view(prefix / k, TailKind.UNKNOWN)


def cesaro_iterate(view: TruncatedView, times: int) -> TruncatedView:
    if times not in (1, 2):
        raise ValueError(f"only C and C^2 are supported, got times={times!r}")
    out = cesaro(view)
    return cesaro(out) if times == 2 else out


def envelope(view: TruncatedView, tail_sup: float) -> TruncatedView:
    """Suffix suprema max(tail_sup, max_{n<=k<=N} |x_k|).

    ``tail_sup`` must be the supremum of |x_k| over k > N for the infinite
    sequence; see :func:`tail_sup`.
    """
    tail_sup = float(tail_sup)
    if not tail_sup >= 0.0:
        raise ValueError(f"tail supremum must be nonnegative, got {tail_sup!r}")
    mags = np.abs(view.terms)
    suffix = np.maximum.accumulate(mags[::-1])[::-1]
    out = np.maximum(suffix, tail_sup)
    if view.tail_kind is TailKind.ZERO and tail_sup == 0.0:
        return make_view(out, TailKind.ZERO)
    return make_view(out, TailKind.EVENTUALLY_MONOTONE, 1)


def spike_monotone_from(seq: LacunarySpike) -> int | None:
    """Least block j0 from which the spike heights are nonincreasing, or None."""
    if seq.gamma > 0:
        return None
    if seq.gamma == 0 or seq.delta >= 0:
        return 1
    # gamma*ln2 - delta/j <= 0  iff  j >= |delta| / (|gamma| ln 2)
    return max(1, math.ceil(-seq.delta / (-seq.gamma * math.log(2.0))) + 1)


def _ceil_log2(m: np.ndarray) -> np.ndarray:
    # bit_length(m - 1); exact while m - 1 < 2**53
    m = np.asarray(m, dtype=np.int64)
    out = np.zeros(m.shape, dtype=np.int64)
    big = m > 1
    out[big] = np.frexp((m[big] - 1).astype(np.float64))[1]
    return out


@dataclass(frozen=True)
class MonotoneTailEnvelope:
    """Envelope of a power-log sequence whose terms peak at ``peak_index``.

    The terms rise up to the peak and fall after it, so the envelope is the
    peak value up to there and the sequence itself beyond.
    """

    source: PowerLog
    peak_index: int
    peak_value: float
    monotone_from: int = field(default=1, init=False)

    def terms_at(self, ns) -> np.ndarray:
        n = np.asarray(ns, dtype=np.int64)
        out = self.source.terms_at(n)
        out[n <= self.peak_index] = self.peak_value
        return out


@dataclass(frozen=True)
class DyadicEnvelope:
    """Envelope of a spike: constant on the blocks (2^(J-1), 2^J].

    x̂_m = sup_{j >= J(m)} h_j with J(m) = max(1, ceil(log2 m)).
    """

    source: LacunarySpike
    j0: int
    monotone_from: int = field(default=1, init=False)

    def block_value(self, J: int) -> float:
        J = max(1, int(J))
        if J >= self.j0:
            return float(self.source.heights(np.array([J]))[0])
        return float(self.source.heights(np.arange(J, self.j0 + 1)).max())

    def block_values(self, Js) -> np.ndarray:
        Js = np.maximum(np.asarray(Js, dtype=np.int64), 1)
        out = self.source.heights(Js)
        early = Js < self.j0
        if early.any():
            window = self.source.heights(np.arange(1, self.j0 + 1))
            suffix = np.maximum.accumulate(window[::-1])[::-1]
            out[early] = suffix[Js[early] - 1]
        return out

    def terms_at(self, ns) -> np.ndarray:
        return self.block_values(_ceil_log2(ns))


def envelope_symbolic(seq):
    """Exact decreasing envelope of a supported family.

    Raises UnsupportedError for spikes with growing heights (gamma > 0): their
    envelope is identically +inf, so they lie outside every d(p).
    """
    if isinstance(seq, UnitBasis):
        return StepSequence(((1.0, seq.n),))
    if isinstance(seq, FiniteSupport):
        mags = np.abs(np.asarray(seq.values, dtype=np.float64))
        end = support_end(seq)
        suffix = np.maximum.accumulate(mags[:end][::-1])[::-1]
        runs: list[tuple[float, int]] = []
        for v in suffix:
            if runs and runs[-1][0] == v:
                runs[-1] = (v, runs[-1][1] + 1)
            else:
                runs.append((float(v), 1))
        return StepSequence(tuple(runs))
    if isinstance(seq, PowerLog):
        if tail_monotone_index(seq) == 1:
            return seq
        return MonotoneTailEnvelope(seq, *powerlog_peak(seq))
    if isinstance(seq, LacunarySpike):
        j0 = spike_monotone_from(seq)
        if j0 is None:
            raise UnsupportedError("spike heights grow (gamma > 0): the envelope is infinite")
        return DyadicEnvelope(seq, j0)
    raise UnsupportedError(f"no symbolic envelope for {type(seq).__name__}")


def tail_sup(seq, N: int) -> float:
    """sup_{k > N} |x_k| of the infinite sequence (may be +inf)."""
    if isinstance(seq, (UnitBasis, FiniteSupport, StepSequence)):
        end = support_end(seq)
        if end <= N:
            return 0.0
        return float(np.abs(seq.terms_at(np.arange(N + 1, end + 1))).max())
    if isinstance(seq, PowerLog):
        peak, value = powerlog_peak(seq)
        return value if N + 1 <= peak else evaluate(seq, N + 1)
    if isinstance(seq, LacunarySpike):
        j0 = spike_monotone_from(seq)
        if j0 is None:
            return math.inf
        return DyadicEnvelope(seq, j0).block_value(int(N).bit_length())
    if isinstance(seq, (MonotoneTailEnvelope, DyadicEnvelope)):
        return float(seq.terms_at(np.array([N + 1]))[0])
    raise UnsupportedError(f"no certified tail supremum for {type(seq).__name__}")
