"""Certified two-sided enclosures of the l_p, ces(p) and d(p) norms.

A norm enclosure combines an exactly summed prefix (compensated summation)
with a tail bound obtained by integral comparison for eventually monotone
terms, or by ratio bounds over dyadic blocks for spikes. When the tail
diverges the enclosure carries a divergence certificate instead: an
explicit minorant of the tail exceeding ``DIVERGENCE_THRESHOLD``.

All bounds are computed in double precision; in lieu of directed rounding
each upper bound is inflated by the relative slack ``SLACK`` in p-th power
space. Rounding errors of the compensated sums and closed-form tails are
relative, so a relative slack keeps tiny norms tight.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import mpmath
import numpy as np

from . import ops
from .sequences import (
    FiniteSupport,
    LacunarySpike,
    PowerLog,
    SequenceError,
    UnitBasis,
    powerlog_peak,
    support_end,
    tail_monotone_index,
    truncate,
)

__all__ = [
    "SLACK",
    "DIVERGENCE_THRESHOLD",
    "Method",
    "NormEnclosure",
    "ConjugateExponent",
    "conjugate",
    "lp_norm",
    "ces_norm",
    "d_norm",
    "norm",
    "cesaro_image_d_norm",
    "powerlog_tail_integral",
    "dyadic_tail",
]

SLACK = 1e-9
DIVERGENCE_THRESHOLD = 1e6
_LN2 = math.log(2.0)
_EXPLICIT_BLOCKS = 64


class Method(enum.Enum):
    EXACT_FINITE = "EXACT_FINITE"
    INTEGRAL_TAIL = "INTEGRAL_TAIL"
    DIVERGENT_LOWER_BOUND = "DIVERGENT_LOWER_BOUND"


@dataclass(frozen=True)
class NormEnclosure:
    lo: float
    hi: float
    N: int
    method: Method
    certificate: dict[str, Any] | None = field(default=None, compare=False)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "lo": self.lo,
            "hi": self.hi if self.finite else None,
            "N": self.N,
            "method": self.method.value,
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


@dataclass(frozen=True)
class ConjugateExponent:
    p: float
    p_prime: float


def conjugate(p: float) -> ConjugateExponent:
    """p' = p/(p-1), the Hölder conjugate and the constant in Hardy's inequality."""
    p = float(p)
    if not math.isfinite(p) or p <= 1.0:
        raise ValueError(f"conjugate exponent needs 1 < p < inf, got {p!r}")
    return ConjugateExponent(p, p / (p - 1.0))


def _check_p(p: float, allow_one: bool = False) -> float:
    p = float(p)
    if not math.isfinite(p) or p < 1.0 or (p == 1.0 and not allow_one):
        raise ValueError(f"norm exponent must satisfy 1 < p < inf, got {p!r}")
    return p


def _check_N(N: int) -> int:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ValueError(f"truncation level must be a positive integer, got {N!r}")
    return int(N)


# ---------------------------------------------------------------------------
# tail bounds
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=1 << 16)
def powerlog_tail_integral(s: float, beta: float, N: float) -> float:
    """∫_N^∞ t^(-s) L(t)^(-beta) dt for N >= 1 (inf when divergent)."""
    if s < 1.0:
        return math.inf
    L = 1.0 + math.log(N)
    if s == 1.0:
        if beta <= 1.0:
            return math.inf
        return L ** (1.0 - beta) / (beta - 1.0)
    c = s - 1.0
    if beta == 0.0:
        return N ** (-c) / c
    # substitute u = L(t): e^c c^(beta-1) Γ(1-beta, c L(N))
    with mpmath.workdps(30):
        val = mpmath.exp(c) * mpmath.mpf(c) ** (beta - 1.0) * mpmath.gammainc(1.0 - beta, c * L)
        return float(val)


def _powerlog_minorant(s: float, beta: float, start: int, target: float) -> dict[str, Any]:
    """Certificate that ∑_{n>=start} n^(-s) L(n)^(-beta) >= target (terms nonincreasing)."""
    u0 = 1.0 + math.log(start)
    goal = target * (1.0 + 1e-6)
    c = 1.0 - s
    if c < 0.0 or (c == 0.0 and beta > 1.0):
        raise ValueError("series converges; no divergence certificate")
    if c == 0.0:
        if beta == 1.0:
            ln_u = math.log(u0) + goal
        else:
            ln_u = math.log(u0 ** (1.0 - beta) + goal * (1.0 - beta)) / (1.0 - beta)
    else:
        # u^(-beta) >= min(u0^-beta, U^-beta) on [u0, U]
        d = 1.0
        while True:
            U = u0 + d
            ln_w = min(-beta * math.log(u0), -beta * math.log(U))
            ln_val = ln_w + c * (u0 - 1.0) + math.log(math.expm1(min(c * d, 700.0))) - math.log(c)
            if ln_val >= math.log(goal):
                break
            d *= 2.0
        ln_u = math.log(U)
    return {"kind": "integral_minorant", "start": start, "ln_L_cut": ln_u, "value": target}


def _log_terms(theta: float, kappa: float, js: np.ndarray) -> np.ndarray:
    j = js.astype(np.float64)
    return theta * j * _LN2 + kappa * np.log(j)


def dyadic_tail(theta: float, kappa: float, J: int) -> float:
    """Upper bound on ∑_{j>J} 2^(theta j) j^kappa for J >= 1 (inf when divergent)."""
    J = max(1, int(J))
    if theta > 0.0:
        return math.inf
    if theta == 0.0:
        if kappa >= -1.0:
            return math.inf
        return J ** (kappa + 1.0) / (-kappa - 1.0)
    # pick J' with consecutive ratio 2^theta (1 + 1/j)^kappa <= 2^(theta/2) for j > J'
    Jp = J
    if kappa > 0.0:
        arg = -theta * _LN2 / (2.0 * kappa)
        need = 1.0 / math.expm1(arg) if arg < 700.0 else 0.0
        Jp = max(J, math.ceil(need))
    if Jp - J > 10_000_000:
        return math.inf
    total = 0.0
    if Jp > J:
        lt = _log_terms(theta, kappa, np.arange(J + 1, Jp + 1))
        if lt.max() > 700.0:
            return math.inf
        total = math.fsum(np.exp(lt))
    rho = 2.0 ** theta * max(1.0, (1.0 + 1.0 / (Jp + 1)) ** kappa)
    first = math.exp(_log_terms(theta, kappa, np.array([Jp + 1]))[0])
    return total + first / (1.0 - rho)


def _dyadic_minorant(theta: float, kappa: float, J: int, target: float) -> dict[str, Any]:
    """Certificate that ∑_{j>J} 2^(theta j) j^kappa >= target."""
    J = max(1, int(J))
    goal = target * (1.0 + 1e-6)
    if theta == 0.0 and kappa >= 0.0:
        # each term is at least 1
        last = J + math.ceil(goal)
        return {"kind": "explicit_block_sum", "from_block": J + 1, "to_block": last, "value": target}
    if theta == 0.0 and -1.0 <= kappa < 0.0:
        if kappa == -1.0:
            ln_m = math.log(J + 1) + goal
        else:
            e = kappa + 1.0
            ln_m = math.log((J + 1) ** e + goal * e) / e
        return {"kind": "block_integral_minorant", "from_block": J + 1, "ln_last_block": ln_m, "value": target}
    if theta < 0.0 or (theta == 0.0 and kappa < -1.0):
        raise ValueError("block series converges; no divergence certificate")
    total = 0.0
    lo = J + 1
    chunk = 4096
    while lo < J + 50_000_000:
        js = np.arange(lo, lo + chunk)
        lt = _log_terms(theta, kappa, js)
        # cumulative in log space to avoid overflow
        vals = np.exp(np.minimum(lt, 700.0))
        csum = total + np.cumsum(vals)
        hit = np.nonzero(csum >= goal)[0]
        if hit.size:
            last = int(js[hit[0]])
            return {"kind": "explicit_block_sum", "from_block": J + 1, "to_block": last, "value": target}
        total = float(csum[-1])
        lo += chunk
        chunk = min(chunk * 2, 1 << 20)
    raise ValueError("divergence too slow to certify")


def _divergent(prefix: float, p: float, N: int, certificate: dict[str, Any]) -> NormEnclosure:
    lo = (prefix + certificate["value"]) ** (1.0 / p)
    return NormEnclosure(lo, math.inf, N, Method.DIVERGENT_LOWER_BOUND, certificate)


def _exact(total: float, p: float, N: int) -> NormEnclosure:
    v = total ** (1.0 / p)
    return NormEnclosure(v, v, N, Method.EXACT_FINITE)


def _upper(total: float, p: float) -> float:
    return (total * (1.0 + SLACK)) ** (1.0 / p)


def _pow_sum(terms: np.ndarray, p: float) -> float:
    return ops.compensated_sum(np.abs(terms) ** p)


def _dyadic_levels(N: int, floor: int, extra: int | None = None) -> list[int]:
    """N, N/2, N/4, ... plus every power of two, ``floor`` and ``extra``, all >= floor."""
    floor = max(floor, 1)
    levels = {floor, max(floor, extra or floor)}
    k = N
    while k >= floor:
        levels.add(k)
        k //= 2
    k = 1
    while k <= N:
        if k >= floor:
            levels.add(k)
        k *= 2
    return sorted((L for L in levels if L <= N), reverse=True)


def _enclose(
    powers: np.ndarray,
    offset: int,
    N: int,
    levels: list[int],
    tail: Callable[[int], float],
    p: float,
    reported_N: int | None = None,
) -> NormEnclosure:
    """lo = prefix up to N; hi = min over levels L of prefix up to L plus tail(L).

    ``powers[i]`` is the p-th power of the term at index ``offset + i``. Since
    the level set for 2N contains the one for N, doubling N never widens
    the enclosure.
    """
    csum = ops.compensated_prefix_sum(powers)

    def prefix(L: int) -> float:
        i = L - offset
        return float(csum[i]) if i >= 0 else 0.0

    best = math.inf
    for L in levels:
        t = tail(L)
        if math.isfinite(t):
            best = min(best, prefix(L) + t)
    lo = prefix(N) ** (1.0 / p)
    hi = _upper(best, p) if math.isfinite(best) else math.inf
    return NormEnclosure(lo, max(lo, hi), reported_N or N, Method.INTEGRAL_TAIL)


def _minkowski(parts: list[float], p: float) -> float:
    """(sum of p-th roots)^p: the p-th power bound for a sum of majorants."""
    return sum(v ** (1.0 / p) for v in parts) ** p


def _harmonic_tail(p: float, N: float) -> float:
    """sum_{n>N} n^-p <= N^(1-p)/(p-1)."""
    return N ** (1.0 - p) / (p - 1.0)


# ---------------------------------------------------------------------------
# l_p
# ---------------------------------------------------------------------------

def _spike_blocks(N: int) -> int:
    return max(1, int(N).bit_length() - 1)


def _powerlog_sum(seq: PowerLog, terms: np.ndarray, p: float, N: int) -> NormEnclosure:
    """Enclosure for terms bounded by the peak value, equal to x past the monotone index."""
    n0 = tail_monotone_index(seq)
    _, peak = powerlog_peak(seq)
    s, beta = seq.a * p, seq.b * p
    powers = terms ** p
    if not math.isfinite(powerlog_tail_integral(s, beta, N)):
        cert = _powerlog_minorant(s, beta, max(N + 1, n0), DIVERGENCE_THRESHOLD)
        return _divergent(ops.compensated_sum(powers), p, N, cert)

    def tail(L: int) -> float:
        top = max(L, n0)
        return (top - L) * peak ** p + powerlog_tail_integral(s, beta, top)

    return _enclose(powers, 1, N, _dyadic_levels(N, 1, n0), tail, p)


def lp_norm(seq, p: float, N: int = 1 << 20) -> NormEnclosure:
    """Enclosure of ‖x‖_p (p = 1 is accepted for finitely supported x)."""
    p = _check_p(p, allow_one=isinstance(seq, (UnitBasis, FiniteSupport)))
    N = _check_N(N)
    if isinstance(seq, UnitBasis):
        return _exact(1.0, p, max(N, seq.n))
    if isinstance(seq, FiniteSupport):
        return _exact(_pow_sum(np.asarray(seq.values), p), p, max(N, support_end(seq)))
    if isinstance(seq, PowerLog):
        return _powerlog_sum(seq, truncate(seq, N).terms, p, N)
    if isinstance(seq, LacunarySpike):
        # work over spike indices j: x_(2^j) = h_j
        J = _spike_blocks(N)
        N = max(N, 2)
        theta, kappa = seq.gamma * p, -seq.delta * p
        powers = seq.heights(np.arange(1, J + 1)) ** p
        if not math.isfinite(dyadic_tail(theta, kappa, J)):
            cert = _dyadic_minorant(theta, kappa, J, DIVERGENCE_THRESHOLD)
            return _divergent(ops.compensated_sum(powers), p, N, cert)
        levels = list(range(J, 0, -1))
        return _enclose(powers, 1, J, levels, lambda L: dyadic_tail(theta, kappa, L), p, reported_N=N)
    raise ops.UnsupportedError(f"no l_p enclosure for {type(seq).__name__}")


# ---------------------------------------------------------------------------
# d(p)
# ---------------------------------------------------------------------------

def d_norm(seq, p: float, N: int = 1 << 20) -> NormEnclosure:
    """Enclosure of ‖x‖_{d(p)} = ‖x̂‖_p, x̂ the decreasing envelope.

    p = 1 is accepted for finitely supported x, where the sum is exact.
    """
    p = _check_p(p, allow_one=isinstance(seq, (UnitBasis, FiniteSupport)))
    N = _check_N(N)
    if isinstance(seq, (UnitBasis, FiniteSupport)):
        env = ops.envelope_symbolic(seq)
        return _exact(env.power_sum(p), p, max(N, env.length))
    if isinstance(seq, PowerLog):
        # x̂ = x from the monotone index on, and never above the peak
        env = ops.envelope_symbolic(seq)
        return _powerlog_sum(seq, env.terms_at(np.arange(1, N + 1)), p, N)
    if isinstance(seq, LacunarySpike):
        if ops.spike_monotone_from(seq) is None:
            # unbounded: ‖x̂‖_p >= x̂_1 >= any single height
            j = 1
            while seq.log_heights(np.array([j]))[0] < math.log(DIVERGENCE_THRESHOLD):
                j = j * 2 if j < 1 << 20 else j + (1 << 20)
            height = math.exp(seq.log_heights(np.array([j]))[0])
            cert = {"kind": "unbounded", "block": j, "value": height}
            return NormEnclosure(height, math.inf, N, Method.DIVERGENT_LOWER_BOUND, cert)
        env = ops.envelope_symbolic(seq)
        N = max(N, 2)
        powers = env.terms_at(np.arange(1, N + 1)) ** p
        theta, kappa = 1.0 + seq.gamma * p, -seq.delta * p
        if not math.isfinite(dyadic_tail(theta, kappa, 1)):
            cert = _dyadic_minorant(theta, kappa, max(int(N).bit_length(), env.j0), 2.0 * DIVERGENCE_THRESHOLD)
            cert["value"] = DIVERGENCE_THRESHOLD
            return _divergent(ops.compensated_sum(powers), p, N, cert)

        def tail(L: int) -> float:
            # x̂ is h_J on the 2^(J-1) indices of block (2^(J-1), 2^J]
            Jn = int(L).bit_length()
            extra = [((1 << Jn) - L) * env.block_value(Jn) ** p]
            J0 = max(Jn, env.j0)
            extra += [2.0 ** (J - 1) * env.block_value(J) ** p for J in range(Jn + 1, J0 + 1)]
            return math.fsum(extra) + 0.5 * dyadic_tail(theta, kappa, J0)

        return _enclose(powers, 1, N, _dyadic_levels(N, 2), tail, p)
    raise ops.UnsupportedError(f"no d(p) enclosure for {type(seq).__name__}")


# ---------------------------------------------------------------------------
# ces(p)
# ---------------------------------------------------------------------------

def _ces_finite(seq, p: float, N: int) -> NormEnclosure:
    vals = np.abs(np.asarray(seq.values if isinstance(seq, FiniteSupport) else [1.0]))
    if isinstance(seq, UnitBasis):
        start = end = seq.n
    else:
        nz = np.nonzero(vals)[0]
        if nz.size == 0:
            return _exact(0.0, p, N)
        start, end = int(nz[0]) + 1, int(nz[-1]) + 1
        vals = vals[start - 1:end]
    N = max(N, end)
    # C(|x|)_k = 0 before the support starts; sum from there
    window = np.zeros(N - start + 1)
    window[: vals.size] = vals
    S = ops.compensated_prefix_sum(window)
    powers = (S / np.arange(start, N + 1, dtype=np.float64)) ** p
    total = float(S[-1])
    return _enclose(powers, start, N, _dyadic_levels(N, end), lambda L: total ** p * _harmonic_tail(p, L), p)


_SPLITS = (0.5, 0.75, 0.9)


_SEGMENT_RATIO = 2
_SEGMENTS = 48


def _segmented_tail(
    c: float, e: float, p: float, L: int, S_L: float, kappa_on: Callable[[float, float], float]
) -> float:
    """Bound on sum_{n>L} C(x)_n^p over the segments (M, 2M], (2M, 4M], ...

    With g(t) = t^c L(t)^-e, the caller guarantees g' >= kappa x on a segment,
    where kappa = kappa_on(M, M') > 0. Then G = g / kappa has G' >= x, so
    S_n <= E + G(n) with E = S_M - G(M), and C_n <= G(n)/n + E/n. For E < 0
    the factor 1 + E/G(n) increases with n and is bounded by its value at the
    segment end. The sums of (G(n)/n)^p come from the integral of
    t^(-(1-c)p) L(t)^(-e p), which must be nonincreasing past L.
    """
    s, beta = (1.0 - c) * p, e * p

    def g(t: float) -> float:
        return t ** c * (1.0 + math.log(t)) ** -e

    total = 0.0
    lo = float(L)
    S_up = S_L
    upper = powerlog_tail_integral(s, beta, lo)
    for k in range(_SEGMENTS + 1):
        last = k == _SEGMENTS
        hi = math.inf if last else lo * _SEGMENT_RATIO
        kappa = kappa_on(lo, hi)
        if kappa <= 0.0:
            return math.inf
        E = S_up - g(lo) / kappa
        rest = 0.0 if last else powerlog_tail_integral(s, beta, hi)
        seg = max(upper - rest, 0.0)
        if E >= 0.0:
            harmonic = _harmonic_tail(p, lo) - (0.0 if last else _harmonic_tail(p, hi))
            total += _minkowski([E ** p * max(harmonic, 0.0), seg / kappa ** p], p)
        else:
            factor = 1.0 if last else max(0.0, 1.0 + E * kappa / g(hi))
            total += factor ** p * seg / kappa ** p
        if not last:
            S_up = E + g(hi) / kappa
        lo, upper = hi, rest
    return total


def _ces_powerlog_tail(seq: PowerLog, p: float, L: int, S_L: float) -> float:
    """Bound on sum_{n>L} C(x)_n^p from S_n <= S_L + ∫_L^n x (x nonincreasing past L)."""
    a, b = seq.a, seq.b
    u = 1.0 + math.log(L)
    A = S_L ** p * _harmonic_tail(p, L)
    if a > 1.0 or (a == 1.0 and b > 1.0):
        # S_n <= K - T(n) with K = S_L + T(L), T the tail integral of x; T(n) >= T(M') on (M, M']
        K = S_L + powerlog_tail_integral(a, b, L)
        total, lo = 0.0, float(L)
        for _ in range(_SEGMENTS):
            hi = lo * _SEGMENT_RATIO
            top = max(K - powerlog_tail_integral(a, b, hi), 0.0)
            total += top ** p * max(_harmonic_tail(p, lo) - _harmonic_tail(p, hi), 0.0)
            lo = hi
        return total + K ** p * _harmonic_tail(p, lo)
    if a == 1.0:
        if b < 1.0:
            # ∫ x = L(t)^(1-b)/(1-b), and t^-1 L(t)^(1-b) decreases once L >= 1-b
            if u < 1.0 - b:
                return math.inf
            return _segmented_tail(0.0, b - 1.0, p, L, S_L, lambda lo, hi: 1.0 - b)
        # b = 1: S_n <= E + ln L(n) with E = S_L - ln L(L), and ln u <= u^eps / (e eps)
        if u < math.e:
            return math.inf
        eps = 1.0 / math.log(u)
        E = max(S_L - math.log(u), 0.0)
        B = powerlog_tail_integral(p, -eps * p, L) / (math.e * eps) ** p
        return _minkowski([E ** p * _harmonic_tail(p, L), B], p)
    c = 1.0 - a

    def kappa_on(lo: float, hi: float) -> float:
        # (t x(t))' = x (c - b/L(t)); the factor is monotone in t, so check the worse end
        if b > 0.0:
            return c - b / (1.0 + math.log(lo))
        return c - b / (1.0 + math.log(hi)) if math.isfinite(hi) else c

    best = _segmented_tail(c, b, p, L, S_L, kappa_on)
    if b > 0.0:
        # in u = L(s): split ∫_{u0}^{U} e^(c(u-1)) u^-b du at theta U
        for theta in _SPLITS:
            e = 1.0 - c * theta
            if p * e <= 1.0:
                continue
            B = powerlog_tail_integral(a * p, b * p, L) * (theta ** -b / c) ** p
            K2 = u ** -b * math.exp(-c * (1.0 - theta)) / c
            D = K2 ** p * _harmonic_tail(p * e, L)
            best = min(best, _minkowski([A, B, D], p))
    return best


def _ces_powerlog(seq: PowerLog, p: float, N: int) -> NormEnclosure:
    a, b = seq.a, seq.b
    n0 = tail_monotone_index(seq)
    _, peak = powerlog_peak(seq)
    x = truncate(seq, N).terms
    S = ops.compensated_prefix_sum(x)
    powers = (S / np.arange(1, N + 1, dtype=np.float64)) ** p
    if a < 1.0 and not math.isfinite(powerlog_tail_integral(a * p, b * p, N)):
        # C_n >= x_n / 2 once n >= 2 n0
        start = max(N + 1, 2 * n0)
        cert = _powerlog_minorant(a * p, b * p, start, 2.0 ** p * DIVERGENCE_THRESHOLD)
        cert["value"] = DIVERGENCE_THRESHOLD
        return _divergent(ops.compensated_sum(powers), p, N, cert)

    def tail(L: int) -> float:
        S_L = float(S[L - 1])
        if L >= n0:
            return _ces_powerlog_tail(seq, p, L, S_L)
        # below the monotone index every term is at most the peak
        S_top = S_L + (n0 - L) * peak
        head = S_top ** p * (L ** (1.0 - p) - n0 ** (1.0 - p)) / (p - 1.0)
        return head + _ces_powerlog_tail(seq, p, n0, S_top)

    return _enclose(powers, 1, N, _dyadic_levels(N, 1, n0), tail, p)


def _log_block_weight(J: int, p: float) -> float:
    """ln of ∫_{2^J - 1}^{2^(J+1) - 1} t^-p dt, an upper bound on sum n^-p over block J."""
    lo = (1 - p) * math.log(2.0 ** J - 1.0)
    hi = (1 - p) * math.log(2.0 ** (J + 1) - 1.0)
    return lo + math.log(-math.expm1(hi - lo)) - math.log(p - 1.0)


def _ces_spike_tail(seq: LacunarySpike, p: float, L: int, H: float) -> float:
    """Bound on sum_{n>L} C(x)_n^p, using C_n = H_J / n on [2^J, 2^(J+1))."""
    g, dl = seq.gamma, seq.delta
    theta = g * p + 1.0 - p
    Jn = _spike_blocks(L)
    end = 2.0 ** (Jn + 1) - 1.0
    parts = [H ** p * (L ** (1.0 - p) - end ** (1.0 - p)) / (p - 1.0)] if end > L else []
    J_star = Jn + _EXPLICIT_BLOCKS
    logH = math.log(H) if H > 0 else -math.inf
    heights = seq.log_heights(np.arange(Jn + 1, J_star + 1))
    for J, lh in zip(range(Jn + 1, J_star + 1), heights):
        logH = float(np.logaddexp(logH, lh))
        parts.append(math.exp(p * logH + _log_block_weight(J, p)))
    explicit = math.fsum(parts)
    c_p = (1.0 - 2.0 ** -(J_star + 1)) ** (1.0 - p) / (p - 1.0)
    if g > 0.0:
        # H_J <= K h_J for J >= J*, by induction on H_{J+1}/h_{J+1} = 1 + (H_J/h_J)(h_J/h_{J+1})
        r = 2.0 ** -g * max(1.0, ((J_star + 1) / J_star) ** dl)
        if r >= 1.0:
            return math.inf
        K = max(math.exp(logH - heights[-1]), 1.0 / (1.0 - r))
        tail = K ** p * c_p * dyadic_tail(theta, -dl * p, J_star)
    elif g < 0.0 or dl > 1.0:
        H_inf = math.exp(logH) + dyadic_tail(g, -dl, J_star)
        tail = H_inf ** p * c_p * dyadic_tail(1.0 - p, 0.0, J_star)
    else:
        # H_J <= H_{J*} + J when delta <= 1
        tail = _minkowski(
            [math.exp(p * logH) * c_p * dyadic_tail(1.0 - p, 0.0, J_star), c_p * dyadic_tail(1.0 - p, p, J_star)],
            p,
        )
    return explicit + tail


def _ces_spike(seq: LacunarySpike, p: float, N: int) -> NormEnclosure:
    g, dl = seq.gamma, seq.delta
    N = max(N, 2)
    S = ops.compensated_prefix_sum(truncate(seq, N).terms)
    powers = (S / np.arange(1, N + 1, dtype=np.float64)) ** p
    theta = g * p + 1.0 - p
    converges = g < 1.0 and (theta < 0.0 or (theta == 0.0 and dl * p > 1.0))
    if not converges:
        # block J contributes at least h_J^p 2^-p 2^(J(1-p))
        cert = _dyadic_minorant(theta, -dl * p, _spike_blocks(N), 2.0 ** p * DIVERGENCE_THRESHOLD)
        cert["value"] = DIVERGENCE_THRESHOLD
        return _divergent(ops.compensated_sum(powers), p, N, cert)
    return _enclose(powers, 1, N, _dyadic_levels(N, 2), lambda L: _ces_spike_tail(seq, p, L, float(S[L - 1])), p)


def ces_norm(seq, p: float, N: int = 1 << 20) -> NormEnclosure:
    """Enclosure of ‖x‖_{ces(p)} = ‖C(|x|)‖_p."""
    p = _check_p(p)
    N = _check_N(N)
    if isinstance(seq, (UnitBasis, FiniteSupport)):
        return _ces_finite(seq, p, N)
    if isinstance(seq, PowerLog):
        return _ces_powerlog(seq, p, N)
    if isinstance(seq, LacunarySpike):
        return _ces_spike(seq, p, N)
    raise ops.UnsupportedError(f"no ces(p) enclosure for {type(seq).__name__}")


# ---------------------------------------------------------------------------
# d(p) of the Cesaro image
# ---------------------------------------------------------------------------

def _image_envelope_powers(c: np.ndarray, tail_sup: float, p: float) -> np.ndarray:
    return ops.envelope(ops.make_view(c, ops.TailKind.UNKNOWN), tail_sup).terms ** p


def cesaro_image_d_norm(seq, p: float, N: int = 1 << 20) -> NormEnclosure:
    """Enclosure of ‖C(|x|)‖_{d(p)}, the d(p) norm of the Cesaro means of |x|.

    Supported: finite support, power-log sequences that are nonincreasing
    from n = 1 (then C(|x|) is nonincreasing and the norm equals the ces(p)
    norm) and spikes with nonincreasing heights.
    """
    p = _check_p(p)
    N = _check_N(N)
    if isinstance(seq, PowerLog):
        if tail_monotone_index(seq) != 1:
            raise ops.UnsupportedError("C(|x|) envelope needs a power-log sequence nonincreasing from n = 1")
        return ces_norm(seq, p, N)
    if isinstance(seq, (UnitBasis, FiniteSupport)):
        # past the support C(|x|) = S / n is decreasing
        M = max(N, support_end(seq))
        S = ops.compensated_prefix_sum(np.abs(truncate(seq, M).terms))
        total = float(S[-1])
        n = np.arange(1, M + 1, dtype=np.float64)
        powers = _image_envelope_powers(S / n, total / (M + 1), p)
        prefix = ops.compensated_sum(powers)
        tail = total ** p * _harmonic_tail(p, M)
        lo = ops.compensated_sum(powers[:N]) ** (1.0 / p)
        hi = _upper(prefix + tail, p)
        return NormEnclosure(lo, hi, N, Method.INTEGRAL_TAIL)
    if isinstance(seq, LacunarySpike):
        if ops.spike_monotone_from(seq) != 1:
            raise ops.UnsupportedError("C(|x|) envelope needs nonincreasing spike heights")
        # C_n = H_J / n on block [2^J, 2^(J+1)); since h_(J+1) <= H_J the block
        # maxima H_J / 2^J are nonincreasing, so the tail supremum past the end of
        # a block is the next block start
        N = max(N, 2)
        J = _spike_blocks(N)
        M = (1 << (J + 1)) - 1
        S = ops.compensated_prefix_sum(truncate(seq, M + 1).terms)
        n = np.arange(1, M + 2, dtype=np.float64)
        c = S / n
        powers = _image_envelope_powers(c[:M], float(c[M]), p)
        H = float(S[M])
        h = float(seq.heights(np.array([J + 1]))[0])
        # H_K <= H_(J+1) + (K - J - 1) h for K > J, so H_K <= a + h K
        a = H - (J + 1) * h
        tail_parts = [h ** p * dyadic_tail(1.0 - p, p, J)]
        if a > 0.0:
            tail_parts.append(a ** p * dyadic_tail(1.0 - p, 0.0, J))
        tail = _minkowski(tail_parts, p)
        lo = ops.compensated_sum(powers[:N]) ** (1.0 / p)
        hi = _upper(ops.compensated_sum(powers) + tail, p)
        return NormEnclosure(lo, hi, N, Method.INTEGRAL_TAIL)
    raise ops.UnsupportedError(f"no d(p) enclosure of C(|x|) for {type(seq).__name__}")


_BY_SCALE = {"ELL": lp_norm, "CES": ces_norm, "D": d_norm}


def norm(seq, scale: str, p: float, N: int = 1 << 20) -> NormEnclosure:
    try:
        fn = _BY_SCALE[scale.upper()]
    except KeyError:
        raise SequenceError(f"unknown scale {scale!r}") from None
    return fn(seq, p, N)
