"""Named numerical checks V1..V11 and report rendering.

Each check is a pure function of a :class:`Config`; ``run_all`` may run
them on a thread pool but always returns results in catalog order.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__, norms, ops
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
    membership,
)
from .sequences import FiniteSupport, LacunarySpike, PowerLog, SequenceError, UnitBasis, truncate
from .witness import build_witness, list_claims

__all__ = [
    "Config",
    "CheckResult",
    "CHECKS",
    "UnknownCheckError",
    "budget",
    "example_grid",
    "run_check",
    "run_all",
    "render_report",
    "plus_schedule",
    "minus_schedule",
]

THREADS_ENV = "CESARO_SPACES_THREADS"


class UnknownCheckError(SequenceError):
    """UNKNOWN_CHECK: the id is not in the catalog."""


@dataclass(frozen=True)
class Config:
    budget: str = "small"
    seed: int = 0
    hardy_N: int = 100_000
    hardy_families: int = 120
    basis_max_n: int = 10_000
    basis_N: int = 1 << 12
    norm_N: int = 1 << 14
    band_limit: float = 10.0
    schedule_len: int = 6
    timings: bool = False


def budget(name: str, seed: int = 0, timings: bool = False) -> Config:
    if name == "small":
        return Config("small", seed, timings=timings)
    if name == "full":
        return Config("full", seed, hardy_families=300, basis_N=1 << 18, norm_N=1 << 18, timings=timings)
    raise SequenceError(f"unknown budget {name!r}; expected small or full")


@dataclass
class CheckResult:
    id: str
    paper_ref: str
    status: str
    evidence: dict[str, Any] = field(default_factory=dict)
    runtime_ms: float | None = None

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

EXACT_PS = (1.25, 1.5, 2.0, 2.5, 3.0, 4.0)
PLUS_PS = (1.0, 1.5, 2.0, 3.0)
MINUS_PS = (1.5, 2.0, 3.0, math.inf)


def example_grid() -> list:
    fams: list = []
    for a in (0.0, 0.25, 0.4, 0.5, 0.6, 0.75, 1.0, 1.5, 2.0):
        for b in (-1.0, 0.0, 0.5, 1.0, 2.0):
            if a == 0.0 and b < 0.0:
                continue
            fams.append(PowerLog(a, b))
    for g in (-1.0, -0.5, -0.2, 0.0, 0.2, 0.25, 0.5, 0.75, 1.0, 1.5):
        for d in (-1.0, 0.0, 0.5, 1.0, 2.0):
            if g == 0.0 and d < 0.0:
                continue
            fams.append(LacunarySpike(g, d))
    fams += [UnitBasis(1), UnitBasis(9), FiniteSupport((0.0, 3.0, 1.0, 2.0)), FiniteSupport((1.0, -2.0, 0.5))]
    return fams


def all_grades() -> list[Grade]:
    return [Exact(p) for p in EXACT_PS] + [Plus(p) for p in PLUS_PS] + [Minus(p) for p in MINUS_PS]


def plus_schedule(p: float, k_max: int = 6) -> list[float]:
    """p_k = p + 1/k, decreasing to p."""
    return [p + 1.0 / k for k in range(1, k_max + 1)]


def minus_schedule(p: float, k_max: int = 6) -> list[float]:
    """p_k = p - (p-1)/(k+1), increasing to p (p_k = k + 1 when p = inf)."""
    if p == math.inf:
        return [float(k + 1) for k in range(1, k_max + 1)]
    return [p - (p - 1.0) / (k + 1) for k in range(1, k_max + 1)]


def _json_num(x: float) -> float | None:
    return x if math.isfinite(x) else None


def _status(failures: list, checked: int) -> str:
    if failures:
        return "FAIL"
    return "PASS" if checked else "SKIP"


# ---------------------------------------------------------------------------
# V1..V11
# ---------------------------------------------------------------------------

def _hardy_samples(cfg: Config) -> list[tuple[str, np.ndarray]]:
    rng = np.random.default_rng(cfg.seed)
    samples: list[tuple[str, np.ndarray]] = []
    half = cfg.hardy_families // 2
    for i in range(half):
        size = int(rng.integers(1, 2000))
        vals = rng.standard_normal(size) * rng.exponential(1.0, size)
        if i % 3 == 0:
            vals[rng.random(size) < 0.7] = 0.0
        samples.append((f"finite[{i}]", vals))
    for i in range(cfg.hardy_families - half):
        if i % 2 == 0:
            seq = PowerLog(float(rng.uniform(0.0, 2.5)), float(rng.uniform(0.0, 2.0)))
        else:
            seq = LacunarySpike(float(rng.uniform(-1.0, 0.9)), float(rng.uniform(0.0, 2.0)))
        samples.append((repr(seq), truncate(seq, cfg.hardy_N).terms))
    return samples


def check_hardy(cfg: Config) -> tuple[str, dict]:
    worst: dict[str, float] = {}
    failures = []
    samples = _hardy_samples(cfg)
    for p in (1.5, 2.0, 4.0):
        # looked up through the module so a patched conjugate is observed
        bound = norms.conjugate(p).p_prime
        worst[str(p)] = 0.0
        for name, x in samples:
            ax = np.abs(x)
            denom = ops.compensated_sum(ax ** p) ** (1.0 / p)
            if denom == 0.0:
                continue
            means = ops.compensated_prefix_sum(ax) / np.arange(1, ax.size + 1)
            ratio = ops.compensated_sum(means ** p) ** (1.0 / p) / denom
            worst[str(p)] = max(worst[str(p)], ratio)
            if ratio > bound + 1e-9:
                failures.append({"p": p, "family": name, "ratio": ratio, "bound": bound})
    ev = {"families": len(samples), "N": cfg.hardy_N, "max_ratio": worst, "failures": failures[:10]}
    return _status(failures, len(samples)), ev


def check_coordinate_bounds(cfg: Config) -> tuple[str, dict]:
    failures = []
    checked = 0
    n = np.arange(1, 1001)
    for seq in example_grid():
        x = np.abs(seq.terms_at(n))
        for p in (1.5, 2.0, 4.0):
            ces = norms.ces_norm(seq, p, cfg.norm_N)
            d = None
            try:
                d = norms.d_norm(seq, p, cfg.norm_N)
            except ops.UnsupportedError:
                pass
            checked += 1
            # the certified lower bound already dominates, so the true norm does too
            if np.any(x > n * ces.lo + 1e-9):
                failures.append({"family": repr(seq), "p": p, "bound": "ces"})
            if d is not None and d.finite and np.any(x > d.lo + 1e-9):
                failures.append({"family": repr(seq), "p": p, "bound": "d"})
    return _status(failures, checked), {"pairs": checked, "max_n": 1000, "failures": failures[:10]}


def check_dnorm_basis(cfg: Config) -> tuple[str, dict]:
    worst = 0.0
    failures = []
    for p in (1.25, 2.0, 3.0):
        for n in range(1, cfg.basis_max_n + 1):
            enc = norms.d_norm(UnitBasis(n), p, 1)
            exact = n ** (1.0 / p)
            err = max(abs(enc.lo - exact), abs(enc.hi - exact)) / exact
            worst = max(worst, err)
            if err >= 1e-12:
                failures.append({"n": n, "p": p, "rel_err": err})
    return _status(failures, 1), {"max_n": cfg.basis_max_n, "max_rel_err": worst, "failures": failures[:10]}


def basis_band(q: float, max_n: int, N: int) -> dict[str, Any]:
    """Bounds on the spread of ‖e_n‖_{ces(q)} * n^(1/q') over n <= max_n."""
    scale = 1.0 / norms.conjugate(q).p_prime
    lo_min = hi_min = math.inf
    lo_max = hi_max = 0.0
    for n in range(1, max_n + 1):
        enc = norms.ces_norm(UnitBasis(n), q, max(N, 2 * n))
        w = n ** scale
        lo_min, lo_max = min(lo_min, enc.lo * w), max(lo_max, enc.lo * w)
        hi_min, hi_max = min(hi_min, enc.hi * w), max(hi_max, enc.hi * w)
    return {
        "q": q,
        "ratio_lo": lo_min,
        "ratio_hi": _json_num(hi_max),
        "band_upper": _json_num(hi_max / lo_min),
        "band_lower": lo_max / hi_min,
    }


def check_cesnorm_basis(cfg: Config) -> tuple[str, dict]:
    bands = [basis_band(q, cfg.basis_max_n, cfg.basis_N) for q in (1.5, 2.0, 4.0)]
    if any(b["band_upper"] is None for b in bands):
        return "SKIP", {"reason": "infinite enclosure", "bands": bands}
    fails = [b for b in bands if b["band_lower"] > cfg.band_limit]
    noisy = [b for b in bands if b["band_upper"] > cfg.band_limit]
    status = "FAIL" if fails else ("SKIP" if noisy else "PASS")
    ev = {"limit": cfg.band_limit, "bands": bands}
    if status == "SKIP":
        ev["reason"] = "enclosures too wide to bound the band at this budget"
    return status, ev


def _equal_verdicts(pairs: Callable[[Any, Grade], list[tuple[str, Any, Any, Scale, Scale]]], grades: list[Grade]):
    failures = []
    skipped = checked = 0
    for seq in example_grid():
        for grade in grades:
            for label, left, right, lscale, rscale in pairs(seq, grade):
                lv = membership(left, SpaceSpec(lscale, grade))
                rv = membership(right, SpaceSpec(rscale, grade))
                if Status.UNSUPPORTED in (lv.status, rv.status):
                    skipped += 1
                    continue
                checked += 1
                if lv.status is not rv.status:
                    failures.append({"family": repr(seq), "grade": str(grade), "pair": label,
                                     "left": lv.certificate, "right": rv.certificate})
    return _status(failures, checked), {"compared": checked, "skipped": skipped, "failures": failures[:10]}


def _bennett_pairs(seq, grade):
    return [(f"C vs C^2 in {s.value}", CesaroImage(seq, 1), CesaroImage(seq, 2), s, s) for s in Scale]


def check_bennett_base(cfg: Config) -> tuple[str, dict]:
    return _equal_verdicts(_bennett_pairs, [Exact(p) for p in EXACT_PS])


def check_bennett_graded(cfg: Config) -> tuple[str, dict]:
    return _equal_verdicts(_bennett_pairs, [Plus(p) for p in PLUS_PS] + [Minus(p) for p in MINUS_PS])


def check_solid_core(cfg: Config) -> tuple[str, dict]:
    def pairs(seq, grade):
        return [
            ("C(|x|) in d vs x in ces", CesaroImage(seq), seq, Scale.D, Scale.CES),
            ("C(|x|) in ell vs x in ces", CesaroImage(seq), seq, Scale.ELL, Scale.CES),
        ]
    return _equal_verdicts(pairs, all_grades())


def _is_in(target, scale: Scale, grade: Grade) -> bool:
    return membership(target, SpaceSpec(scale, grade)).status is Status.IN


def check_inclusion_lattice(cfg: Config) -> tuple[str, dict]:
    failures: list[dict] = []
    implications = 0
    for seq in example_grid():
        for scale in Scale:
            for p in EXACT_PS:
                minus_in = _is_in(seq, scale, Minus(p))
                below = any(_is_in(seq, scale, Exact(q)) for q in EXACT_PS if q < p)
                implications += 2
                if below and not minus_in:
                    failures.append({"family": repr(seq), "rule": f"Exact(q<{p}) => Minus({p})", "scale": scale.value})
                if minus_in and not _is_in(seq, scale, Plus(p)):
                    failures.append({"family": repr(seq), "rule": f"Minus({p}) => Plus({p})", "scale": scale.value})
        for p in EXACT_PS:
            for q in EXACT_PS:
                for r in EXACT_PS:
                    if not p <= q <= r:
                        continue
                    implications += 2
                    if _is_in(seq, Scale.D, Exact(p)) and not _is_in(seq, Scale.ELL, Exact(q)):
                        failures.append({"family": repr(seq), "rule": f"d({p}) => l({q})"})
                    if _is_in(seq, Scale.ELL, Exact(q)) and not _is_in(seq, Scale.CES, Exact(r)):
                        failures.append({"family": repr(seq), "rule": f"l({q}) => ces({r})"})
    witnesses = 0
    for info in list_claims():
        for params in info.defaults:
            try:
                build_witness(info.id, params.get("p"), params.get("q"))
                witnesses += 1
            except SequenceError as exc:
                failures.append({"claim": info.id, "params": params, "error": str(exc)})
    ev = {"implications": implications, "witnesses_built": witnesses, "failures": failures[:10]}
    return _status(failures, implications), ev


def _least_n(pred: Callable[[int], bool], hi: int) -> int | None:
    """Least n in [1, hi] with pred(n), for pred monotone false->true."""
    if not pred(hi):
        return None
    lo = 1
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _ces_threshold_index(q: float, bound: float) -> int:
    """Least n whose ces(q) enclosure for e_n is guaranteed below ``bound``."""
    def small(n: int) -> bool:
        return (n ** -q + n ** (1.0 - q) / (q - 1.0)) * (1.0 + norms.SLACK) < bound ** q
    return _least_n(small, 1 << 60)


def check_basis_behavior(cfg: Config) -> tuple[str, dict]:
    failures: list[dict] = []
    evidence: dict[str, Any] = {}
    for label, sched in (("plus", plus_schedule(2.0, cfg.schedule_len)), ("minus", minus_schedule(2.0, cfg.schedule_len))):
        p1 = sched[0]
        vals = [norms.d_norm(UnitBasis(n), p1, 1).lo for n in range(1, cfg.basis_max_n + 1)]
        increasing = all(b > a for a, b in zip(vals, vals[1:]))
        limit = math.ceil(10.0 ** (3.0 * p1)) + 1
        first = _least_n(lambda n: norms.d_norm(UnitBasis(n), p1, 1).lo > 1e3, limit)
        if not increasing or first is None:
            failures.append({"schedule": label, "p1": p1, "increasing": increasing, "first_above_1e3": first})
        rows = []
        for q in sched:
            n0 = _ces_threshold_index(q, 1e-2)
            ns = list(range(n0, n0 + 256)) + [n0 << i for i in range(9, 31, 3)]
            his = [norms.ces_norm(UnitBasis(n), q, n + 4096).hi for n in ns]
            below = all(h < 1e-2 for h in his)
            decreasing = all(b < a for a, b in zip(his, his[1:]))
            rows.append({"q": q, "n0": n0, "scanned": len(ns), "max_hi": max(his), "decreasing": decreasing})
            if not (below and decreasing):
                failures.append({"schedule": label, "q": q, "n0": n0, "below": below, "decreasing": decreasing})
        evidence[label] = {"schedule": sched, "d_first_above_1e3": first, "d_limit": limit, "ces": rows}
    evidence["failures"] = failures
    return _status(failures, 1), evidence


def weighted_seminorm(values, t: float) -> float:
    """sum_k |x_k| k^t over a finitely supported sequence."""
    x = np.abs(np.asarray(values, dtype=np.float64))
    k = np.arange(1, x.size + 1, dtype=np.float64)
    nz = x != 0.0
    return math.fsum((x[nz] * k[nz] ** t).tolist())


def check_koethe_grading(cfg: Config) -> tuple[str, dict]:
    failures: list[dict] = []
    sched = plus_schedule(2.0, cfg.schedule_len)
    ts = [-1.0 / norms.conjugate(p).p_prime for p in sched]
    ns = (1, 10, 100, 1000)
    for t in ts:
        for n in ns:
            e = np.zeros(n)
            e[-1] = 1.0
            got = weighted_seminorm(e, t)
            if got != n ** t:
                failures.append({"t": t, "n": n, "seminorm": got, "expected": n ** t})
    for n in ns:
        # Λ^1_0 weights n^(-1/k) rise with k, as do n^(t_k)
        lam = [n ** (-1.0 / k) for k in range(1, cfg.schedule_len + 1)]
        pw = [n ** t for t in ts]
        if n > 1 and not (all(b > a for a, b in zip(lam, lam[1:])) and all(b > a for a, b in zip(pw, pw[1:]))):
            failures.append({"n": n, "rule": "weights increase with k"})
        encs = [norms.ces_norm(UnitBasis(n), p, 1024 * n) for p in sched]
        if not all(b.lo > a.hi for a, b in zip(encs, encs[1:])):
            failures.append({"n": n, "rule": "ces(p_k) norms increase with k"})
    bands = [basis_band(q, min(cfg.basis_max_n, 1000), cfg.basis_N) for q in sched]
    for b in bands:
        if b["band_upper"] is None or b["band_upper"] > cfg.band_limit:
            failures.append({"q": b["q"], "rule": "two-sided basis band", "band_upper": b["band_upper"]})
    ev = {"schedule": sched, "t": ts, "bands": bands, "failures": failures[:10]}
    return _status(failures, 1), ev


def check_cesaro_maps_into(cfg: Config) -> tuple[str, dict]:
    failures = []
    checked = 0
    for seq in example_grid():
        for grade in all_grades():
            if not _is_in(seq, Scale.CES, grade):
                continue
            checked += 1
            if not _is_in(CesaroImage(seq), Scale.D, grade):
                failures.append({"family": repr(seq), "grade": str(grade)})
    return _status(failures, checked), {"members": checked, "failures": failures[:10]}


CHECKS: dict[str, tuple[str, Callable[[Config], tuple[str, dict]]]] = {
    "V1": ("hardy: ‖C(|x|)‖_p <= p' ‖x‖_p for 1 < p < inf", check_hardy),
    "V2": ("coordinate-bounds: |x_n| <= n ‖x‖_ces(p) and |x_n| <= ‖x‖_d(p)", check_coordinate_bounds),
    "V3": ("dnorm-basis-exact: ‖e_n‖_d(p) = n^(1/p)", check_dnorm_basis),
    "V4": ("cesnorm-basis-asymptotic: ‖e_n‖_ces(q) n^(1/q') bounded above and below", check_cesnorm_basis),
    "V5": ("bennett-base: C(|x|) and C^2(|x|) share membership in l_p, ces(p), d(p)", check_bennett_base),
    "V6": ("bennett-graded: C(|x|) and C^2(|x|) share membership in the p+ and p- scales", check_bennett_graded),
    "V7": ("solid-core: C(|x|) in l or d at a grade iff x in ces at that grade", check_solid_core),
    "V8": ("inclusion-lattice: monotone inclusions across grades and scales, with proper-inclusion witnesses",
           check_inclusion_lattice),
    "V9": ("basis-behavior: e_n unbounded in d(p_1), e_n -> 0 in ces(p_k)", check_basis_behavior),
    "V10": ("koethe-grading: power weights n^t and ces(p_k) norms interleave on the unit basis", check_koethe_grading),
    "V11": ("cesaro-maps-into: x in ces at a grade implies C(|x|) in d at that grade", check_cesaro_maps_into),
}


def run_check(check_id: str, config: Config | None = None) -> CheckResult:
    cfg = config or Config()
    try:
        ref, fn = CHECKS[check_id]
    except KeyError:
        raise UnknownCheckError(f"UNKNOWN_CHECK: {check_id!r}; expected one of {', '.join(CHECKS)}") from None
    start = time.perf_counter()
    status, evidence = fn(cfg)
    elapsed = (time.perf_counter() - start) * 1e3
    return CheckResult(check_id, ref, status, evidence, round(elapsed, 3) if cfg.timings else None)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return max(1, min(n, len(CHECKS)))


def run_all(config: Config | None = None, ids: list[str] | None = None) -> list[CheckResult]:
    cfg = config or Config()
    ids = list(CHECKS) if ids is None else ids
    for i in ids:
        if i not in CHECKS:
            raise UnknownCheckError(f"UNKNOWN_CHECK: {i!r}")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda i: run_check(i, cfg), ids))
    order = {k: n for n, k in enumerate(CHECKS)}
    return sorted(results, key=lambda r: order[r.id])


def jsonable(obj: Any) -> Any:
    """Replace non-finite floats with None and numpy scalars with Python ones."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return jsonable(obj.item())
    return obj


def render_report(results: list[CheckResult], fmt: str = "json", config: Config | None = None) -> str:
    if fmt == "json":
        doc: dict[str, Any] = {}
        if config is not None:
            doc["version"] = __version__
            doc["seed"] = config.seed
            doc["config"] = asdict(config)
        doc["checks"] = [r.to_json() for r in results]
        return json.dumps(jsonable(doc), indent=2, sort_keys=False, allow_nan=False) + "\n"
    if fmt == "markdown":
        lines = ["| id | status | claim | runtime_ms |", "|---|---|---|---|"]
        for r in results:
            rt = "" if r.runtime_ms is None else f"{r.runtime_ms:.1f}"
            lines.append(f"| {r.id} | {r.status} | {r.paper_ref} | {rt} |")
        return "\n".join(lines) + "\n"
    raise SequenceError(f"unknown report format {fmt!r}; expected json or markdown")
