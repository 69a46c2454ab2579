"""Threshold formulas for random flag complexes and a Monte Carlo harness.

Logarithms are natural throughout.  Trials draw their graphs from
``Seed(master, stream)`` so any single trial can be replayed on its own, and
aggregation sorts by stream index so results do not depend on scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import IO, Any, Sequence

from scipy import stats

from .certify import vanishing_pipeline, zuk_certify
from .complex import build_skeleton, count_maximal_cliques
from .graph import Graph, Seed, component_count, is_connected, sample_gnp
from .homology import betti

__all__ = [
    "ThresholdRangeError",
    "upper_threshold",
    "lower_threshold",
    "critical_p",
    "expected_maximal_cliques",
    "poisson_mean",
    "pittel_probability",
    "STATISTICS",
    "TrialConfig",
    "ExperimentRecord",
    "PoissonFit",
    "SweepResult",
    "run_trials",
    "poisson_fit",
    "sweep",
    "success",
    "default_jobs",
    "write_jsonl",
    "sweep_csv",
]

JOBS_ENV = "RANDFLAG_JOBS"


class ThresholdRangeError(ValueError):
    """A threshold formula left the probability range at this ``n``."""


def _check_n(n: float) -> None:
    if not n > 1:
        raise ThresholdRangeError(f"vertex count must exceed 1, got {n}")


def upper_threshold(n: float, k: int, eps: float = 0.0) -> float:
    """``((k/2 + 1 + eps) ln n / n)^(1/(k+1))``: above it ``H^k`` vanishes w.h.p."""
    _check_n(n)
    x = (k / 2 + 1 + eps) * math.log(n) / n
    if not 0 <= x <= 1:
        raise ThresholdRangeError(f"upper threshold base {x:.6g} outside [0, 1] at n={n}, k={k}")
    return x ** (1.0 / (k + 1))


def lower_threshold(n: float, k: int, eps: float = 0.0) -> float:
    """``((k + 1 + eps) / n)^(1/k)``: start of the non-vanishing window."""
    _check_n(n)
    if k < 1:
        raise ValueError(f"degree must be at least 1, got {k}")
    x = (k + 1 + eps) / n
    if not 0 <= x <= 1:
        raise ThresholdRangeError(f"lower threshold base {x:.6g} outside [0, 1] at n={n}, k={k}")
    return x ** (1.0 / k)


def critical_p(n: float, k: int, c: float) -> float:
    """Edge probability in the critical window for maximal ``(k+1)``-cliques."""
    _check_n(n)
    ln = math.log(n)
    if ln <= 1 and k > 0:
        raise ThresholdRangeError(f"log log n undefined or negative at n={n}")
    inner = (k / 2 + 1) * ln + (k / 2) * math.log(ln) + c
    if not 0 < inner <= n:
        raise ThresholdRangeError(f"critical window numerator {inner:.6g} outside (0, n] at n={n}")
    return (inner / n) ** (1.0 / (k + 1))


def expected_maximal_cliques(n: int, k: int, p: float) -> float:
    """``C(n, k+1) p^C(k+1, 2) (1 - p^(k+1))^(n-k-1)``."""
    if not 0 <= p <= 1:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    if n < k + 1:
        return 0.0
    q, m = p ** (k + 1), n - k - 1
    # log1p keeps (1 - q)^m accurate when q is tiny and m huge.
    stay_maximal = 1.0 if m == 0 else 0.0 if q == 1.0 else math.exp(m * math.log1p(-q))
    return math.comb(n, k + 1) * p ** math.comb(k + 1, 2) * stay_maximal


def poisson_mean(k: int, c: float) -> float:
    """Limit of the expected number of maximal ``(k+1)``-cliques in the critical window."""
    if k < 1:
        raise ValueError(f"degree must be at least 1, got {k}")
    return (k / 2 + 1) ** (k / 2) / math.factorial(k + 1) * math.exp(-c)


def pittel_probability(c: float) -> float:
    """Limiting probability that ``G(n, c/n)`` is a forest."""
    if not 0 <= c < 1:
        raise ValueError(f"need 0 <= c < 1, got {c}")
    return math.sqrt(1 - c) * math.exp(c / 2 + c * c / 4)


# -- trials -----------------------------------------------------------------

STATISTICS = (
    "maximal_cliques",   # N_{k+1}
    "betti",             # beta_k of the flag complex
    "betti_profile",     # all reduced Betti numbers
    "connected",
    "certified",         # Garland certificate for H^k
    "has_t_certified",   # Zuk certificate
    "graph_betti1",      # cycle rank of the graph itself
)


@dataclass(frozen=True)
class TrialConfig:
    statistic: str
    n: int
    k: int = 1
    p: float | None = None
    c: float | None = None
    trials: int = 300
    seed: int = 0
    method: str = "modular"
    audit: bool = False
    stream_offset: int = 0

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ValueError(f"unknown statistic {self.statistic!r}; choose from {STATISTICS}")
        if (self.p is None) == (self.c is None):
            raise ValueError("give exactly one of p and c")
        if self.trials <= 0:
            raise ValueError("trials must be positive")
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        if self.k < 0 or (self.k < 1 and self.statistic in ("betti", "certified")):
            raise ValueError(f"degree k={self.k} invalid for statistic {self.statistic}")
        if self.statistic == "has_t_certified" and self.k != 1:
            raise ValueError("property (T) certification is the k=1 case")
        if self.method not in ("modular", "exact"):
            raise ValueError(f"unknown rank method {self.method!r}")
        if self.statistic == "connected" and self.n == 0:
            raise ValueError("connectivity needs at least one vertex")
        prob = self.edge_probability
        if not 0 <= prob <= 1:
            raise ValueError(f"edge probability {prob} outside [0, 1]")

    @property
    def edge_probability(self) -> float:
        if self.p is not None:
            return float(self.p)
        return critical_p(self.n, self.k, float(self.c))

    def to_json(self) -> dict[str, Any]:
        out = asdict(self)
        out["resolved_p"] = self.edge_probability
        return out


def _evaluate(cfg: TrialConfig, g: Graph) -> tuple[Any, dict[str, Any]]:
    s = cfg.statistic
    if s == "maximal_cliques":
        return count_maximal_cliques(g, cfg.k + 1), {}
    if s == "connected":
        return is_connected(g), {}
    if s == "graph_betti1":
        return g.edge_count - g.n + component_count(g), {}
    if s == "betti":
        sk = build_skeleton(g, cfg.k + 1)
        return betti(sk, cfg.method, max_degree=cfg.k).betti[cfg.k], {}
    if s == "betti_profile":
        sk = build_skeleton(g, max(g.n - 1, 0))
        return list(betti(sk, cfg.method, reduced=True).betti), {}
    if s == "certified":
        res = vanishing_pipeline(g, cfg.k, audit=cfg.audit)
        extra = {"betti_k": res.betti_k} if cfg.audit else {}
        return res.certificate.certified, extra
    if s == "has_t_certified":
        sk = build_skeleton(g, 2)
        cert = zuk_certify(sk)
        extra = {}
        if cfg.audit:
            extra["betti_k"] = betti(sk, "exact", max_degree=1).betti[1]
        return cert.certified, extra
    raise AssertionError(s)


def _run_stream(args: tuple[TrialConfig, int]) -> dict[str, Any]:
    cfg, stream = args
    g = sample_gnp(cfg.n, cfg.edge_probability, Seed(cfg.seed, stream))
    value, extra = _evaluate(cfg, g)
    return {"stream": stream, "value": value, **extra}


def success(cfg: TrialConfig, value: Any) -> bool:
    """Whether a trial value counts as the 'good' event for sweeps."""
    if isinstance(value, bool):
        return value
    if cfg.statistic == "betti_profile":
        return [d for d, x in enumerate(value) if x] == [cfg.k]
    return value == 0


@dataclass
class ExperimentRecord:
    config: TrialConfig
    trials: list[dict[str, Any]]
    aggregate: dict[str, Any]
    wall_time: float = field(default=0.0, compare=False)

    @property
    def values(self) -> list[Any]:
        return [t["value"] for t in self.trials]

    @property
    def success_fraction(self) -> float:
        return self.aggregate["success_fraction"]

    def summary(self) -> dict[str, Any]:
        return {"config": self.config.to_json(), "aggregate": self.aggregate, "wall_time": self.wall_time}


def _aggregate(cfg: TrialConfig, trials: list[dict[str, Any]]) -> dict[str, Any]:
    values = [t["value"] for t in trials]
    T = len(values)
    hits = [success(cfg, v) for v in values]
    frac = sum(hits) / T
    out: dict[str, Any] = {
        "trials": T,
        "success_fraction": frac,
        "success_ci95": 1.96 * math.sqrt(frac * (1 - frac) / T),
    }
    if cfg.statistic == "betti_profile":
        supports: dict[str, int] = {}
        for v in values:
            key = ",".join(str(d) for d, x in enumerate(v) if x)
            supports[key] = supports.get(key, 0) + 1
        out["support_counts"] = dict(sorted(supports.items()))
        return out
    xs = [float(v) for v in values]
    mean = sum(xs) / T
    var = sum((x - mean) ** 2 for x in xs) / (T - 1) if T > 1 else 0.0
    dist: dict[str, int] = {}
    for v in values:
        key = str(int(v))
        dist[key] = dist.get(key, 0) + 1
    out.update(
        mean=mean,
        variance=var,
        std_error=math.sqrt(var / T),
        ci95_half_width=1.96 * math.sqrt(var / T),
        distribution=dict(sorted(dist.items(), key=lambda kv: int(kv[0]))),
    )
    return out


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def run_trials(cfg: TrialConfig, jobs: int | None = None) -> ExperimentRecord:
    """Run ``cfg.trials`` independent trials on streams ``stream_offset + i``."""
    jobs = default_jobs() if jobs is None else jobs
    if cfg.statistic == "betti" and cfg.k < 1:
        raise ValueError("beta_k statistic needs k >= 1")
    start = time.perf_counter()
    work = [(cfg, cfg.stream_offset + i) for i in range(cfg.trials)]
    if jobs > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(_run_stream, work, chunksize=max(1, cfg.trials // (4 * jobs))))
    else:
        trials = [_run_stream(w) for w in work]
    trials.sort(key=lambda t: t["stream"])
    return ExperimentRecord(cfg, trials, _aggregate(cfg, trials), time.perf_counter() - start)


# -- Poisson goodness of fit -----------------------------------------------


@dataclass(frozen=True)
class PoissonFit:
    mu: float
    tv_distance: float
    chi2: float
    dof: int
    p_value: float
    cutoff: int

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def poisson_fit(record: ExperimentRecord | Sequence[int], mu: float) -> PoissonFit:
    """Total variation distance and Pearson chi-square against ``Pois(mu)``.

    The Poisson support is truncated at the first point where the remaining
    tail mass drops below 1e-6; the tail is added back in one piece so the
    distance is exact.
    """
    values = record.values if isinstance(record, ExperimentRecord) else list(record)
    if not values:
        raise ValueError("no values to fit")
    counts = Counter(int(v) for v in values)
    if min(counts) < 0:
        raise ValueError("Poisson fit needs non-negative integer values")
    T = len(values)
    cutoff = max(counts)
    while stats.poisson.sf(cutoff, mu) >= 1e-6:
        cutoff += 1
    pmf = stats.poisson.pmf(range(cutoff + 1), mu)
    tv = sum(abs(counts.get(j, 0) / T - pmf[j]) for j in range(cutoff + 1))
    tv = 0.5 * (tv + float(stats.poisson.sf(cutoff, mu)))

    # Pearson chi-square; the upper tail is pooled so every bin expects >= 5.
    observed, expected = [], []
    j = 0
    while T * stats.poisson.pmf(j, mu) >= 5 and T * stats.poisson.sf(j, mu) >= 5:
        observed.append(counts.get(j, 0))
        expected.append(T * float(stats.poisson.pmf(j, mu)))
        j += 1
    observed.append(sum(c for v, c in counts.items() if v >= j))
    expected.append(T * float(stats.poisson.sf(j - 1, mu)))
    chi2 = sum((o - e) ** 2 / e for o, e in zip(observed, expected))
    dof = len(observed) - 1
    p_value = float(stats.chi2.sf(chi2, dof)) if dof else float("nan")
    return PoissonFit(mu, float(tv), float(chi2), dof, p_value, cutoff)


# -- sweeps -------------------------------------------------------------------


@dataclass
class SweepResult:
    axis: str
    grid: list[float]
    records: list[ExperimentRecord]
    crossing: float | None

    @property
    def fractions(self) -> list[float]:
        return [r.success_fraction for r in self.records]

    def summary(self) -> dict[str, Any]:
        return {
            "axis": self.axis,
            "grid": self.grid,
            "success_fraction": self.fractions,
            "success_ci95": [r.aggregate["success_ci95"] for r in self.records],
            "crossing": self.crossing,
            "records": [r.summary() for r in self.records],
        }


def _crossing(grid: Sequence[float], fracs: Sequence[float], level: float = 0.5) -> float | None:
    for (x0, y0), (x1, y1) in zip(zip(grid, fracs), zip(grid[1:], fracs[1:])):
        if (y0 - level) * (y1 - level) <= 0 and y0 != y1:
            return x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    return None


def sweep(grid: Sequence[float], cfg: TrialConfig, axis: str = "p", jobs: int | None = None) -> SweepResult:
    """One record per grid point, plus where the success fraction passes 1/2.

    Grid point ``j`` uses streams ``j * trials .. (j + 1) * trials - 1``.
    """
    grid = [float(x) for x in grid]
    if not grid:
        raise ValueError("sweep grid is empty")
    if axis not in ("p", "c"):
        raise ValueError(f"sweep axis must be 'p' or 'c', got {axis!r}")
    diffs = [b - a for a, b in zip(grid, grid[1:])]
    if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
        raise ValueError("sweep grid must be strictly monotone")
    records = []
    for j, x in enumerate(grid):
        point = replace(
            cfg,
            p=x if axis == "p" else None,
            c=x if axis == "c" else None,
            stream_offset=cfg.stream_offset + j * cfg.trials,
        )
        records.append(run_trials(point, jobs))
    crossing = _crossing(grid, [r.success_fraction for r in records]) if len(grid) > 1 else None
    return SweepResult(axis, grid, records, crossing)


# -- serialization ------------------------------------------------------------


def write_jsonl(record: ExperimentRecord, fh: IO[str]) -> None:
    for t in record.trials:
        fh.write(json.dumps(t, sort_keys=True) + "\n")


def sweep_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([result.axis, "success_fraction", "ci95_half_width"])
    for x, r in zip(result.grid, result.records):
        w.writerow([repr(x), repr(r.success_fraction), repr(r.aggregate["success_ci95"])])
    return buf.getvalue()
