"""Monte Carlo estimators, exact oracles, constant extraction, two-sample tests.

Estimators split their sample budget into batches keyed by stream id; batch
results are merged by exact summation of sums and sums of squares, so the
output is independent of the batch execution schedule (and of the worker
count, when threading is enabled).

The rare-event strategy is conditional Monte Carlo: for a single-interval sup
event of a time-changed Brownian motion, the conditional probability given the
clock is the exact theta series, so only the clock terminal value needs to be
simulated.  This is unbiased for the discretized clock and has strictly
smaller variance than the raw indicator estimator (Rao-Blackwell).

Exact oracles:

* ``oracle_laplace_intbm2``: E exp(-lambda int_0^t B^2) = cosh(t sqrt(2 lambda))^(-1/2).
* ``oracle_laplace_chaos``: the product form over paired Brownian factors for
  a chaos clock, prod_j cosh(t q_j sqrt(2 lambda))^(-1).
* ``sup_bm_grid_cdf``: the exact law of the discrete-grid maximum of Brownian
  motion, by transfer-operator iteration; the matched-discretization
  counterpart of ``sup_bm_cdf`` for validating grid-sup estimators.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.signal import fftconvolve
from scipy.stats import ks_2samp

from .asymptotics import Partition, sup_bm_cdf
from .errors import NumericError
from .paths import (
    ClockSpec,
    ProcessSpec,
    RngStream,
    clock_interval_increment_samples,
    clock_terminal_samples,
    sup_samples,
)

__all__ = [
    "McConfig",
    "EstimateResult",
    "ProbeGrid",
    "ConstantExtraction",
    "estimate_smallball_raw",
    "estimate_smallball_conditional",
    "estimate_laplace",
    "estimate_laplace_multi",
    "probe_smallball_conditional",
    "extract_constant",
    "oracle_laplace_intbm2",
    "log_oracle_laplace_intbm2",
    "oracle_laplace_chaos",
    "log_oracle_laplace_chaos",
    "oracle_smallball_chaos",
    "sup_bm_grid_cdf",
    "ks_two_sample",
    "ks_critical_value",
    "logcosh",
]

# One-sided confidence level for the zero-hit Clopper-Pearson upper bound.
_ZERO_HIT_CONFIDENCE = 0.95


@dataclass(frozen=True)
class McConfig:
    """Sampling configuration: budget, grid, batching and RNG provenance.

    ``batch_size`` defaults to a memory-bounded value derived from ``n_steps``;
    it is part of the reproducibility contract (a config determines output
    exactly).  ``workers`` only parallelizes batch execution and never affects
    results.
    """

    samples: int = 100_000
    n_steps: int = 2**14
    seed: int = 0
    stream_base: int = 0
    batch_size: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.n_steps < 2:
            raise ValueError("n_steps must be at least 2")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    @property
    def effective_batch(self) -> int:
        if self.batch_size is not None:
            if self.batch_size < 1:
                raise ValueError("batch_size must be positive")
            return self.batch_size
        return max(256, 2**21 // self.n_steps)


@dataclass(frozen=True)
class EstimateResult:
    """Point estimate with standard error and RNG provenance.

    ``std_error`` is the sample standard deviation divided by sqrt(samples).
    When an indicator estimate registers zero hits, ``estimate`` is 0,
    ``std_error`` carries the one-sided 95% Clopper-Pearson upper bound for
    the probability instead, and ``zero_hits`` is flagged.
    """

    estimate: float
    std_error: float
    samples: int
    seed: int
    stream_base: int = 0
    zero_hits: bool = False

    def record(self, op: str, params: dict) -> dict:
        """JSON-ready record {op, params, estimate, stdError, samples, seed}."""
        return {
            "op": op,
            "params": params,
            "estimate": self.estimate,
            "stdError": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
        }

    def to_json(self, op: str, params: dict) -> str:
        return json.dumps(self.record(op, params), sort_keys=True)


def _merge_batches(parts: list[tuple[float, float, int]]) -> tuple[float, float, int]:
    s = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    return s, s2, n


def _batch_sizes(cfg: McConfig) -> list[int]:
    batch = cfg.effective_batch
    sizes = [batch] * (cfg.samples // batch)
    if cfg.samples % batch:
        sizes.append(cfg.samples % batch)
    return sizes


def _batched_mean(sampler: Callable[[int, np.random.Generator], np.ndarray], cfg: McConfig) -> tuple[float, float, int]:
    """Mean and std error of sampler output over cfg.samples draws.

    Batch b draws from RngStream(cfg.seed, cfg.stream_base + b); merging is by
    exact summation in batch order, so thread scheduling cannot change the
    result.
    """
    sizes = _batch_sizes(cfg)

    def one(args):
        k, b = args
        values = np.asarray(sampler(b, RngStream(cfg.seed, cfg.stream_base + k).generator()), dtype=float)
        return float(values.sum()), float(np.square(values).sum()), values.size

    jobs = list(enumerate(sizes))
    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            parts = list(ex.map(one, jobs))
    else:
        parts = [one(j) for j in jobs]
    s, s2, n = _merge_batches(parts)
    mean = s / n
    var = max(0.0, (s2 - n * mean * mean) / (n - 1)) if n > 1 else 0.0
    return mean, np.sqrt(var / n), n


def _indicator_result(mean: float, se: float, n: int, cfg: McConfig) -> EstimateResult:
    if mean == 0.0:
        upper = 1.0 - (1.0 - _ZERO_HIT_CONFIDENCE) ** (1.0 / n)
        return EstimateResult(0.0, upper, n, cfg.seed, cfg.stream_base, zero_hits=True)
    return EstimateResult(mean, se, n, cfg.seed, cfg.stream_base)


# ---------------------------------------------------------------------------
# Small-ball estimators
# ---------------------------------------------------------------------------

def estimate_smallball_raw(process: ProcessSpec, part: Partition, eps: float, cfg: McConfig) -> EstimateResult:
    """Indicator-mean estimate of P( for all i: a_i eps <= M(t_i) <= b_i eps ).

    M is the running sup of |Z| over the simulation grid, so the estimate is
    unbiased for the discretized process; compare against matched-resolution
    oracles only.  Zero hits fall back to a flagged Clopper-Pearson bound.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if part.windows is None:
        raise ValueError("partition must carry windows")
    lo = eps * np.asarray([w[0] for w in part.windows])
    hi = eps * np.asarray([w[1] for w in part.windows])

    def sampler(b, gen):
        sups = sup_samples(process, part.times, cfg.n_steps, b, gen)
        return np.all((sups >= lo) & (sups <= hi), axis=1).astype(float)

    mean, se, n = _batched_mean(sampler, cfg)
    return _indicator_result(mean, se, n, cfg)


ClockLike = Union[ClockSpec, np.ndarray, Callable[[int, np.random.Generator], np.ndarray]]


def estimate_smallball_conditional(clock: ClockLike, t: float, eps: float, cfg: McConfig) -> EstimateResult:
    """Rao-Blackwellized estimate of P(sup_{[0,t]} |B(C)| <= eps), one interval.

    Conditionally on the clock, the sup law is exactly that of sqrt(C(t))
    times the Brownian sup over [0, 1], so the indicator is replaced by the
    exact theta series F(eps / sqrt(C(t))).  ``clock`` may be a ClockSpec
    (terminal values are simulated), an array of precomputed C(t) samples, or
    a callable (n, rng) -> samples; a constant-returning callable models a
    deterministic clock and gives a zero-variance estimate.
    """
    if eps <= 0 or t <= 0:
        raise ValueError("eps and t must be positive")

    if isinstance(clock, np.ndarray):
        c = np.asarray(clock, dtype=float)
        if np.any(c < 0):
            raise ValueError("clock samples must be nonnegative")
        vals = _conditional_values(c, eps)
        n = c.size
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        return EstimateResult(mean, se, n, cfg.seed, cfg.stream_base)

    if callable(clock):
        draw = clock
    else:
        def draw(b, gen, _spec=clock):
            return clock_terminal_samples(_spec, t, cfg.n_steps, b, gen)

    def sampler(b, gen):
        return _conditional_values(np.asarray(draw(b, gen), dtype=float), eps)

    mean, se, n = _batched_mean(sampler, cfg)
    return EstimateResult(mean, se, n, cfg.seed, cfg.stream_base)


def _conditional_values(c_samples: np.ndarray, eps: float) -> np.ndarray:
    """Exact conditional probabilities F_sup(eps / sqrt(C)) per clock sample."""
    vals = np.zeros_like(c_samples)
    pos = c_samples > 0
    vals[pos] = sup_bm_cdf(eps / np.sqrt(c_samples[pos]))
    vals[~pos] = 1.0  # a frozen clock keeps Z at 0
    return vals


def estimate_laplace(spec: ClockSpec, part: Partition, lam: float, cfg: McConfig) -> EstimateResult:
    """Sample mean of exp(-lambda sum_i d_i Delta_i C); always in (0, 1].

    Without partition weights the functional is unweighted (d_i = 1).
    """
    return estimate_laplace_multi(spec, part, (lam,), cfg)[0]


def estimate_laplace_multi(spec: ClockSpec, part: Partition, lams: Sequence[float], cfg: McConfig) -> list[EstimateResult]:
    """Laplace functional estimates at several lambda from one clock sample set.

    The clock increments are simulated once per batch and the exponential
    functional is averaged for every lambda; each estimate is individually
    unbiased, and the coupling makes the lambda profile monotone pathwise.
    """
    lams = [float(l) for l in lams]
    if any(l < 0 for l in lams):
        raise ValueError("lambda must be nonnegative")
    d = np.asarray(part.weights) if part.weights is not None else np.ones(part.m)

    sums = np.zeros(len(lams))
    sumsq = np.zeros(len(lams))
    total = 0
    for k, b in enumerate(_batch_sizes(cfg)):
        gen = RngStream(cfg.seed, cfg.stream_base + k).generator()
        inc = clock_interval_increment_samples(spec, part, cfg.n_steps, b, gen)
        weighted = inc @ d
        for i, lam in enumerate(lams):
            v = np.exp(-lam * weighted)
            sums[i] += v.sum()
            sumsq[i] += np.square(v).sum()
        total += weighted.size
    out = []
    for i in range(len(lams)):
        mean = sums[i] / total
        var = max(0.0, (sumsq[i] - total * mean * mean) / (total - 1)) if total > 1 else 0.0
        out.append(EstimateResult(float(mean), float(np.sqrt(var / total)), total, cfg.seed, cfg.stream_base))
    return out


# ---------------------------------------------------------------------------
# Exact Laplace oracles
# ---------------------------------------------------------------------------

def logcosh(x):
    """log cosh x, overflow-safe for large |x|."""
    x = np.abs(np.asarray(x, dtype=float))
    return x + np.log1p(np.exp(-2.0 * x)) - np.log(2.0)


def log_oracle_laplace_intbm2(lam: float, t: float) -> float:
    """log E exp(-lambda int_0^t B^2 ds) = -1/2 log cosh(t sqrt(2 lambda))."""
    if lam < 0 or t <= 0:
        raise ValueError("need lambda >= 0 and t > 0")
    return -0.5 * float(logcosh(t * np.sqrt(2.0 * lam)))


def oracle_laplace_intbm2(lam: float, t: float) -> float:
    """E exp(-lambda int_0^t B^2 ds) = cosh(t sqrt(2 lambda))^(-1/2).

    Underflows to 0.0 for t sqrt(2 lambda) beyond ~1420; use the log variant
    for slope extraction at large lambda.
    """
    return float(np.exp(log_oracle_laplace_intbm2(lam, t)))


def log_oracle_laplace_chaos(lam: float, t: float, q) -> float:
    """log E exp(-lambda C(t)) for the chaos clock with singular values q.

    Each q_j contributes two independent squared Brownian factors, i.e. one
    factor cosh(t q_j sqrt(2 lambda))^(-1) in the product.
    """
    if lam < 0 or t <= 0:
        raise ValueError("need lambda >= 0 and t > 0")
    q = np.asarray(q, dtype=float)
    return -float(np.sum(logcosh(t * q * np.sqrt(2.0 * lam))))


def oracle_laplace_chaos(lam: float, t: float, q) -> float:
    """E exp(-lambda C(t)) = prod_j cosh(t q_j sqrt(2 lambda))^(-1)."""
    return float(np.exp(log_oracle_laplace_chaos(lam, t, q)))


def oracle_smallball_chaos(eps: float, t: float, q) -> float:
    """Exact P(sup_{[0,t]} |B(C)| <= eps) for a chaos clock with values q.

    Combines the theta series for the conditional sup law with the closed-form
    clock Laplace transform:

        P = (4/pi) sum_k (-1)^k/(2k+1) E exp(-(2k+1)^2 pi^2/(8 eps^2) C(t)).

    This is the continuous-time limit the conditional estimator converges to;
    it serves as the independent oracle in the test suite.
    """
    if eps <= 0 or t <= 0:
        raise ValueError("eps and t must be positive")
    q = np.asarray(q, dtype=float)
    lam0 = np.pi**2 / (8.0 * eps * eps)
    # Alternating series with terms |.| ~ exp(-(2k+1) t q_1 sqrt(2 lam0))/(2k+1):
    # for large eps the exponential decay is slow, so extend in chunks until
    # the first omitted term bounds the error below 1e-15 of the total.
    total = 0.0
    k0 = 0
    chunk = 256
    while k0 < 200_000:
        k = np.arange(k0, k0 + chunk)
        odd = 2 * k + 1
        logs = -np.sum(logcosh(t * np.outer(odd, q) * np.sqrt(2.0 * lam0)), axis=1)
        terms = np.where(k % 2 == 0, 1.0, -1.0) / odd * np.exp(logs)
        total += float(terms.sum())
        if abs(terms[-1]) <= 1e-15 * abs(total):
            return min(1.0, 4.0 / np.pi * total)
        k0 += chunk
    raise NumericError(f"theta series for eps={eps} did not converge in {k0} terms")


# ---------------------------------------------------------------------------
# Exact law of the discrete-grid Brownian sup (matched-discretization oracle)
# ---------------------------------------------------------------------------

def sup_bm_grid_cdf(eps: float, n_steps: int, horizon: float = 1.0, points_per_sigma: float = 16.0) -> float:
    """Exact P(max_{1<=k<=N} |B(k h)| <= eps) for the grid maximum, h = T/N.

    The grid maximum is the running maximum of a Gaussian random walk; its
    survival inside [-eps, eps] is computed by iterating the restricted
    Gaussian transfer operator on a midpoint grid (spatial spacing
    sigma / points_per_sigma, quadrature error O(delta^2) per step).  This is
    the matched-discretization counterpart of ``sup_bm_cdf``: estimators that
    take sups over a grid must be compared against this law, not the
    continuous one.
    """
    if eps <= 0 or horizon <= 0:
        raise ValueError("eps and horizon must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    sig = np.sqrt(horizon / n_steps)
    m = max(8, int(np.ceil(2.0 * eps * points_per_sigma / sig)))
    delta = 2.0 * eps / m
    x = -eps + (np.arange(m) + 0.5) * delta
    norm = 1.0 / (np.sqrt(2.0 * np.pi) * sig)
    f = norm * np.exp(-x * x / (2.0 * sig * sig))  # density of B(h) on [-eps, eps]
    offsets = np.arange(-(m - 1), m) * delta
    kernel = norm * np.exp(-offsets * offsets / (2.0 * sig * sig))
    for _ in range(n_steps - 1):
        f = fftconvolve(f, kernel, mode="valid") * delta
    return float(min(1.0, f.sum() * delta))


# ---------------------------------------------------------------------------
# Constant extraction from a probe grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeGrid:
    """Small-ball estimates at a strictly decreasing grid of eps values."""

    epsilons: tuple[float, ...]
    results: tuple[EstimateResult, ...]

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if any(e <= 0 for e in eps):
            raise ValueError("epsilons must be positive")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        if len(self.results) != len(eps):
            raise ValueError("need one result per epsilon")
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "results", tuple(self.results))


@dataclass(frozen=True)
class ConstantExtraction:
    """Empirical K-hat sequence with a linear-in-eps extrapolation to eps = 0.

    ``gaps`` holds |K_hat(eps_k) - K_extrapolated| along the grid;
    ``gaps_non_increasing`` reports whether the sequence contracts towards the
    extrapolated limit as eps decreases.  Probe points with non-positive
    estimates are dropped and recorded in ``dropped``.
    """

    epsilons: tuple[float, ...]
    k_hat: tuple[float, ...]
    extrapolated: float
    gaps: tuple[float, ...]
    gaps_non_increasing: bool
    dropped: tuple[int, ...] = field(default=())


def extract_constant(pg: ProbeGrid, order: tuple[float, float]) -> ConstantExtraction:
    """Turn probe estimates into K_hat(eps) = -eps^a |log eps|^b log p(eps).

    The limit is estimated by a least-squares line in eps through the last
    three valid probe points, evaluated at eps = 0.  Needs at least three
    valid (positive-estimate) points.
    """
    a, b = order
    eps_all = np.asarray(pg.epsilons)
    p_all = np.asarray([r.estimate for r in pg.results])
    valid = p_all > 0
    dropped = tuple(int(i) for i in np.nonzero(~valid)[0])
    eps = eps_all[valid]
    p = p_all[valid]
    if eps.size < 3:
        raise ValueError("need at least three positive probe estimates to extrapolate")
    k_hat = -(eps**a) * np.abs(np.log(eps)) ** b * np.log(p)
    slope, intercept = np.polyfit(eps[-3:], k_hat[-3:], 1)
    extrap = float(intercept)
    gaps = np.abs(k_hat - extrap)
    non_increasing = bool(np.all(np.diff(gaps) <= 0))
    return ConstantExtraction(
        tuple(eps), tuple(k_hat), extrap, tuple(gaps), non_increasing, dropped
    )


def probe_smallball_conditional(clock: ClockLike, t: float, eps_grid: Sequence[float], cfg: McConfig) -> ProbeGrid:
    """Conditional small-ball probes at several eps sharing one clock sample set.

    The clock terminal values are simulated once (per batch) and the exact
    conditional series is averaged for every eps, coupling the probes; this
    preserves unbiasedness per eps and makes the K-hat trend smooth in eps.
    """
    eps_grid = tuple(float(e) for e in eps_grid)

    if isinstance(clock, np.ndarray):
        results = [estimate_smallball_conditional(clock, t, e, cfg) for e in eps_grid]
        return ProbeGrid(eps_grid, tuple(results))

    if callable(clock):
        draw = clock
    else:
        def draw(b, gen, _spec=clock):
            return clock_terminal_samples(_spec, t, cfg.n_steps, b, gen)

    sums = np.zeros(len(eps_grid))
    sumsq = np.zeros(len(eps_grid))
    total = 0
    for k, b in enumerate(_batch_sizes(cfg)):
        gen = RngStream(cfg.seed, cfg.stream_base + k).generator()
        c = np.asarray(draw(b, gen), dtype=float)
        for i, e in enumerate(eps_grid):
            v = _conditional_values(c, e)
            sums[i] += v.sum()
            sumsq[i] += np.square(v).sum()
        total += c.size
    results = []
    for i in range(len(eps_grid)):
        mean = sums[i] / total
        var = max(0.0, (sumsq[i] - total * mean * mean) / (total - 1))
        results.append(EstimateResult(float(mean), float(np.sqrt(var / total)), total, cfg.seed, cfg.stream_base))
    return ProbeGrid(eps_grid, tuple(results))


# ---------------------------------------------------------------------------
# Two-sample testing
# ---------------------------------------------------------------------------

def ks_two_sample(x, y) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.size == 0 or y.size == 0:
        raise ValueError("samples must be nonempty")
    res = ks_2samp(x, y, method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_critical_value(n: int, m: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value at level alpha."""
    if n < 1 or m < 1:
        raise ValueError("sample sizes must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    c = np.sqrt(-0.5 * np.log(alpha / 2.0))
    return float(c * np.sqrt((n + m) / (n * m)))
