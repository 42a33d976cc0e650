"""Acceptance suite: one self-contained check per contract criterion.

Each criterion function takes the master seed and returns a
:class:`CriterionResult`; ``run_all`` executes them in order, prints one
PASS/FAIL line each, and reports overall success.  All randomness derives from
(seed, fixed stream offsets), so a given seed reproduces the suite exactly.

Monte Carlo grid sizes are chosen so that estimator-vs-oracle and
estimator-vs-estimator comparisons happen at matched discretization, with
statistical error dominating quadrature/truncation error; the stated runtime
budgets are enforced.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import asymptotics as asy
from . import mc, paths, schrodinger

__all__ = ["CriterionResult", "run_all", "CRITERIA", "lil_demo_trajectory"]

# Stream-id offsets per criterion; keeps all acceptance randomness disjoint.
_STREAM_C3 = 300
_STREAM_C4 = 400
_STREAM_C5A = 510
_STREAM_C5B = 520
_STREAM_C6 = 600
_STREAM_C7 = 700

_GEOMETRIC_Q = paths.geometric_q(0.5, 50)  # q_j = 2^-j, J = 50


@dataclass(frozen=True)
class CriterionResult:
    cid: str
    label: str
    passed: bool
    detail: str
    seconds: float
    budget_seconds: float

    @property
    def within_budget(self) -> bool:
        return self.seconds < self.budget_seconds


def _finish(cid, label, passed, detail, t0, budget) -> CriterionResult:
    dt = time.perf_counter() - t0
    passed = bool(passed)  # numpy comparisons leak np.bool_, which json rejects
    if dt >= budget:
        passed = False
        detail += f"; RUNTIME {dt:.1f}s exceeded budget {budget:.0f}s"
    return CriterionResult(cid, label, passed, detail, dt, budget)


def criterion_1(seed: int) -> CriterionResult:
    """kappa_2 = 1/8 via the computed ground state."""
    t0 = time.perf_counter()
    lam = schrodinger.lambda1(2.0)
    kap = asy.kappa_p(2.0, lam.value)
    err = abs(kap - 0.125)
    detail = f"kappa_2={kap:.10f}, |err|={err:.2e} (tol 1e-4); lambda1(2)={lam.value:.10f}"
    return _finish("C1", "kappa_2 from the ground state", err <= 1e-4, detail, t0, 5.0)


def criterion_2(seed: int) -> CriterionResult:
    """lambda_1(1) against the Airy-derivative oracle value."""
    t0 = time.perf_counter()
    lam = schrodinger.lambda1(1.0)
    err = abs(lam.value - 0.808617)
    detail = f"lambda1(1)={lam.value:.8f}, |err|={err:.2e} vs 0.808617 (tol 1e-4)"
    return _finish("C2", "lambda_1(1) vs Airy oracle", err <= 1e-4, detail, t0, 5.0)


def criterion_3(seed: int) -> CriterionResult:
    """Tauberian round trip on random orders, plus the cosh-oracle cross-link."""
    t0 = time.perf_counter()
    rng = paths.RngStream(seed, _STREAM_C3).generator()
    worst = 0.0
    for _ in range(1000):
        o = asy.AsymptoticOrder(
            rng.uniform(0.1, 5.0),
            rng.uniform(-3.0, 3.0),
            10.0 ** rng.uniform(-3.0, 3.0),
        )
        back = asy.tauberian_inverse(asy.tauberian_forward(o))
        worst = max(
            worst,
            abs(back.alpha - o.alpha) / o.alpha,
            abs(back.beta - o.beta) / max(1.0, abs(o.beta)),
            abs(back.big_k - o.big_k) / o.big_k,
        )
    lam = 1e8
    slope = -mc.log_oracle_laplace_intbm2(lam, 1.0) / np.sqrt(lam)
    slope_err = abs(slope - 2.0**-0.5)
    ok = worst <= 1e-12 and slope_err <= 1e-3
    detail = f"round-trip worst rel err {worst:.2e} (tol 1e-12); slope {slope:.8f} vs 1/sqrt2, |err|={slope_err:.2e} (tol 1e-3)"
    return _finish("C3", "Tauberian round trip + cosh cross-link", ok, detail, t0, 1.0)


def criterion_4(seed: int) -> CriterionResult:
    """Constant-consistency: time-change constant equals chaos sup constant."""
    t0 = time.perf_counter()
    rng = paths.RngStream(seed, _STREAM_C4).generator()
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(1, 7))
        times = np.cumsum(rng.uniform(0.1, 2.0, size=m))
        # interlaced windows a_1 < b_1 <= a_2 < b_2 <= ...
        steps = rng.uniform(0.05, 1.0, size=2 * m)
        edges = np.cumsum(steps)
        windows = tuple((edges[2 * i] if i else 0.0, edges[2 * i + 1]) for i in range(m))
        w = rng.uniform(0.2, 3.0)
        part = asy.Partition(tuple(times), windows)
        ks = 0.125 * w**2 * part.delta_t**2
        b = [win[1] for win in windows]
        lhs = asy.tsb_constant(1.0, 0.0, ks, b)
        rhs = asy.chaos_sup_constant(w, part)
        worst = max(worst, abs(lhs - rhs) / rhs)
    detail = f"worst rel diff {worst:.2e} over 1000 random partitions (tol 1e-12)"
    return _finish("C4", "time-change vs chaos sup constant", worst <= 1e-12, detail, t0, 1.0)


def criterion_5(seed: int) -> CriterionResult:
    """Monte Carlo vs exact oracles, both at matched discretization.

    (a) raw grid-sup estimates for plain Brownian motion against the exact
        transfer-operator law of the grid maximum;
    (b) Laplace-functional estimates for the squared-Brownian clock against
        the closed-form cosh oracle.
    """
    t0 = time.perf_counter()
    lines = []
    ok = True

    n_a = 512
    part = asy.Partition((1.0,), windows=((0.0, 1.0),))
    for i, eps in enumerate((0.5, 1.0)):
        cfg = mc.McConfig(samples=10**6, n_steps=n_a, seed=seed, stream_base=_STREAM_C5A + 20 * i)
        est = mc.estimate_smallball_raw(paths.BrownianProcess(), part, eps, cfg)
        exact = mc.sup_bm_grid_cdf(eps, n_a)
        z = (est.estimate - exact) / est.std_error
        ok &= abs(z) <= 3.0
        lines.append(
            f"raw eps={eps}: est={est.estimate:.6f} grid-exact={exact:.6f} z={z:+.2f} "
            f"(continuous {asy.sup_bm_cdf(eps):.6f})"
        )

    clock = paths.PowerClockSpec(p=2.0)
    part1 = asy.Partition((1.0,))
    cfg = mc.McConfig(samples=10**5, n_steps=2**14, seed=seed, stream_base=_STREAM_C5B)
    lams = (1.0, 5.0, 10.0)
    for lam, est in zip(lams, mc.estimate_laplace_multi(clock, part1, lams, cfg)):
        exact = mc.oracle_laplace_intbm2(lam, 1.0)
        rel = abs(est.estimate - exact) / exact
        ok &= rel <= 0.01
        lines.append(f"laplace lam={lam:g}: est={est.estimate:.6f} exact={exact:.6f} rel={rel:.2e}")

    return _finish("C5", "Monte Carlo vs exact oracles", ok, "; ".join(lines), t0, 180.0)


def criterion_6(seed: int) -> CriterionResult:
    """Distributional identity between the chaos integral and its time change.

    Two-sample KS between sup |Z| from direct simulation and from the
    time-changed representation over the matching chaos clock, at matched
    grid resolution; passes at the 1% critical value in >= 2 of 3 streams.
    """
    t0 = time.perf_counter()
    n = 20_000
    n_steps = 512
    spec = paths.ChaosClockSpec(_GEOMETRIC_Q)
    direct = paths.ChaosDirectProcess(spec)
    changed = paths.TimeChangedProcess(spec)
    crit = mc.ks_critical_value(n, n, 0.01)
    passes = 0
    stats = []
    for rep in range(3):
        a = paths.sup_samples(direct, (1.0,), n_steps, n, paths.RngStream(seed, _STREAM_C6 + 2 * rep))[:, 0]
        b = paths.sup_samples(changed, (1.0,), n_steps, n, paths.RngStream(seed, _STREAM_C6 + 2 * rep + 1))[:, 0]
        d, p = mc.ks_two_sample(a, b)
        stats.append(f"rep{rep}: D={d:.5f} p={p:.3f}")
        passes += d < crit
    ok = passes >= 2
    detail = f"KS 1% critical={crit:.5f}, n={n} each, N={n_steps}; " + "; ".join(stats) + f"; {passes}/3 pass"
    return _finish("C6", "representation: direct chaos vs time change", ok, detail, t0, 300.0)


def criterion_7(seed: int) -> CriterionResult:
    """First-order sup constant recovered by conditional Monte Carlo.

    Probes P(sup_{[0,1]}|Z| <= eps) on a decreasing eps grid for the geometric
    chaos clock (trace norm 2) and checks that the empirical constant at the
    smallest eps is within 30% of (pi/4) * 2, with the gap to the
    extrapolated limit contracting along the grid.  The eps -> 0 statement
    itself is not reachable at desk scale; this is the property-based
    substitute.
    """
    t0 = time.perf_counter()
    spec = paths.ChaosClockSpec(_GEOMETRIC_Q)
    target = np.pi / 4.0 * 2.0
    cfg = mc.McConfig(samples=10**5, n_steps=512, seed=seed, stream_base=_STREAM_C7)
    grid = mc.probe_smallball_conditional(spec, 1.0, (0.4, 0.3, 0.2, 0.15, 0.1), cfg)
    ext = mc.extract_constant(grid, (1.0, 0.0))
    k_last = ext.k_hat[-1]
    rel = abs(k_last - target) / target
    ok = rel <= 0.30 and ext.gaps_non_increasing and not ext.dropped
    detail = (
        f"K_hat={[f'{k:.4f}' for k in ext.k_hat]} at eps={list(ext.epsilons)}; "
        f"K_hat(0.1)={k_last:.4f} vs {target:.4f} (rel {rel:.1%}, tol 30%); "
        f"extrapolated={ext.extrapolated:.4f}; gaps non-increasing: {ext.gaps_non_increasing}"
    )
    return _finish("C7", "first-order constant via conditional MC", ok, detail, t0, 600.0)


def criterion_8(seed: int) -> CriterionResult:
    """Geometric weighted-sum constant against the product Laplace oracle."""
    t0 = time.perf_counter()
    base = asy.AsymptoticOrder(1.0, 0.0, 0.125)
    combined = asy.weighted_sum_constant(base, asy.WeightSequenceSpec.geometric(0.25))
    image = asy.tauberian_forward(asy.AsymptoticOrder(1.0, 0.0, combined))
    lam = 1e8
    slope = -mc.log_oracle_laplace_chaos(lam, 1.0, _GEOMETRIC_Q) / np.sqrt(lam)
    rel = abs(slope - image.big_l) / image.big_l
    detail = (
        f"combined K={combined:.10f} (exact 1/2), Laplace image L={image.big_l:.10f} (exact sqrt2); "
        f"product-oracle slope at lam=1e8: {slope:.6f}, rel diff {rel:.2e} (tol 1%)"
    )
    return _finish("C8", "geometric weighted-sum constant vs product oracle", rel <= 0.01, detail, t0, 1.0)


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
]

_LIL_NOTE = (
    "C9: almost-sure limit laws (Chung-type and functional LIL) are not "
    "acceptance targets; `smallball lil-demo` illustrates the liminf scaling "
    "qualitatively with no pass/fail contract."
)


def run_all(seed: int = 42, only=None, printer=print) -> list[CriterionResult]:
    """Run the acceptance criteria in order, printing one line per criterion."""
    selected = set(only) if only else None
    results = []
    for fn in CRITERIA:
        cid = fn.__name__.replace("criterion_", "C")
        if selected is not None and cid not in selected:
            continue
        res = fn(seed)
        status = "PASS" if res.passed else "FAIL"
        printer(f"[{status}] {res.cid} {res.label}: {res.detail} [{res.seconds:.1f}s / budget {res.budget_seconds:.0f}s]")
        results.append(res)
    if selected is None or "C9" in selected:
        printer(f"[NOTE] {_LIL_NOTE}")
    n_pass = sum(r.passed for r in results)
    printer(f"{n_pass}/{len(results)} criteria passed (seed {seed})")
    return results


def lil_demo_trajectory(seed: int = 42, horizon: float = 2000.0, n_steps: int = 2**18, q_terms: int = 50):
    """Trajectory of (log log t / t) * sup_{[0,t]} |Z| for the LIL demonstration.

    Simulates one long path of the geometric chaos integral via its time-change
    representation and evaluates the Chung-type scaling at log-spaced
    checkpoints.  Returns (checkpoint times, scaled sups, liminf target).
    Qualitative only: the liminf is approached on doubly exponential time
    scales, far beyond any finite horizon.
    """
    spec = paths.ChaosClockSpec(paths.geometric_q(0.5, q_terms))
    gen = paths.RngStream(seed, 900).generator()
    d_c = paths.clock_step_increments(spec, horizon, n_steps, gen)
    z = paths.simulate_time_changed(d_c, horizon, gen)
    run = z.running_sup()
    checkpoints = np.geomspace(10.0, horizon, 14)
    idx = np.minimum((checkpoints / horizon * n_steps).astype(int), n_steps)
    t = idx * horizon / n_steps
    ratio = np.log(np.log(t)) / t * run[idx]
    target = np.pi / 4.0 * spec.one_norm
    return t, ratio, target
