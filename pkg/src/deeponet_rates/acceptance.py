"""The acceptance suite: twelve checks, one PASS/FAIL line each.

Every sweep writes its CSV into the output directory; the determinism check
re-runs the recorded sweeps into a scratch directory and compares bytes.
"""
from __future__ import annotations

import dataclasses
import filecmp
import math
import os
import tempfile
import time
from typing import Callable, List, NamedTuple

import numpy as np

from .advdiff import AdvDiffProblem1D, exact_solution
from .fd_cascade import assemble, cascade_solve, dense_solve
from .grids import Grid1D, Grid2D
from .harness import SweepSpec, fit_slope, run_sweep
from .relu import hat_trunk, linear_branch_net, square_error_bound, square_gadget


class CriterionResult(NamedTuple):
    number: int
    name: str
    passed: bool
    measured: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} [{self.number:2d}] {self.name}: {self.measured} ({self.seconds:.1f}s)"


class Suite:
    """Runs sweeps into ``out_dir`` and remembers them for the rerun check."""

    def __init__(self, out_dir, seed=0, threads=1):
        self.out_dir = out_dir
        self.seed = int(seed)
        self.threads = int(threads)
        self.specs: List[SweepSpec] = []
        os.makedirs(out_dir, exist_ok=True)

    def sweep(self, name, problem, axis, values, **fixed):
        spec = SweepSpec(problem, axis, values, fixed, self.seed,
                         os.path.join(self.out_dir, f"{name}.csv"))
        self.specs.append(spec)
        return run_sweep(spec, threads=self.threads)


def _within(x, target, tol):
    return abs(x - target) <= tol


# ---------------------------------------------------------------- checks

def check_burgers_rate(s: Suite):
    ms = [16, 32, 64, 128, 256]
    rep = s.sweep("c01_burgers1d_m", "burgers1d", "m", ms, kappa=0.5, t=0.25, x=0.5, u0="sin")
    slope, r2 = rep.slope(abscissa=2 * np.pi / np.array(ms))
    ok = _within(slope, 1.0, 0.15) and r2 >= 0.97
    return ok, f"slope vs h {slope:.3f} (target 1.0 +- 0.15), R^2 {r2:.4f} (>= 0.97)"


def check_burgers_deeponet(s: Suite):
    vals = [16, 32, 64, 128, 256]
    rp = s.sweep("c02_burgers_deeponet_p", "burgers1d", "p", vals, m=512)
    rm = s.sweep("c02_burgers_deeponet_m", "burgers1d", "m", vals, p=512, mode="deeponet")
    sp, _ = rp.slope()
    sm, _ = rm.slope()
    ok = _within(sp, -1.0, 0.2) and _within(sm, -1.0, 0.2)
    return ok, f"slope vs p (m=512) {sp:.3f}, slope vs m (p=512) {sm:.3f} (targets -1.0 +- 0.2)"


def check_burgers_2d(s: Suite):
    ms = [64, 256, 1024]
    rep = s.sweep("c03_burgers2d_m", "burgers2d", "m", ms)
    h = 2 * np.pi / np.sqrt(ms)
    slope, r2 = rep.slope(abscissa=h)
    return _within(slope, 1.0, 0.25), f"combined u,v slope vs h {slope:.3f} (target 1.0 +- 0.25), R^2 {r2:.4f}"


def check_advdiff_rate(s: Suite):
    ms = [16, 32, 64, 128, 256]
    rep = s.sweep("c04_advdiff1d_m", "advdiff1d", "m", ms, a="alternating", f="cos3")
    slope, r2 = rep.slope(abscissa=1.0 / np.array(ms))
    sanity = AdvDiffProblem1D.uniform(1.0, 64, 0.0, 1.0)
    u_half = float(exact_solution(sanity, 0.5))
    ok = _within(slope, 1.0, 0.15) and abs(u_half - 0.125) <= 1e-12
    return ok, (f"slope vs h {slope:.3f} (target 1.0 +- 0.15), R^2 {r2:.4f}; "
                f"a=0,f=1 u(0.5) - 0.125 = {u_half - 0.125:.2e}")


def check_cascade(s: Suite):
    rng = np.random.default_rng(s.seed + 5)
    worst_rel, worst_perm = 0.0, 0.0
    for _ in range(20):
        interior = int(rng.integers(4, 21))
        grid = Grid2D.uniform(0.0, 1.0, interior + 1)
        a3 = rng.uniform(0.0, 5.0, interior * interior)
        fv = rng.standard_normal(interior * interior)
        system = assemble(grid, a3=lambda x, y: a3, f=lambda x, y: fv)
        dense = dense_solve(system)
        U, _ = cascade_solve(system)
        scale = np.max(np.abs(dense))
        worst_rel = max(worst_rel, float(np.max(np.abs(U - dense)) / scale))
        Up, _ = cascade_solve(system, order=rng.permutation(len(system.updates)))
        worst_perm = max(worst_perm, float(np.max(np.abs(Up - U)) / scale))
    ok = worst_rel <= 1e-8 and worst_perm <= 1e-10
    return ok, f"max relative gap vs dense {worst_rel:.2e} (<= 1e-8), permutation {worst_perm:.2e} (<= 1e-10)"


def check_fd_order(s: Suite):
    cells = [8, 16, 32, 64]
    out = []
    for name, problem in (("reacdiff2d", "reacdiff2d"), ("advdiff2d", "advdiff2d")):
        rep = s.sweep(f"c06_{name}_m", problem, "m", cells)
        out.append(rep.slope(abscissa=1.0 / np.array(cells))[0])
    ok = all(_within(v, 2.0, 0.15) for v in out)
    return ok, f"manufactured slopes vs h: reaction {out[0]:.3f}, advection {out[1]:.3f} (target 2.0 +- 0.15)"


def check_blessed(s: Suite):
    ms = [16, 36, 64]
    # one compiled N_R for the whole sweep: box from the coarsest h and the largest S^{-1}
    t_bound = 0.0
    for m in ms:
        side = int(round(math.sqrt(m)))
        sys0 = assemble(Grid2D.uniform(0.0, 1.0, side + 1), a3=1.0)
        t_bound = max(t_bound, 1.1 * float(np.max(np.abs(np.linalg.inv(sys0.S)))))
    x1_bound = (1.0 / (int(round(math.sqrt(ms[0]))) + 1)) ** 2
    rep = s.sweep("c07_blessed_m", "relu-audit", "m", ms, epsilon_stage=1e-6,
                  x1_bound_blessed=x1_bound, t_bound_blessed=t_bound)
    m = np.array(ms, float)
    growth, _ = rep.slope()
    w_ratio = rep.column("aux1") / (m * m * np.log(m))
    d_ratio = rep.column("aux2") / (m * np.log(m))
    bounded = w_ratio[-1] <= 1.5 * w_ratio[0] and d_ratio[-1] <= 1.5 * d_ratio[0]
    ok = growth <= 1.2 and bounded
    return ok, (f"error/eps {', '.join(f'{v:.3g}' for v in rep.column('error_linf') / 1e-6)}, "
                f"growth exponent {growth:.3f} (<= 1.2); width/(m^2 ln m) "
                f"{w_ratio[0]:.2f}->{w_ratio[-1]:.2f}, depth/(m ln m) {d_ratio[0]:.2f}->{d_ratio[-1]:.2f}")


def check_gadgets(s: Suite):
    x = np.arange(2**14 + 1) / 2**14
    sq_ok = True
    worst = 0.0
    for k in range(1, 9):
        e = float(np.max(np.abs(square_gadget(k)(x[:, None])[:, 0] - x * x)))
        sq_ok &= e <= square_error_bound(k) * (1 + 1e-12)
        worst = max(worst, e / square_error_bound(k))
    rep = s.sweep("c08_compiled_R", "relu-audit", "theta_size", [2, 4, 6], samples=100000)
    errs = rep.column("error_linf")
    sizes = rep.column("aux1")
    eps = np.array([1e-2, 1e-4, 1e-6])
    comp_ok = bool(np.all(errs <= eps))
    ratios = sizes[1:] / sizes[:-1]
    size_ok = bool(np.all(ratios <= 8) and np.all(ratios > 1))
    ok = sq_ok and comp_ok and size_ok
    return ok, (f"square max err/bound {worst:.3f} (k<=8); compiled R errors "
                f"{', '.join(f'{e:.2e}' for e in errs)}; size ratios "
                f"{', '.join(f'{r:.2f}' for r in ratios)} (<= 8)")


def check_exact(s: Suite):
    rng = np.random.default_rng(s.seed + 9)
    worst = 0.0
    for periodic in (False, True):
        grid = Grid1D.uniform(0.0, 1.0, 10, periodic=periodic)
        y = np.linspace(0.0, 1.0, 10001)[:-1] if periodic else np.linspace(0.0, 1.0, 10001)
        total = np.zeros_like(y)
        for i in range(grid.n_values):
            v = hat_trunk(grid, i)(y[:, None])[:, 0]
            e = np.zeros(grid.n_values)
            e[i] = 1.0
            full = np.append(e, e[0]) if periodic else e
            target = np.interp(y, grid.nodes, full)
            worst = max(worst, float(np.max(np.abs(v - target))))
            total += v
        worst = max(worst, float(np.max(np.abs(total - 1.0))))
    c = rng.standard_normal(20)
    U = rng.standard_normal((1000, 20))
    lin = float(np.max(np.abs(linear_branch_net(c)(U)[:, 0] - U @ c)))
    ok = worst <= 1e-13 and lin <= 1e-13
    return ok, f"hat trunk / partition max error {worst:.2e}, linear branch {lin:.2e} (<= 1e-13)"


def check_forced(s: Suite):
    ns = [1000, 10000, 100000]
    rep = s.sweep("c10_forced_N", "burgers-forced", "N_paths", ns)
    slope, _ = rep.slope("aux1")
    se = rep.column("aux1")[-1]
    err = rep.column("error_linf")[-1]
    ok = _within(slope, -0.5, 0.1) and err <= 3 * se
    return ok, f"std-error slope {slope:.3f} (target -0.5 +- 0.1); |MC - Cole-Hopf| = {err / se:.2f} SE at N=1e5 (<= 3)"


def check_bochner(s: Suite):
    rep = s.sweep("c11_bochner_R", "bochner-riesz", "R", [8, 16, 32], gamma=1.0)
    err = rep.column("error_linf")
    ratio = rep.column("aux2")
    ok = bool(np.all(ratio <= 10) and np.all(np.diff(err) < 0))
    return ok, (f"L2 errors {', '.join(f'{e:.3e}' for e in err)}; error/omega2 "
                f"{', '.join(f'{r:.3f}' for r in ratio)} (<= 10, decreasing errors)")


def check_determinism(s: Suite):
    bad = []
    with tempfile.TemporaryDirectory() as tmp:
        for spec in s.specs:
            again = dataclasses.replace(spec, out=os.path.join(tmp, os.path.basename(spec.out)))
            run_sweep(again, threads=s.threads)
            if not filecmp.cmp(spec.out, again.out, shallow=False):
                bad.append(os.path.basename(spec.out))
    ok = not bad and bool(s.specs)
    return ok, f"{len(s.specs) - len(bad)}/{len(s.specs)} CSVs byte-identical on rerun" + (
        f"; differing: {', '.join(bad)}" if bad else "")


CRITERIA: List[tuple] = [
    (1, "Burgers 1D rate", check_burgers_rate),
    (2, "Burgers DeepONet joint rate", check_burgers_deeponet),
    (3, "2D Burgers rate", check_burgers_2d),
    (4, "Advection-diffusion 1D rate", check_advdiff_rate),
    (5, "Cascade/direct equivalence", check_cascade),
    (6, "FD convergence order 2", check_fd_order),
    (7, "Blessed-net accumulation", check_blessed),
    (8, "ReLU gadget bounds", check_gadgets),
    (9, "Exact representations", check_exact),
    (10, "Forced Burgers Monte Carlo", check_forced),
    (11, "Bochner-Riesz property", check_bochner),
    (12, "Determinism", check_determinism),
]


def run_criterion(suite: Suite, number: int, name: str, fn: Callable) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        ok, measured = fn(suite)
    except Exception as exc:  # noqa: BLE001
        ok, measured = False, f"error: {type(exc).__name__}: {exc}"
    return CriterionResult(number, name, bool(ok), measured, time.perf_counter() - t0)


def run_acceptance(out_dir, seed=0, threads=1, only=None, echo=None) -> List[CriterionResult]:
    """Run the selected criteria (all by default) in order.

    ``echo`` is called with each result line as soon as it is available.
    Determinism re-runs whichever sweeps were run before it.
    """
    suite = Suite(out_dir, seed, threads)
    results = []
    for number, name, fn in CRITERIA:
        if only and number not in only:
            continue
        res = run_criterion(suite, number, name, fn)
        results.append(res)
        if echo:
            echo(res.line())
    return results
