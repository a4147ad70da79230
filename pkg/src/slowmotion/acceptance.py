"""The acceptance suite: twelve criteria, each a function returning a verdict.

Expensive runs (the PDE trajectories, the H2 sweep) are computed once per
:class:`Suite` and shared between criteria.  When an output directory is
given every criterion writes its measured data as CSV; nothing time- or
host-dependent goes into those files, so two suites on the same machine
produce identical bytes.
"""

from __future__ import annotations

import filecmp
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid

from . import io
from .core import Field, Grid, burgers_flux, l2_norm, second_difference
from .dynamics import (
    InitialDatum,
    Trajectory,
    evolve,
    exit_time,
    make_initial,
    predicted_attractor,
    reduced_ode,
    theorem_diagnostics,
)
from .family import UnresolvedLayer, approx_state, omega_asymptotic, residual_report, zero_state
from .spectral import SpectralProvider, assemble, eigensolve, validate_H2
from .stationary import (
    NoBracket,
    bernoulli_invariant,
    build_branch,
    discrete_subsolution,
    epsilon_monotonicity_check,
    monotone_iterate_full,
    shoot_interval,
    shoot_positive,
)

ELL = 1.0
N = 400
# formation deadline of criterion 8, also the start of the post-transient
# window whenever the v_l2 threshold is never met
T_FORM_MAX = 5.0


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str) -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} criterion {self.number:2d}: {self.title}"


class Suite:
    """Shared state for one pass over the criteria."""

    def __init__(self, out_dir: str | Path | None = None, n: int = N) -> None:
        self.out = Path(out_dir) if out_dir is not None else None
        self.flux = burgers_flux()
        self.grid = Grid(ELL, n)
        self._providers: dict[float, SpectralProvider] = {}
        self._runs: dict[tuple, Trajectory] = {}

    # shared resources

    def provider(self, eps: float) -> SpectralProvider:
        p = self._providers.get(eps)
        if p is None:
            p = SpectralProvider(eps, self.flux, self.grid)
            self._providers[eps] = p
        return p

    def run(self, key: str, eps: float, u0: Field, T: float, *, stride: float = 0.5,
            provider: bool = True, snapshots: bool = False) -> Trajectory:
        k = (key, eps, T, stride, provider, snapshots)
        tr = self._runs.get(k)
        if tr is None:
            tr = evolve(u0, T, None, eps, self.flux, self.provider(eps) if provider else None,
                        stride=stride, store_all_snapshots=snapshots)
            self._runs[k] = tr
        return tr

    def metastable_run(self, eps: float, a0: float = 0.4, T: float = 200.0) -> Trajectory:
        u0 = make_initial(InitialDatum(a0), self.grid)
        return self.run(f"meta_a0={a0}", eps, u0, T)

    def evolve_runs(self) -> dict[str, Trajectory]:
        """Every provider-backed acceptance run made so far."""
        return {f"{k[0]}_eps={k[1]}": tr for k, tr in self._runs.items() if k[4]}

    def write(self, rel: str, header: list[str], rows) -> None:
        if self.out is not None:
            io.write_csv(self.out / rel, header, rows)


def _fmt(x: float) -> str:
    return f"{x:.4g}"


def post_transient_start(tr: Trajectory) -> tuple[float, bool]:
    """``(t_start, formed)``: ``t_form`` when the v_l2 threshold is met, else the deadline."""
    tf = tr.t_form()
    return (tf, True) if tf is not None else (T_FORM_MAX, False)


# 1


def criterion_1(s: Suite) -> CriterionResult:
    res = CriterionResult(1, "analytic spectrum around U = 0")
    eps = 0.1
    data = eigensolve(assemble(eps, zero_state(eps, s.grid), s.flux), 8)
    x = s.grid.nodes
    rows = []
    worst_lam = 0.0
    worst_fn = 0.0
    for k in range(1, 6):
        exact = 1.0 - eps * (k * math.pi / ELL) ** 2
        err = abs(data.lambdas[k - 1] - exact)
        ref = Field(s.grid, np.sin(k * math.pi * x / ELL))
        phi = data.phis[k - 1]
        phi = phi * (l2_norm(ref) / l2_norm(phi))
        fn_err = min(l2_norm(phi - ref), l2_norm(phi + ref))
        worst_lam = max(worst_lam, err)
        worst_fn = max(worst_fn, fn_err)
        res.add(f"lambda_{k}", err < 1e-3, f"computed {data.lambdas[k - 1]:.10f}, exact {exact:.10f}, error {_fmt(err)}")
        rows.append((k, data.lambdas[k - 1], exact, err, fn_err))
    res.add("eigenfunctions", worst_fn < 1e-2, f"max L2 error {_fmt(worst_fn)}")
    s.write("c01_spectrum.csv", ["k", "lambda", "exact", "abs_error", "phi_l2_error"], rows)
    return res


# 2


def criterion_2(s: Suite) -> CriterionResult:
    res = CriterionResult(2, "stationary branch properties")
    g = s.grid
    x = g.nodes
    dx = g.dx
    rows = []
    for eps in (0.1, 0.05):
        br = build_branch("positive", eps, s.flux, g)
        v = br.field.values
        inner = v[1:-1]
        slope = np.diff(v) / dx
        curv = second_difference(v, dx)
        ok_shape = bool(np.all(inner > 0.0) and np.all(v <= x + 1e-15)
                        and np.max(slope) <= 1.0 + 1e-10 and np.max(curv) <= 1e-10)
        res.add(f"shape eps={eps}", ok_shape,
                f"min U {_fmt(inner.min())}, max(U - x) {_fmt(np.max(v - x))}, "
                f"max U' {np.max(slope):.12f}, max U'' {_fmt(np.max(curv))}")
        res.add(f"residual eps={eps}", br.residual_l1 < 1e-6, f"L1 residual {_fmt(br.residual_l1)}")
        shot = shoot_interval(eps, s.flux, 0.0, ELL)
        bern = bernoulli_invariant(shot, x[1:-1])
        scale = max(eps, float(np.max(0.5 * inner**2)))
        rel = float(np.max(np.abs(bern))) / scale
        res.add(f"bernoulli eps={eps}", rel < 1e-6, f"relative drift {_fmt(rel)}")
        raw = shoot_positive(eps, s.flux, 0.0, ELL, g)
        sub = discrete_subsolution(eps, s.flux, g)
        sup = Field(g, np.where(np.arange(g.n + 2) == g.n + 1, 0.0, x))
        mono = monotone_iterate_full(eps, s.flux, sub, sup, g)
        gap = float(np.max(np.abs(raw.values - mono.field.values)))
        res.add(f"shooting vs monotone eps={eps}", gap < 5 * dx * dx,
                f"max difference {_fmt(gap)} (bound {_fmt(5 * dx * dx)}, {mono.iterations} sweeps)")
        rows.append((eps, float(inner.min()), float(np.max(slope)), float(np.max(curv)), br.residual_l1,
                     rel, gap, mono.iterations))
    s.write("c02_branches.csv", ["eps", "min_u", "max_slope", "max_curvature", "residual_l1",
                                 "bernoulli_rel", "shoot_vs_monotone", "monotone_sweeps"], rows)
    return res


# 3


def criterion_3(s: Suite) -> CriterionResult:
    res = CriterionResult(3, "eps-monotonicity and hyperbolic limits")
    ladder = (0.2, 0.1, 0.05)
    rep = epsilon_monotonicity_check(s.flux, s.grid, ladder)
    res.add("ordering", rep.violations == 0,
            f"{rep.violations} violations, max {_fmt(rep.max_violation)}, "
            f"degenerate eps {rep.degenerate or 'none'}")
    rows = []
    dists: list[float] = []
    missing = []
    for eps in ladder:
        try:
            u = build_branch("metastable", eps, s.flux, s.grid).field
        except NoBracket as exc:
            missing.append(eps)
            rows.append((eps, math.nan, math.nan))
            res.add(f"U_M exists eps={eps}", False, f"no metastable branch: {exc}")
            continue
        vals = np.interp([0.25, 0.75], s.grid.nodes, u.values)
        d = float(max(abs(vals[0] + 0.25), abs(vals[1] - 0.25)))
        dists.append(d)
        rows.append((eps, vals[0], vals[1]))
    if not missing:
        dec = all(b < a for a, b in zip(dists, dists[1:]))
        res.add("U_M convergence", dec, "distances " + ", ".join(_fmt(d) for d in dists))
    s.write("c03_ordering.csv", ["eps_a", "eps_b"], rep.pairs)
    s.write("c03_metastable.csv", ["eps", "u_at_0.25", "u_at_0.75"], rows)
    return res


# 4


def criterion_4(s: Suite) -> CriterionResult:
    res = CriterionResult(4, "family residual law")
    g = Grid(ELL, 1000)
    rows = []
    for eps in (0.02, 0.01):
        for xi in (0.25, 0.5, 0.75):
            rep = residual_report(approx_state(eps, xi, g, with_derivative=False), s.flux)
            ok = 1.0 / 3.0 <= rep.asymptotic_ratio <= 3.0
            res.add(f"ratio eps={eps} xi={xi}", ok,
                    f"Omega {_fmt(rep.omega_big)}, asymptotic {_fmt(omega_asymptotic(eps, xi, ELL))}, "
                    f"ratio {_fmt(rep.asymptotic_ratio)}")
            rows.append((eps, xi, rep.omega_big, omega_asymptotic(eps, xi, ELL), rep.asymptotic_ratio))
        small = residual_report(approx_state(eps, 1e-3, g, with_derivative=False), s.flux).omega_big
        mid = residual_report(approx_state(eps, 0.5, g, with_derivative=False), s.flux).omega_big
        res.add(f"vanishing at 0 eps={eps}", small / mid < 1e-2,
                f"Omega(1e-3)/Omega(0.5) = {_fmt(small / mid)}")
        rows.append((eps, 1e-3, small, omega_asymptotic(eps, 1e-3, ELL), small / omega_asymptotic(eps, 1e-3, ELL)))
    s.write("c04_residual.csv", ["eps", "xi", "omega", "omega_asym", "ratio"], rows)
    return res


# 5


def criterion_5(s: Suite) -> CriterionResult:
    res = CriterionResult(5, "exponentially small lambda_1")
    eps_list = (0.0625, 0.05, 0.04)
    lam1 = []
    for eps in eps_list:
        lam1.append(float(eigensolve(assemble(eps, approx_state(eps, 0.5 * ELL, s.grid), s.flux), 2).lambdas[0]))
    s.write("c05_lambda1.csv", ["eps", "lambda1"], zip(eps_list, lam1))
    res.add("lambda_1 > 0", all(v > 0.0 for v in lam1), "lambda_1 " + ", ".join(_fmt(v) for v in lam1))
    inv = 1.0 / np.array(eps_list)
    y = np.log(np.abs(lam1))
    slope, icpt = np.polyfit(inv, y, 1)
    fit = slope * inv + icpt
    r2 = 1.0 - float(np.sum((y - fit) ** 2)) / float(np.sum((y - y.mean()) ** 2))
    target = -ELL**2 / 8.0
    ok = r2 > 0.99 and 1.25 * target <= slope <= 0.75 * target and all(v > 0.0 for v in lam1)
    res.add("affine in 1/eps", ok, f"fit of ln|lambda_1|: slope {_fmt(slope)} (target {_fmt(target)}), R^2 {r2:.5f}")
    return res


# 6


def criterion_6(s: Suite) -> CriterionResult:
    res = CriterionResult(6, "lambda_2 scaling and spectral gap")
    rep = validate_H2((0.08, 0.05, 0.03), (0.3, 0.4, 0.5, 0.6, 0.7), s.flux, s.grid)
    l2 = rep.lambda2_sqrt_eps
    neg = all(r.lambdas[1] < 0.0 for r in rep.rows)
    res.add("lambda_2 sqrt(eps)", neg and rep.lambda2_sqrt_eps_spread < 0.5,
            ", ".join(f"eps={e}: {_fmt(v)}" for e, v in l2.items()) + f"; spread {_fmt(rep.lambda2_sqrt_eps_spread)}")
    res.add("gap", rep.min_gap > 1.0, f"min lambda_1 - lambda_2 = {_fmt(rep.min_gap)}")
    res.add("lambda_k <= -C k^2", rep.c_fit > 0.0, f"fitted C = {_fmt(rep.c_fit)}")
    rows = [(r.eps, r.xi, *r.lambdas, r.gap, r.c_fit, r.sum_bound) for r in rep.rows]
    s.write("c06_h2.csv", ["eps", "xi"] + [f"lambda{k}" for k in range(1, 9)] + ["gap", "c_fit", "sum_bound"], rows)
    return res


# 7 (reads the provider-backed runs made by 8-11, so it runs last)


def criterion_7(s: Suite) -> CriterionResult:
    res = CriterionResult(7, "projection invariant")
    dx = s.grid.dx
    rows = []
    runs = s.evolve_runs()
    if not runs:
        s.metastable_run(0.08)
        runs = s.evolve_runs()
    for name, tr in sorted(runs.items()):
        u_l2 = np.asarray(tr.u_l2)
        pr = np.asarray(tr.proj_residual)
        bad_proj = int(np.count_nonzero(~(pr < 1e-6 * u_l2)))
        t0, formed = post_transient_start(tr)
        t = np.asarray(tr.times)
        post = t >= t0
        gap = np.abs(np.asarray(tr.xi_zero) - np.asarray(tr.xi_proj))[post]
        worst = float(np.max(gap, initial=0.0)) if np.all(np.isfinite(gap)) else math.inf
        res.add(f"projection {name}", bad_proj == 0,
                f"{bad_proj} of {t.size} records violate or lack a projection, max residual/|u| "
                f"{_fmt(float(np.nanmax(pr / u_l2)) if np.any(np.isfinite(pr)) else math.nan)}")
        res.add(f"trackers {name}", worst < 3 * dx,
                f"max |xi_zero - xi_proj| = {_fmt(worst)} for t >= {t0:g}"
                f"{'' if formed else ' (no formation, deadline used)'}")
        rows.append((name, t.size, bad_proj, t0, worst))
    s.write("c07_projection.csv", ["run", "records", "bad_projection", "t_start", "max_tracker_gap"], rows)
    return res


# 8


def criterion_8(s: Suite) -> CriterionResult:
    res = CriterionResult(8, "metastable PDE dynamics")
    tr = s.metastable_run(0.08)
    tf = tr.t_form()
    res.add("formation", tf is not None and tf <= T_FORM_MAX,
            f"t_form = {tf}" if tf is not None else "v_l2 never below 0.1 |u0|_L2")
    t = np.asarray(tr.times)
    xi = np.asarray(tr.xi_zero)
    t0 = tf if tf is not None else T_FORM_MAX
    post = t >= t0
    speed = np.abs(np.diff(xi[post]) / np.diff(t[post])) if np.count_nonzero(post) > 1 else np.array([math.inf])
    vmax = float(np.max(speed)) if np.all(np.isfinite(speed)) else math.inf
    res.add("slow drift", tf is not None and vmax < 0.05, f"max |dxi/dt| = {_fmt(vmax)} for t >= {t0:g}")
    t8 = exit_time(tr, 0.05)
    t5 = exit_time(s.metastable_run(0.05), 0.05)
    ok = t8 is not None and t5 is not None and t5 > 1.5 * t8
    res.add("exit times", ok, f"exit_time(0.08) = {t8}, exit_time(0.05) = {t5}")
    side = predicted_attractor(0.4, ELL)
    target = build_branch(side, 0.08, s.flux, s.grid).field
    dist = l2_norm(tr.final - target)
    other = build_branch("negative" if side == "positive" else "positive", 0.08, s.flux, s.grid).field
    res.add("attractor", dist < 0.05 and dist < l2_norm(tr.final - other),
            f"L2 distance to the {side} branch at t = {t[-1]:g}: {_fmt(dist)}")
    s.write("c08_trajectory.csv", ["t", "xi_zero", "xi_proj", "v_l2", "u_l2"],
            zip(tr.times, tr.xi_zero, tr.xi_proj, tr.v_l2, tr.u_l2))
    return res


# 9


def criterion_9(s: Suite) -> CriterionResult:
    res = CriterionResult(9, "reduced interface ODE versus the PDE")
    eps = 0.08
    tr = s.metastable_run(eps)
    prov = s.provider(eps)
    t0, formed = post_transient_start(tr)
    t = np.asarray(tr.times)
    xi = tr.xi
    i0 = int(np.searchsorted(t, t0))
    span = 5.0 / (eps * ELL)
    if math.isfinite(xi[i0]):
        red = reduced_ode(float(xi[i0]), span, eps, "spectral", ell=ELL, provider=prov, t0=float(t[i0]))
        win = (t >= t[i0]) & (t <= t[i0] + span)
        ode = np.interp(t[win], red.times, red.xi)
        dev = float(np.max(np.abs(xi[win] - ode)))
        s.write("c09_spectral.csv", ["t", "xi_pde", "xi_ode"], zip(t[win], xi[win], ode))
    else:
        dev = math.inf
    res.add("spectral theta", formed and dev < 0.05 * ELL,
            f"max |xi_PDE - xi_ODE| = {_fmt(dev)} on [{t[i0]:g}, {t[i0] + span:g}]"
            f"{'' if formed else '; no interface formation'}")
    betas = {}
    for e in (0.1, 0.05):
        red = reduced_ode(0.4, 5.0 / (e * ELL), e, "asymptotic", ell=ELL)
        betas[e] = red.beta
        res.add(f"beta eps={e}", 0.8 * e * ELL <= red.beta <= 1.2 * e * ELL, f"beta {red.beta:.6g} vs eps*ell {e}")
    ratio = betas[0.05] / betas[0.1]
    res.add("beta halves", 0.4 <= ratio <= 0.6, f"beta(0.05)/beta(0.1) = {ratio:.6g}")
    s.write("c09_beta.csv", ["eps", "beta"], sorted(betas.items()))
    return res


# 10


def _perturbed_start(s: Suite, eps: float, xi0: float, size: float) -> Field:
    prov = s.provider(eps)
    st, sd = prov.get(xi0)
    if size == 0.0:
        return st.field
    phi2 = sd.phis[1]
    return st.field + phi2 * (size / l2_norm(phi2))


def _modal_slope(s: Suite, eps: float, xi0: float, size: float, window: float = 1.0
                 ) -> tuple[float, float, float]:
    """Fitted log-slope of the v0-driven part of ``v_2`` against the mean of ``lambda_2``.

    The driven part is ``v_2`` of the perturbed run minus ``v_2`` of the run
    started on the family itself; the residual forcing cancels in the
    difference and what is left is the ``z`` component.  The raw slope of
    ``log|v_2|`` is returned as well.
    """
    prov = s.provider(eps)
    pert = s.run(f"modal_v0={size}", eps, _perturbed_start(s, eps, xi0, size), window, stride=0.05)
    base = s.run("modal_v0=0.0", eps, _perturbed_start(s, eps, xi0, 0.0), window, stride=0.05)
    t = np.asarray(pert.times)
    m = np.array([v[1] for v in pert.modal])
    d = m - np.array([v[1] for v in base.modal])
    slope = float(np.polyfit(t, np.log(np.abs(d)), 1)[0])
    raw = float(np.polyfit(t, np.log(np.abs(m)), 1)[0])
    lam2 = np.array([prov.lambda_at(x, 2) for x in pert.xi])
    pred = float(trapezoid(lam2, t) / (t[-1] - t[0]))
    s.write(f"c10_modal_eps={eps}.csv", ["t", "v2", "v2_base", "lambda2"],
            zip(t, m, m - d, lam2))
    return slope, pred, raw


def criterion_10(s: Suite) -> CriterionResult:
    res = CriterionResult(10, "remainder estimate along the flow")
    xi0 = 0.4
    T = 20.0
    consts: dict[float, float] = {}
    rows = []
    for eps in (0.08, 0.05):
        worst = 0.0
        for size in (0.0, 0.05):
            u0 = _perturbed_start(s, eps, xi0, size)
            tr = s.run(f"family_v0={size}", eps, u0, T, snapshots=True)
            rep = theorem_diagnostics(tr, s.provider(eps))
            worst = max(worst, rep.remainder_constant)
            rows.extend((eps, size, t, r, o, z, q, vh) for t, r, o, z, q, vh in
                        zip(rep.times, rep.r_l2, rep.omega, rep.z_l2, rep.q_l1, rep.v_h1))
            if size > 0.0:
                slope, pred, raw = _modal_slope(s, eps, xi0, size)
                rel = abs(slope - pred) / abs(pred)
                res.add(f"modal slope eps={eps}", rel < 0.15,
                        f"driven log|v_2| slope {_fmt(slope)}, mean lambda_2 {_fmt(pred)}, "
                        f"relative gap {_fmt(rel)} (raw v_2 slope {_fmt(raw)})")
        consts[eps] = worst
    spread = max(consts.values()) / min(consts.values())
    res.add("remainder constant", spread < 3.0,
            ", ".join(f"C(eps={e}) = {_fmt(c)}" for e, c in consts.items()) + f"; ratio {_fmt(spread)}")
    s.write("c10_remainder.csv", ["eps", "v0_l2", "t", "r_l2", "omega", "z_l2", "q_l1", "v_h1"], rows)
    return res


# 11


def criterion_11(s: Suite) -> CriterionResult:
    res = CriterionResult(11, "symmetry pinning and its instability")
    eps = 0.08
    T = 100.0
    half = 0.5 * ELL
    odd = make_initial(InitialDatum(half), s.grid)
    tr = s.run("odd", eps, odd, T, provider=False)
    xi = np.asarray(tr.xi_zero)
    dev = float(np.max(np.abs(xi - half))) if np.all(np.isfinite(xi)) else math.inf
    res.add("pinned", dev < 1e-8, f"max |xi - ell/2| = {_fmt(dev)} up to t = {T:g}")
    bump = s.grid.field(lambda x: np.sin(math.pi * x / ELL))
    bump = bump.with_values(np.r_[0.0, bump.interior, 0.0])
    pert = odd + bump * (1e-3 / l2_norm(bump))
    tp = s.run("odd_perturbed", eps, pert, T, provider=False)
    xp = np.asarray(tp.xi_zero)
    esc = float(np.nanmax(np.abs(xp - half)))
    res.add("escape", esc > 0.05, f"max |xi - ell/2| = {_fmt(esc)} for the 1e-3 perturbation")
    s.write("c11_symmetry.csv", ["t", "xi_odd", "xi_perturbed"], zip(tr.times, xi, xp))
    return res


# 12


def artifact_diff(a: Path, b: Path) -> list[str]:
    """Relative paths of CSV files that differ or exist on one side only."""
    fa = {p.relative_to(a) for p in a.rglob("*.csv")}
    fb = {p.relative_to(b) for p in b.rglob("*.csv")}
    bad = sorted(str(p) for p in fa ^ fb)
    bad += sorted(str(p) for p in fa & fb if not filecmp.cmp(a / p, b / p, shallow=False))
    return bad


def criterion_12(first: Path, second: Path) -> CriterionResult:
    res = CriterionResult(12, "determinism")
    n = len(list(first.rglob("*.csv")))
    bad = artifact_diff(first, second)
    res.add("identical CSVs", n > 0 and not bad,
            f"{n} files compared, {len(bad)} differ" + (f": {', '.join(bad[:5])}" if bad else ""))
    return res


CRITERIA: dict[int, Callable[[Suite], CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    7: criterion_7,
}


def run_criteria(out_dir: Path | None, only: set[int] | None = None,
                 log: Callable[[str], None] | None = None) -> list[CriterionResult]:
    suite = Suite(out_dir)
    results = []
    for num, fn in CRITERIA.items():
        if only is not None and num not in only:
            continue
        t0 = time.perf_counter()
        try:
            r = fn(suite)
        except (UnresolvedLayer, ArithmeticError, ValueError, RuntimeError) as exc:
            r = CriterionResult(num, fn.__name__)
            r.add("error", False, f"{type(exc).__name__}: {exc}")
        r.seconds = time.perf_counter() - t0
        results.append(r)
        if log is not None:
            log(_report(r))
    return sorted(results, key=lambda r: r.number)


def _report(r: CriterionResult) -> str:
    lines = [r.line() + f"  [{r.seconds:.1f} s]"]
    lines += [f"    {'ok  ' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in r.checks]
    return "\n".join(lines)


def verify(out_dir: str | Path, *, only: set[int] | None = None, determinism: bool = True,
           log: Callable[[str], None] | None = print) -> list[CriterionResult]:
    """Run the criteria into ``out_dir``; criterion 12 repeats the run in a scratch directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_criteria(out, only, log)
    if determinism and (only is None or 12 in only):
        with tempfile.TemporaryDirectory() as tmp:
            run_criteria(Path(tmp), only, None)
            r12 = criterion_12(out, Path(tmp))
        if log is not None:
            log(_report(r12))
        results.append(r12)
    io.write_csv(out / "verdicts.csv", ["criterion", "check", "passed"],
                 [(r.number, c.name, int(c.passed)) for r in results for c in r.checks])
    return results


def summary_lines(results: list[CriterionResult]) -> list[str]:
    return [r.line() for r in sorted(results, key=lambda r: r.number)]
