"""Command-line entry point.

    slowmotion COMMAND [--config FILE] [key=value ...] [--key value ...]

Commands: steady, family, spectrum, evolve, reduce, sweep, verify.  Exit
status is 0 on success, 1 on a configuration error, 2 on a numerical failure
and 3 when ``verify`` finds a failing criterion.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable

from . import io
from .config import ConfigError, RunConfig, dump, load
from .core import Grid
from .dynamics import (
    CFLViolation,
    InitialDatum,
    MissingSnapshots,
    NumericalBlowup,
    evolve,
    exit_time,
    flame_front,
    make_initial,
    reduced_ode,
)
from .family import NoRoot, UnresolvedLayer, approx_state, exact_matched_state, omega_asymptotic, residual_report, zero_state
from .spectral import SignConditionViolated, SpectralProvider, assemble, eigensolve, validate_H2
from .stationary import C1MatchFailure, NoBracket, NonConvergence, OrderViolation, build_branch

COMMANDS = ("steady", "family", "spectrum", "evolve", "reduce", "sweep", "verify")

NUMERICAL_ERRORS = (
    NoBracket, NonConvergence, OrderViolation, C1MatchFailure, UnresolvedLayer, NoRoot,
    SignConditionViolated, CFLViolation, NumericalBlowup, MissingSnapshots, FloatingPointError,
)

Summary = dict[str, float | str]


def _grid(cfg: RunConfig) -> Grid:
    return Grid(cfg.ell, cfg.n)


def _provider(cfg: RunConfig) -> SpectralProvider:
    return SpectralProvider(cfg.eps, cfg.flux_function(), _grid(cfg), cfg.k_max, cfg.construction)


def cmd_steady(cfg: RunConfig, out: Path) -> Summary:
    grid = _grid(cfg)
    flux = cfg.flux_function()
    rows = []
    summary: Summary = {}
    for kind in cfg.branches:
        br = build_branch(kind, cfg.eps, flux, grid)
        rows.extend((kind, x, u) for x, u in zip(grid.nodes, br.field.values))
        summary[f"residual_{kind}"] = br.residual_l1
        print(f"{kind}: residual L1 {br.residual_l1:.3e}, zero crossings {br.zero_crossings}")
    io.write_csv(out / "steady.csv", ["branch", "x", "u"], rows)
    return summary


def cmd_family(cfg: RunConfig, out: Path) -> Summary:
    prov = _provider(cfg)
    flux = cfg.flux_function()
    rows = []
    for xi in cfg.xi_list:
        st, sd = prov.get(xi)
        rep = residual_report(st, flux, sd)
        rows.append((cfg.eps, xi, rep.omega_big, omega_asymptotic(cfg.eps, xi, cfg.ell), rep.theta, rep.theta_asym))
    io.write_csv(out / "family.csv", ["eps", "xi", "omega_big", "omega_asym", "theta_num", "theta_asym"], rows)
    return {"omega_max": max((r[2] for r in rows), default=math.nan)}


def _state(cfg: RunConfig, grid: Grid):
    if cfg.state == "zero":
        return zero_state(cfg.eps, grid)
    if cfg.state == "exact_matched":
        return exact_matched_state(cfg.eps, cfg.xi, grid, cfg.flux_function(), with_derivative=True)
    return approx_state(cfg.eps, cfg.xi, grid)


def cmd_spectrum(cfg: RunConfig, out: Path) -> Summary:
    grid = _grid(cfg)
    flux = cfg.flux_function()
    st = _state(cfg, grid)
    sd = eigensolve(assemble(cfg.eps, st, flux), cfg.k_max)
    io.write_csv(out / "spectrum.csv", ["eps", "xi", "k", "lambda"],
                 [(cfg.eps, st.xi, k, lam) for k, lam in enumerate(sd.lambdas, 1)])
    for k, lam in enumerate(sd.lambdas, 1):
        print(f"lambda_{k} = {lam:.12g}")
    rep = validate_H2(cfg.eps_list, cfg.xi_list, flux, grid, k_max=cfg.k_max, with_sums=cfg.with_h2_sums)
    io.write_csv(out / "h2report.csv", ["eps", "xi", "lambda1", "lambda2", "gap", "c_fit", "sum_bound"],
                 [(r.eps, r.xi, r.lambdas[0], r.lambdas[1], r.gap, r.c_fit, r.sum_bound) for r in rep.rows])
    io.write_csv(out / "h2summary.csv", ["eps", "Lambda1", "Lambda2", "lambda2_sqrt_eps"],
                 [(e, rep.Lambda1[e], rep.Lambda2[e], rep.lambda2_sqrt_eps.get(e, math.nan)) for e in rep.Lambda1])
    return {"lambda1": float(sd.lambdas[0]), "lambda2": float(sd.lambdas[1]) if sd.lambdas.size > 1 else math.nan,
            "min_gap": rep.min_gap, "c_fit": rep.c_fit}


def cmd_evolve(cfg: RunConfig, out: Path) -> Summary:
    grid = _grid(cfg)
    flux = cfg.flux_function()
    u0 = make_initial(InitialDatum(cfg.a0, cfg.shape, cfg.amplitude, cfg.orientation), grid)
    snaps = cfg.snapshot_times or (0.0, cfg.T)
    tr = evolve(u0, cfg.T, cfg.dt_value(), cfg.eps, flux, _provider(cfg), stride=cfg.stride,
                snapshot_times=snaps, k_max=cfg.k_max)
    header = ["t", "xi_zero", "xi_proj", "v_l2", "v_h1"] + [f"v{k}" for k in range(1, cfg.k_max + 1)]
    io.write_csv(out / "trajectory.csv", header,
                 ([t, xz, xp, vl, vh, *m] for t, xz, xp, vl, vh, m in
                  zip(tr.times, tr.xi_zero, tr.xi_proj, tr.v_l2, tr.v_h1, tr.modal)))
    for t, u in sorted(tr.snapshots.items()):
        extra = {"y": flame_front(u).values} if cfg.flame_front else None
        io.write_field(out / f"snapshot_t{io.time_tag(t)}.csv", u, extra)
    print(f"t = {tr.times[-1]:g}: xi_zero {tr.xi_zero[-1]:.6f}, xi_proj {tr.xi_proj[-1]:.6f}")
    tf = tr.t_form()
    te = exit_time(tr, cfg.delta)
    return {"xi_zero_final": tr.xi_zero[-1], "xi_proj_final": tr.xi_proj[-1],
            "t_form": math.nan if tf is None else tf, "exit_time": math.nan if te is None else te}


def cmd_reduce(cfg: RunConfig, out: Path) -> Summary:
    prov = _provider(cfg) if cfg.theta_source == "spectral" else None
    red = reduced_ode(cfg.xi0, cfg.T, cfg.eps, cfg.theta_source, ell=cfg.ell, provider=prov)
    io.write_csv(out / "reduced.csv", ["t", "xi", "beta"], ((t, x, red.beta) for t, x in zip(red.times, red.xi)))
    print(f"beta = {red.beta:.12g}")
    return {"xi_final": float(red.xi[-1]), "beta": red.beta}


RUNNERS: dict[str, Callable[[RunConfig, Path], Summary]] = {
    "steady": cmd_steady,
    "family": cmd_family,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "reduce": cmd_reduce,
}


def _sweep_cell(args: tuple[int, RunConfig]) -> tuple[int, str, Summary]:
    idx, cfg = args
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        summ = RUNNERS[cfg.sweep_command](cfg, out)
        status = "ok"
    except NUMERICAL_ERRORS as exc:
        summ, status = {}, f"{type(exc).__name__}: {exc}".replace("\n", " ")
    return idx, status, summ


def sweep_cells(cfg: RunConfig) -> list[RunConfig]:
    """Cross product of ``eps_list x xi_list x a0_list`` (an empty list keeps the scalar)."""
    root = Path(cfg.output_dir)
    cells = []
    for e in cfg.eps_list or (cfg.eps,):
        for x in cfg.xi_list or (cfg.xi,):
            for a in cfg.a0_list or (cfg.a0,):
                i = len(cells)
                cells.append(replace(cfg, eps=e, xi=x, xi0=x, a0=a, xi_list=(x,), eps_list=(e,),
                                     output_dir=str(root / f"cell_{i:04d}")))
    return cells


def cmd_sweep(cfg: RunConfig, out: Path) -> Summary:
    cells = sweep_cells(cfg)
    cap = int(os.environ.get("SLOWMOTION_THREADS", "0") or 0) or (os.cpu_count() or 1)
    workers = max(1, min(cap, len(cells)))
    jobs = list(enumerate(cells))
    if workers == 1:
        results = [_sweep_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_cell, jobs))
    results.sort(key=lambda r: r[0])
    keys = sorted({k for _, _, s in results for k in s})
    rows = [(i, c.eps, c.xi, c.a0, status, *[s.get(k, math.nan) for k in keys])
            for (i, status, s), c in zip(results, cells)]
    io.write_csv(out / "summary.csv", ["cell", "eps", "xi", "a0", "status", *keys], rows)
    failed = sum(1 for _, st, _ in results if st != "ok")
    print(f"{len(cells)} cells, {failed} failed, {workers} worker(s)")
    return {"cells": len(cells), "failed": failed}


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    from .acceptance import summary_lines, verify

    results = verify(out, only=set(cfg.criteria) or None, determinism=cfg.determinism)
    print()
    for line in summary_lines(results):
        print(line)
    return 0 if all(r.passed for r in results) else 3


def _split_overrides(tokens: list[str]) -> dict[str, str]:
    pairs: dict[str, str] = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.startswith("--"):
            body = tok[2:]
            if "=" in body:
                k, v = body.split("=", 1)
            else:
                if i + 1 >= len(tokens):
                    raise ConfigError(body, "flag needs a value")
                k, v = body, tokens[i + 1]
                i += 1
        elif "=" in tok:
            k, v = tok.split("=", 1)
        else:
            raise ConfigError(tok, "expected key=value or --key value")
        pairs[k.replace("-", "_")] = v
        i += 1
    return pairs


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slowmotion",
                                description="Steady states, spectra, PDE runs and the acceptance suite.",
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog="Every config key can be given as key=value or --key value.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", default=None, help="key = value file (defaults are built in)")
    p.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    return p


def main(argv: list[str] | None = None) -> int:
    args, rest = build_parser().parse_known_args(argv)
    try:
        cfg = load(args.config, _split_overrides(rest))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"config error: key 'config': {exc}", file=sys.stderr)
        return 1
    if args.print_config:
        sys.stdout.write(dump(cfg))
        return 0
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "verify":
            return cmd_verify(cfg, out)
        if args.command == "sweep":
            cmd_sweep(cfg, out)
        else:
            RUNNERS[args.command](cfg, out)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
