"""Command-line entry point: ``wavebreak {criteria,simulate,sweep,kernels,verify}``.

Exit codes: 0 pass or inconclusive, 1 a theorem check failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import diagnostics
from .cgn import working_cgn
from .config import ConfigError, RunConfig, load_config
from .criteria import (
    CriterionRangeError,
    NotApplicable,
    critical_amplitude,
    evaluate,
    select_theta,
    theorem_criterion,
)
from .evolution import TRACE_COLUMNS, run
from .io import Manifest, to_json, write_csv, write_json
from .operators import UnsupportedCase, a2_params, bessel_kernel, whitham_kernel
from .special import gamma_fn

USAGE_ERRORS = (ConfigError, CriterionRangeError, UnsupportedCase, NotApplicable)


class UsageError(ValueError):
    pass


# -- shared setup ---------------------------------------------------------------------

@dataclasses.dataclass
class Setup:
    cfg: RunConfig
    model: object
    grid: object
    tau: float | None
    c_gn: float
    theta: float
    amplitude: float


def _setup(cfg: RunConfig, amplitude=None, theta=None, s=None, c_gn=None) -> Setup:
    if s is not None:
        cfg = RunConfig({**cfg.values, "model": {**cfg["model"], "s": s}}, cfg.raw)
    try:
        model = cfg.model()
        grid = cfg.grid()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    tau = cfg["model"]["tau"]
    if c_gn is None:
        c = cfg["criteria"]["c_gn"]
        c_gn = working_cgn() if c == "auto" else float(c)
    if theta is None:
        theta = cfg["criteria"]["theta"]
    unit = cfg.data(1.0).sample(grid)
    if theta == "auto":
        theta = select_theta(model, unit, c_gn, tau).theta
    a = cfg["data"]["amplitude"] if amplitude is None else amplitude
    if cfg["data"]["amplitude_mode"] == "critical":
        a = a * critical_amplitude(model, unit, theta, c_gn, tau)
    return Setup(cfg, model, grid, tau, c_gn, float(theta), float(a))


def _criterion(st: Setup):
    u = st.cfg.data(st.amplitude).sample(st.grid)
    return evaluate(st.model, u, st.theta, st.c_gn, st.tau), u


def _out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


# -- commands ---------------------------------------------------------------------------

def cmd_criteria(args, cfg: RunConfig) -> int:
    st = _setup(cfg)
    rep, u = _criterion(st)
    body = rep.to_dict()
    body["amplitude"] = st.amplitude
    try:
        params = a2_params(st.model, tau=st.tau)
        if not params.is_l1:
            thm = theorem_criterion(u, min(st.theta, _theta0(params)), params, c_gn=st.c_gn)
            body["details"]["theorem_threshold"] = thm.threshold
    except (UnsupportedCase, CriterionRangeError):
        pass
    out = _out(args)
    man = Manifest("criteria", cfg.raw, out)
    man.add(write_json(os.path.join(out, "criteria.json"), body))
    man.write()
    print(to_json(body))
    return 0


def _theta0(params):
    from .criteria import exponents
    return exponents(params).theta0


def _simulate_one(st: Setup):
    rep, _ = _criterion(st)
    trace, est = run(st.cfg.sim(st.model, st.cfg.data(st.amplitude), st.grid))
    checks = diagnostics.simulation_checks(trace, est, rep)
    rec = [c for c in checks.checks if c.check.startswith("reconcile/")]
    within = None
    if rec and rec[0].status != "inconclusive":
        within = rec[0].passed
    return rep, trace, est, checks, within


def _estimate_body(rep, est, within):
    body = {
        "t_star_est": est.t_star_est,
        "stop_reason": est.stop_reason,
        "fit_slope": est.fit_slope,
        "fit_quality": est.fit_quality,
        "t_lo": rep.t_lo,
        "t_hi": rep.t_hi,
        "within_bounds": within,
        "valid": est.valid,
        "note": est.note,
        "growth": est.growth,
        "n": est.n,
        "criterion_holds": rep.holds,
        "theta": rep.theta,
    }
    return body


def cmd_simulate(args, cfg: RunConfig) -> int:
    st = _setup(cfg)
    rep, trace, est, checks, within = _simulate_one(st)
    out = _out(args)
    man = Manifest("simulate", cfg.raw, out)
    trace_path = os.path.join(out, "trace.csv")
    write_csv(trace_path, TRACE_COLUMNS, zip(*(trace[c] for c in TRACE_COLUMNS)))
    man.add(trace_path)
    body = _estimate_body(rep, est, within)
    man.add(write_json(os.path.join(out, "estimate.json"), body))
    man.add(write_json(os.path.join(out, "criteria.json"), rep.to_dict()))
    with open(os.path.join(out, "checks.json"), "w") as fh:
        fh.write(checks.to_json() + "\n")
    man.add(os.path.join(out, "checks.json"))
    man.write()
    print(to_json(body))
    if not est.valid:
        print(f"warning: {est.note}", file=sys.stderr)
    return 1 if within is False else 0


SWEEP_COLUMNS = ("s", "theta", "amplitude", "lhs", "rhs", "holds", "t_star_est", "t_lo", "t_hi",
                 "within_bounds", "stop_reason", "error")


def _sweep_task(task):
    cfg, c_gn, s, theta, amp, simulate = task
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row.update(s="" if s is None else s, theta="" if theta is None else theta, amplitude=amp)
    try:
        st = _setup(cfg, amplitude=amp, theta=theta, s=s, c_gn=c_gn)
        row["theta"] = st.theta
        if simulate:
            rep, _, est, _, within = _simulate_one(st)
            row.update(t_star_est=est.t_star_est, stop_reason=est.stop_reason,
                       within_bounds="" if within is None else within)
        else:
            rep, _ = _criterion(st)
        row.update(lhs=rep.lhs, rhs=rep.rhs, holds=rep.holds, t_lo=rep.t_lo, t_hi=rep.t_hi)
    except (ValueError, ArithmeticError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return [row[c] for c in SWEEP_COLUMNS]


def cmd_sweep(args, cfg: RunConfig) -> int:
    sw = cfg["sweep"]
    amps = sw["amplitudes"] if sw["amplitudes"] is not None else (cfg["data"]["amplitude"],)
    thetas = sw["thetas"] if sw["thetas"] is not None else (None,)
    ss = sw["s_values"] if sw["s_values"] is not None else (None,)
    c = cfg["criteria"]["c_gn"]
    c_gn = working_cgn() if c == "auto" else float(c)
    tasks = [(cfg, c_gn, s, th, a, sw["simulate"])
             for s in sorted(ss, key=_none_first)
             for th in sorted(thetas, key=_none_first)
             for a in sorted(amps)]
    workers = args.workers or sw["workers"] or os.cpu_count() or 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            rows = list(pool.map(_sweep_task, tasks))
    else:
        rows = [_sweep_task(t) for t in tasks]
    out = _out(args)
    man = Manifest("sweep", cfg.raw, out)
    man.add(write_csv(os.path.join(out, "sweep.csv"), SWEEP_COLUMNS, rows))
    man.write({"rows": len(rows), "workers": workers})
    failed = sum(1 for r in rows if r[SWEEP_COLUMNS.index("within_bounds")] is False)
    errors = sum(1 for r in rows if r[-1])
    print(f"sweep: {len(rows)} rows, {failed} outside bounds, {errors} errors")
    return 1 if failed else 0


def _none_first(v):
    return (v is not None, v if v is not None else 0.0)


def cmd_kernels(args, cfg: RunConfig) -> int:
    k = cfg["kernels"]
    out = _out(args)
    man = Manifest("kernels", cfg.raw, out)
    x = np.geomspace(k["x_min"], k["x_max"], k["points"])
    kw = whitham_kernel(x)
    scaled = np.sqrt(2 * np.pi * x) * kw
    man.add(write_csv(os.path.join(out, "whitham_kernel.csv"), ("x", "K", "sqrt_2pi_x_K", "margin"),
                      zip(x, kw, scaled, 1.0 - scaled)))
    rows, notes = [], []
    for s in k["s_values"]:
        if s == 1.0:
            notes.append("s = 1 skipped in the G_s table: gamma(s) has a pole there")
            continue
        g = bessel_kernel(s, x)
        bound = np.full_like(x, gamma_fn(s) / 2) if s > 1 else gamma_fn(s) / 2 ** s * x ** (s - 1)
        rows.extend(zip([s] * len(x), x, g, bound, bound - g))
    man.add(write_csv(os.path.join(out, "bessel_kernel.csv"), ("s", "x", "G", "bound", "margin"), rows))
    s_grid = np.linspace(k["gamma_s_min"], k["gamma_s_max"], k["gamma_points"])
    s_grid = np.unique(np.concatenate([s_grid, 1.0 + np.array([-1e-3, -1e-4, 1e-4, 1e-3])]))
    skipped = s_grid == 1.0
    if skipped.any():
        notes.append("s = 1 skipped in the gamma table (pole)")
    s_grid = s_grid[~skipped]
    gam = np.array([gamma_fn(s) for s in s_grid])
    man.add(write_csv(os.path.join(out, "gamma.csv"), ("s", "gamma", "abs_1_minus_s_gamma"),
                      zip(s_grid, gam, np.abs(1 - s_grid) * gam)))
    man.write({"notes": notes})
    for n in notes:
        print(n)
    print(f"kernels: wrote {len(man.outputs)} tables to {out}")
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    rep = diagnostics.verify(seed=args.seed)
    out = _out(args)
    man = Manifest("verify", cfg.raw, out)
    path = os.path.join(out, "verify.json")
    with open(path, "w") as fh:
        fh.write(rep.to_json() + "\n")
    man.add(path)
    man.write({"seed": args.seed})
    print(_family_table(rep))
    print(f"verify: {len(rep.checks)} checks, {len(rep.failures)} failed")
    return 0 if rep.passed else 1


def _family_table(rep) -> str:
    fam = {}
    for c in rep.checks:
        parts = c.check.split("/")
        key = "/".join(parts[:3]) if parts[0] in ("A1", "A2") else "/".join(parts[:2])
        if "=" in key.split("/")[-1]:
            key = "/".join(key.split("/")[:-1])
        cur = fam.setdefault(key, [0, 0, math.inf])
        cur[0] += 1
        cur[1] += c.status == "fail"
        if c.status != "inconclusive":
            cur[2] = min(cur[2], c.margin)
    lines = [f"{'family':44s} {'checks':>7s} {'failed':>7s} {'min margin':>12s}"]
    for key in sorted(fam):
        n, f, m = fam[key]
        lines.append(f"{key:44s} {n:7d} {f:7d} {m:12.4g}")
    return "\n".join(lines)


COMMANDS = {
    "criteria": cmd_criteria,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "kernels": cmd_kernels,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wavebreak", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="INI configuration file (defaults apply when omitted)")
    p.add_argument("--out", default="wavebreak-out", help="output directory")
    p.add_argument("--workers", type=int, default=0, help="sweep worker processes (default: cores)")
    p.add_argument("--seed", type=int, default=0, help="seed of the verification corpus")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
