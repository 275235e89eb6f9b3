"""Command-line interface: ``simulate``, ``sweep``, ``verify``, ``phases`` and ``symmetrize-check``.

Every subcommand accepts ``--config`` with a JSON document mirroring
:class:`bsq2d.experiment.ExperimentPlan`; explicit flags override it.
Results go to ``--out`` as CSV/JSON with PNG figures alongside.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .experiment import ExperimentPlan, lifespan_sweep, simulate, symmetrize_consistency
from .io import write_json, write_resonance_csv, write_rows_csv

log = logging.getLogger("bsq2d")

# flag name -> plan field
_PLAN_FLAGS = {
    "n": "n",
    "L": "length",
    "N0": "N0",
    "seed": "seed",
    "dt": "dt",
    "cadence": "cadence",
    "scheme": "scheme",
    "horizon_T": "horizon_T",
    "horizon_p": "horizon_p",
    "workers": "workers",
    "tail_tol": "tail_tol",
}


def _plan_from(args: argparse.Namespace) -> ExperimentPlan:
    data: dict = {}
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
    for flag, key in _PLAN_FLAGS.items():
        val = getattr(args, flag, None)
        if val is not None:
            data[key] = val
    if getattr(args, "eps", None):
        data["epsilons"] = list(args.eps)
    if getattr(args, "linear", False):
        data["nonlinear"] = False
    if getattr(args, "no_ledger", False):
        data["ledger"] = False
    if getattr(args, "compare_n", None) is not None:
        data["compare_n"] = args.compare_n or None
    return ExperimentPlan.from_dict(data)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON plan file; flags override its values")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--n", type=int, help="grid points per direction")
    p.add_argument("--L", type=float, help="period of the domain")
    p.add_argument("--N0", type=int, help="Sobolev index of the energy")
    p.add_argument("--seed", type=int, help="random seed")


def _add_time(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dt", type=float, help="largest time step")
    p.add_argument("--cadence", type=float, help="diagnostics interval")
    p.add_argument("--scheme", choices=["IFRK4", "ETDRK4"])
    p.add_argument("--linear", action="store_true", help="disable the nonlinear terms")
    p.add_argument("--no-ledger", action="store_true", help="skip per-term ledger columns")


# commands ------------------------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    from .plotting import plot_energy, plot_ledger

    plan = _plan_from(args)
    eps = plan.epsilons[0]
    spec = plan.entry(eps)
    if args.t_end is not None:
        spec = replace(spec, t_end=args.t_end)
    log.info("simulate eps=%g n=%d t_end=%g", eps, spec.n, spec.t_end)
    res = simulate(spec, progress=lambda j, m: log.debug("row %d/%d", j, m))
    out = Path(args.out)
    write_rows_csv(out / "run.csv", res.rows)
    write_json(out / "run.json", res.summary(plan.tail_tol))
    plot_energy(res.rows, out / "energy.png", title=f"eps={eps:g}, n={spec.n}")
    if spec.ledger:
        plot_ledger(res.rows, out / "ledger.png")
    print(json.dumps({"rows": len(res.rows), "completed": res.completed, "out": str(out)}))
    return 0 if res.completed else 3


def cmd_sweep(args: argparse.Namespace) -> int:
    from .plotting import plot_sweep

    plan = _plan_from(args)
    summary = lifespan_sweep(plan)
    out = Path(args.out)
    for e in summary.entries:
        write_rows_csv(out / f"run_eps{e.epsilon:g}_n{e.result.spec.n}.csv", e.result.rows)
        if e.compare is not None:
            write_rows_csv(out / f"run_eps{e.epsilon:g}_n{e.compare.spec.n}.csv", e.compare.rows)
    write_json(out / "sweep.json", summary.to_dict())
    plot_sweep(summary, out / "sweep.png")
    print(json.dumps({"bounded": summary.bounded, "resolution_stable": summary.resolution_stable, "C_ls": summary.C_ls}))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    from .verify import verify

    report = verify(args.suite)
    write_json(Path(args.out) / "verify.json", report)
    for s in report["suites"]:
        print(f"{s['suite']:<14} {'PASS' if s['passed'] else 'FAIL'}")
        for c in s["checks"]:
            if not c["passed"]:
                print(f"    {c['name']}: {c['value']} (threshold {c['threshold']}) {c['detail']}")
    return 0 if report["passed"] else 1


def cmd_phases(args: argparse.Namespace) -> int:
    from . import plotting
    from .phases import AnalysisCutoffs, jacobian_check, resonance_sample, sample_regime, symbol_bound_maxima
    from .probes import angular_bilinear_probe, b_smoothing_scan, fit_gain

    out = Path(args.out)
    modes = {"resonance", "symbols", "jacobian", "bilinear", "smoothing"} if args.mode == "all" else {args.mode}
    eps_list = args.eps or [0.01]
    summary: dict = {}
    if "resonance" in modes:
        cut = AnalysisCutoffs(args.D, args.K)
        res_all = {}
        for sign in (1, -1):
            r = resonance_sample(eps_list[0], cut, (sign, -1), args.samples, args.seed)
            tag = "plus" if sign == 1 else "minus"
            write_resonance_csv(out / f"resonance_{tag}.csv", r)
            plotting.plot_resonance(r, out / f"resonance_{tag}.png")
            res_all[tag] = {
                "accepted": r.n_accepted,
                "measure": r.measure,
                "measure_stderr": r.measure_stderr,
                "measure_upper": r.measure_upper,
                "fraction": r.fraction,
                "fraction_stderr": r.fraction_stderr,
            }
        summary["resonance"] = {"epsilon": eps_list[0], "D": args.D, "K": args.K, **res_all}
    if "symbols" in modes:
        summary["symbols"] = {
            str(b): symbol_bound_maxima(eps_list[0], b, args.seed) for b in (args.samples, 2 * args.samples)
        }
    if "jacobian" in modes:
        jac, hist = {}, {}
        rng = np.random.default_rng(args.seed)
        for e in eps_list:
            xi, eta, _ = sample_regime(rng, 10_000, e)
            for mu in (1, -1):
                ratio, gap = jacobian_check(xi, eta, mu, e)
                a = np.abs(ratio)
                key = f"eps={e:g},mu={'+' if mu == 1 else '-'}"
                jac[key] = {"c1": float(a.min()), "c2": float(a.max()), "max_fd_gap": float(gap.max())}
                hist[key] = ratio
        plotting.plot_jacobian(hist, out / "jacobian.png")
        summary["jacobian"] = jac
    if "bilinear" in modes:
        results = [angular_bilinear_probe(args.k2, args.k2 - 6, args.k2, l, trials=args.trials, n=args.probe_n, seed=args.seed) for l in range(-3, -9, -1)]
        fit = fit_gain(results)
        plotting.plot_gain(fit, out / "bilinear_gain.png")
        summary["bilinear"] = fit.to_dict()
    if "smoothing" in modes:
        scan = b_smoothing_scan(args.smoothing_eps)
        summary["smoothing"] = scan.to_dict()
    write_json(out / "phases.json", summary)
    print(json.dumps({"written": str(out / "phases.json"), "modes": sorted(modes)}))
    return 0


def cmd_symmetrize(args: argparse.Namespace) -> int:
    from .plotting import plot_consistency
    from .random_fields import random_state
    from .spectral import GridSpec

    eps = (args.eps or [0.01])[0]
    grid = GridSpec(args.n or 128, args.L or 2 * math.pi)
    reports = []
    for k in range(args.states):
        s0 = random_state(grid, np.random.default_rng((args.seed or 0) + k), k_lo=1.0, amp_zeta=0.5, amp_v=0.5)
        reports.append(symmetrize_consistency(s0, eps, N0=args.N0 or 5))
    out = Path(args.out)
    write_json(out / "symmetrize.json", {"epsilon": eps, "n": grid.n, "L": grid.length, "reports": [r.to_dict() for r in reports]})
    plot_consistency(reports[0], out / "symmetrize.png")
    ok = all(r.passed() for r in reports)
    print(json.dumps({"passed": ok}))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bsq2d", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one run with diagnostics CSV/JSON and figures")
    _add_common(p)
    _add_time(p)
    p.add_argument("--eps", type=float, nargs=1, help="epsilon")
    p.add_argument("--t-end", dest="t_end", type=float, help="final time (default: plan horizon)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="lifespan sweep over several epsilon values")
    _add_common(p)
    _add_time(p)
    p.add_argument("--eps", type=float, nargs="+", help="epsilon values (geometric)")
    p.add_argument("--horizon-T", dest="horizon_T", type=float)
    p.add_argument("--horizon-p", dest="horizon_p", type=float)
    p.add_argument("--compare-n", dest="compare_n", type=int, help="finer grid for the resolution check (0 disables)")
    p.add_argument("--workers", type=int)
    p.add_argument("--tail-tol", dest="tail_tol", type=float)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", default="all", choices=["spectral", "lp", "model", "good_unknowns", "phases", "all"])
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("phases", help="resonance sampling, symbol bounds, Jacobian, bilinear and smoothing probes")
    p.add_argument("--mode", default="all", choices=["resonance", "symbols", "jacobian", "bilinear", "smoothing", "all"])
    p.add_argument("--eps", type=float, nargs="+")
    p.add_argument("--D", type=int, default=3)
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k2", type=int, default=7)
    p.add_argument("--trials", type=int, default=2)
    p.add_argument("--probe-n", dest="probe_n", type=int, default=512)
    p.add_argument("--smoothing-eps", dest="smoothing_eps", type=float, nargs="+", default=[0.04, 0.01, 0.0025])
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_phases)

    p = sub.add_parser("symmetrize-check", help="finite-difference check of the symmetrized equation")
    _add_common(p)
    p.add_argument("--eps", type=float, nargs=1)
    p.add_argument("--states", type=int, default=5)
    p.set_defaults(func=cmd_symmetrize)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.func(args))
    except (ValueError, FileNotFoundError) as exc:
        print(f"bsq2d {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
