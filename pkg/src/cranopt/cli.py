"""Experiment harness: parameter sweeps, headline gain, validation.

Subcommands:
  sweep     evaluate sum-rates over a swept parameter, write CSV
  headline  baseline vs optimized sum-rate at the default configuration
  validate  run the numerical property suites, print a pass/fail table

Exit codes: 0 success, 1 usage error, 2 validation failure.
The CRANOPT_THREADS environment variable caps numba threads (best
effort); BLAS threading is controlled by the usual OMP variables.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time

import numpy as np

from . import channel, closedrate, dea, estimation, mcoracle, sysmodel

SWEEPABLE = ("M", "N", "K", "R", "rho", "k_rice_db")
MODES = ("closed_nonopt", "closed_opt", "mc_nonopt", "mc_opt")
HEADLINE_MIN_GAIN = 0.20


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _apply_threads_env():
    n = os.environ.get("CRANOPT_THREADS")
    if not n:
        return
    try:
        import numba
        numba.set_num_threads(int(n))
    except (ImportError, ValueError):
        pass


def _load_config(path):
    if path is None:
        return sysmodel.SystemConfig()
    if not os.path.exists(path):
        raise SystemExit(print_usage_error(f"config file not found: {path}"))
    return sysmodel.load_config(path)


def print_usage_error(message):
    print(f"usage error: {message}", file=sys.stderr)
    return 1


def apply_sweep_value(cfg, param, value):
    """Return a config copy with one swept parameter changed."""
    from dataclasses import replace
    if param == "M":
        return replace(cfg, rru_antennas=int(value))
    if param == "N":
        return replace(cfg, bbu_antennas=int(value))
    if param == "K":
        return cfg.with_uds(int(value))
    if param == "R":
        return cfg.with_rrus(int(value))
    if param == "rho":
        return replace(cfg, correlation_rho=float(value))
    if param == "k_rice_db":
        return replace(cfg, rician_db=float(value))
    raise ValueError(f"unknown sweep parameter {param!r}")


def _dea_params(quick, seed):
    if quick:
        return dea.DeaParams(population_size=24, max_generations=60, seed=seed)
    return dea.DeaParams(seed=seed)


def optimize_power_sharing(cfg, topo, params):
    """Run the DEA over the closed-form sum-rate; returns (eta, result)."""
    model = closedrate.ClosedFormModel(cfg, topo)
    baseline = sysmodel.PowerSharingVector.uniform(cfg.num_uds)
    result = dea.optimize(model.sum_rate_flat, 2 * cfg.num_uds,
                          params=params, pinned=baseline.flatten())
    return sysmodel.PowerSharingVector.from_flat(result.best_genes), result


def _evaluate_point(cfg, topo, mode, seed, realizations, quick):
    """(sum_rate, stderr_or_None) for one sweep point."""
    baseline = sysmodel.PowerSharingVector.uniform(cfg.num_uds)
    if mode in ("closed_opt", "mc_opt"):
        eta, result = optimize_power_sharing(
            cfg, topo, _dea_params(quick, seed))
    else:
        eta = baseline
    if mode == "closed_nonopt":
        return closedrate.sum_rate(cfg, topo, eta).sum_rate, None
    if mode == "closed_opt":
        return result.best_fitness, None
    emp = mcoracle.OracleSimulator(cfg, topo).ergodic_rate(
        eta, realizations, seed=seed + 10_000)
    return emp.sum_rate, emp.sum_rate_stderr


def run_sweep(cfg, param, values, modes, seeds, realizations, out_path,
              quick=False):
    """Cartesian sweep; rows in deterministic (value, mode, seed) order."""
    if param not in SWEEPABLE:
        raise ValueError(f"unknown sweep parameter {param!r}")
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
    if not values:
        raise ValueError("value list must be nonempty")
    if list(values) != sorted(values):
        raise ValueError("value list must be ascending")

    rows = []
    for value in values:
        cfg_v = apply_sweep_value(cfg, param, value)
        for mode in modes:
            for seed in seeds:
                topo = sysmodel.place_topology(cfg_v, seed)
                t0 = time.perf_counter()
                rate, stderr = _evaluate_point(
                    cfg_v, topo, mode, seed, realizations, quick)
                wall_ms = (time.perf_counter() - t0) * 1e3
                rows.append({
                    "param": param,
                    "value": format(value, ".10g"),
                    "mode": mode,
                    "seed": seed,
                    "sum_rate": format(rate, ".10g"),
                    "stderr": "" if stderr is None else format(stderr, ".10g"),
                    "wall_ms": format(wall_ms, ".1f"),
                })
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["param", "value", "mode", "seed", "sum_rate",
                            "stderr", "wall_ms"])
        writer.writeheader()
        writer.writerows(rows)
    return rows


def reproduce_headline(cfg=None, topo_seed=0, quick=False, out=None):
    """Baseline vs DEA-optimized closed-form sum-rate at the defaults."""
    if out is None:
        out = sys.stdout
    if cfg is None:
        cfg = sysmodel.SystemConfig()
    topo = sysmodel.place_topology(cfg, topo_seed)
    model = closedrate.ClosedFormModel(cfg, topo)
    baseline_eta = sysmodel.PowerSharingVector.uniform(cfg.num_uds)
    baseline = model.evaluate(baseline_eta).sum_rate
    eta_opt, result = optimize_power_sharing(
        cfg, topo, _dea_params(quick, topo_seed))
    optimized = result.best_fitness
    gain = (optimized - baseline) / baseline
    print(f"baseline sum-rate (eta=0.5): {baseline:.4f} bits/s/Hz", file=out)
    print(f"optimized sum-rate:          {optimized:.4f} bits/s/Hz", file=out)
    print(f"gain: {100.0 * gain:.1f}%", file=out)
    return baseline, optimized, gain


SCALED_CONFIG = sysmodel.SystemConfig(
    num_uds=4, num_rrus=2, uds_per_rru=(2, 2),
    rru_antennas=16, bbu_antennas=32)


def run_validation(quick=False, oracle_tol=0.07, cov_tol=1e-10,
                   lemma_tol=0.02, seed=0):
    """Numerical property suites; returns [(name, passed, detail), ...]."""
    checks = []
    rng = np.random.default_rng(seed)

    # Covariance decomposition identity over a pilot-power grid.
    worst = 0.0
    corr_m = channel.exp_correlation(16, 0.3)
    corr_n = channel.exp_correlation(32, 0.3)
    _, zeta = channel.rician_weights(10.0)
    for p in np.logspace(-14, -5, 10):
        est, err = estimation.access_cov(corr_m, p, 3.981e-14)
        worst = max(worst, np.linalg.norm(est + err - corr_m)
                    / np.linalg.norm(corr_m))
        est, err = estimation.fronthaul_cov(corr_n, zeta, p, 3.981e-14)
        truth = zeta ** 2 * corr_n
        worst = max(worst, np.linalg.norm(est + err - truth)
                    / np.linalg.norm(truth))
    checks.append(("covariance identity", bool(worst <= cov_tol),
                   f"worst rel err {worst:.2e} (tol {cov_tol:.0e})"))

    # Normalization factors under unit-diagonal correlation.
    cfg = SCALED_CONFIG
    topo = sysmodel.place_topology(cfg, seed)
    h_det = channel.los_matrix(cfg.bbu_antennas, topo)
    nu, zeta = channel.rician_weights(cfg.rician_db)
    lam_b, lam_a = closedrate.lambda_factors(
        channel.exp_correlation(cfg.rru_antennas, cfg.correlation_rho),
        channel.exp_correlation(cfg.bbu_antennas, cfg.correlation_rho),
        h_det, nu, zeta, cfg.uds_per_rru)
    dev = max(abs(lam_b * cfg.bbu_antennas - 1.0),
              abs(float(lam_a[0]) * cfg.rru_antennas - 1.0))
    checks.append(("normalization factors", bool(dev <= 1e-12),
                   f"deviation {dev:.2e}"))

    # Asymptotic lemmas.
    n_big = 2_000 if quick else 10_000
    trials = 40 if quick else 100
    report = mcoracle.check_lemmas([n_big], trials, rng,
                                   lemma1_sizes=(8, 64))
    dev2 = max(report["lemma2_cross"][n_big], report["lemma2_norm"][n_big],
               report["lemma3"][n_big])
    tol = lemma_tol * (np.sqrt(10_000 / n_big) if quick else 1.0)
    gap_ok = report["lemma1_gap"][64] < report["lemma1_gap"][8]
    checks.append(("lemma deviations", bool(dev2 <= tol and gap_ok),
                   f"max dev {dev2:.4f} (tol {tol:.3f}), "
                   f"gap 8->64: {report['lemma1_gap'][8]:.4f}->"
                   f"{report['lemma1_gap'][64]:.4f}"))

    # Closed form vs Monte-Carlo oracle at the scaled configuration.
    realizations = 120 if quick else 400
    eta = sysmodel.PowerSharingVector.uniform(cfg.num_uds)
    closed = closedrate.sum_rate(cfg, topo, eta).sum_rate
    emp = mcoracle.OracleSimulator(cfg, topo).ergodic_rate(
        eta, realizations, seed=seed + 1)
    rel = abs(closed - emp.sum_rate) / emp.sum_rate
    checks.append(("closed form vs oracle", bool(rel <= oracle_tol),
                   f"closed {closed:.3f}, mc {emp.sum_rate:.3f} "
                   f"(rel {100 * rel:.2f}%, tol {100 * oracle_tol:.0f}%)"))
    return checks


def _cmd_sweep(args):
    cfg = _load_config(args.config)
    if args.param in ("rho", "k_rice_db"):
        values = [float(v) for v in args.values.split(",")]
    else:
        values = [int(v) for v in args.values.split(",")]
    modes = args.modes.split(",")
    seeds = [int(s) for s in args.seeds.split(",")]
    try:
        run_sweep(cfg, args.param, values, modes, seeds,
                  args.realizations, args.out, quick=args.quick)
    except (ValueError, OSError) as exc:
        return print_usage_error(str(exc))
    return 0


def _cmd_headline(args):
    cfg = _load_config(args.config)
    _, _, gain = reproduce_headline(cfg, topo_seed=args.seed,
                                    quick=args.quick)
    return 0 if gain >= HEADLINE_MIN_GAIN else 2


def _cmd_validate(args):
    checks = run_validation(quick=args.quick)
    width = max(len(name) for name, _, _ in checks)
    failed = False
    for name, passed, detail in checks:
        status = "PASS" if passed else "FAIL"
        print(f"{name:<{width}}  {status}  {detail}")
        failed = failed or not passed
    return 2 if failed else 0


def build_parser():
    parser = _Parser(prog="cranopt",
                     description="C-RAN uplink power-sharing experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    p.add_argument("--config", default=None)
    p.add_argument("--param", required=True, choices=SWEEPABLE)
    p.add_argument("--values", required=True,
                   help="comma-separated ascending values")
    p.add_argument("--modes", default="closed_nonopt,closed_opt")
    p.add_argument("--seeds", default="0")
    p.add_argument("--realizations", type=int, default=400)
    p.add_argument("--out", required=True)
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("headline", help="baseline vs optimized sum-rate")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=_cmd_headline)

    p = sub.add_parser("validate", help="numerical property suites")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None):
    _apply_threads_env()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code else 0
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1


if __name__ == "__main__":
    sys.exit(main())
