"""Benchmark the closed-form assembly kernel: numba vs pure numpy.

The kernel is the inner loop of the optimizer (one call per candidate
per generation), so its latency bounds how many DEA evaluations fit in
a time budget.  Run:

    python benchmarks/bench_kernels.py [--repeats 2000]

Set CRANOPT_NO_NUMBA=1 to confirm the fallback selection path.
"""

import argparse
import time

import numpy as np

from cranopt import _kernels, closedrate, sysmodel


def kernel_inputs(cfg, topo):
    model = closedrate.ClosedFormModel(cfg, topo)
    eta = sysmodel.PowerSharingVector.uniform(cfg.num_uds)
    budget = sysmodel.build_link_budget(cfg, topo, eta)
    leak_rows = budget.p_rx_access_data[model._rru_of, :]
    leak_sum = (leak_rows * model._other_mask).sum(axis=1)
    return (budget.p_rx_ud_pilot, budget.p_rx_ud_data,
            budget.p_rx_ta_pilot, budget.p_rx_ta_data,
            budget.noise_variance_access, budget.noise_variance_fronthaul,
            model.mu, model.cbeta, model.nu ** 2, float(cfg.bbu_antennas),
            model.w2, model.hh2, leak_sum,
            model.lam_b, float(model.lam_access[0]), False)


def bench(fn, args, repeats):
    fn(*args)  # warm up (JIT compile for the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats * 1e6  # us per call


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()

    cfg = sysmodel.SystemConfig()
    topo = sysmodel.place_topology(cfg, 0)
    inputs = kernel_inputs(cfg, topo)

    t_numpy = bench(_kernels._assemble_numpy, inputs, args.repeats)
    print(f"numpy fallback : {t_numpy:8.2f} us/call")
    if _kernels.HAS_NUMBA:
        t_numba = bench(_kernels._assemble_numba, inputs, args.repeats)
        print(f"numba @njit    : {t_numba:8.2f} us/call")
        print(f"speedup        : {t_numpy / t_numba:8.2f}x")
        ref = _kernels._assemble_numpy(*inputs)
        fast = _kernels._assemble_numba(*inputs)
        worst = max(float(np.max(np.abs(a - b) / np.abs(a)))
                    for a, b in zip(ref, fast))
        print(f"worst rel diff : {worst:.2e}")
    else:
        print("numba inactive (CRANOPT_NO_NUMBA set or numba missing)")
    active = "numba" if _kernels.assemble_rate_terms is getattr(
        _kernels, "_assemble_numba", None) else "numpy"
    print(f"active kernel  : {active}")


if __name__ == "__main__":
    main()
