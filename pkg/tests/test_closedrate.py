import numpy as np
import pytest

from cranopt import _kernels, channel, closedrate
from cranopt.sysmodel import PowerSharingVector, SystemConfig, place_topology

SMALL = SystemConfig(num_uds=4, num_rrus=2, uds_per_rru=(2, 2),
                     rru_antennas=8, bbu_antennas=16)


def test_lambda_factors_unit_diag():
    cfg = SystemConfig()
    topo = place_topology(cfg, 0)
    h_det = channel.los_matrix(cfg.bbu_antennas, topo)
    nu, zeta = channel.rician_weights(cfg.rician_db)
    lam_b, lam_a = closedrate.lambda_factors(
        channel.exp_correlation(cfg.rru_antennas, cfg.correlation_rho),
        channel.exp_correlation(cfg.bbu_antennas, cfg.correlation_rho),
        h_det, nu, zeta, cfg.uds_per_rru)
    assert lam_b == pytest.approx(1.0 / cfg.bbu_antennas, rel=1e-14)
    assert np.allclose(lam_a, 1.0 / cfg.rru_antennas, rtol=1e-14)


def test_lambda_factors_degenerate():
    with pytest.raises(ValueError):
        closedrate.lambda_factors(
            np.zeros((4, 4)), np.zeros((8, 8)),
            np.zeros((8, 2)), 0.0, 0.0, (2,))


def test_evaluate_report_consistency():
    topo = place_topology(SMALL, 0)
    model = closedrate.ClosedFormModel(SMALL, topo)
    eta = PowerSharingVector.uniform(SMALL.num_uds)
    rep = model.evaluate(eta)
    assert np.all(rep.per_ud_signal_power > 0)
    assert np.all(rep.per_ud_in_power > 0)
    assert np.allclose(rep.per_ud_sinr,
                       rep.per_ud_signal_power / rep.per_ud_in_power)
    assert np.allclose(rep.per_ud_rate, np.log2(1 + rep.per_ud_sinr))
    assert rep.sum_rate == pytest.approx(rep.per_ud_rate.sum())
    assert rep.method == "closed-form"
    assert model.sum_rate_flat(eta.flatten()) == pytest.approx(rep.sum_rate)


def test_term_accessors_match_evaluate():
    topo = place_topology(SMALL, 1)
    model = closedrate.ClosedFormModel(SMALL, topo)
    eta = PowerSharingVector.uniform(SMALL.num_uds, 0.3)
    rep = model.evaluate(eta)
    assert np.allclose(model.signal_powers(eta), rep.per_ud_signal_power)
    assert np.allclose(model.interference_noise_powers(eta),
                       rep.per_ud_in_power)


def test_variants():
    topo = place_topology(SMALL, 0)
    eta = PowerSharingVector(np.linspace(0.2, 0.8, 4),
                             np.linspace(0.7, 0.3, 4))
    r_model = closedrate.sum_rate(SMALL, topo, eta, variant="model")
    r_alt = closedrate.sum_rate(SMALL, topo, eta, variant="alt")
    assert np.isfinite(r_model.sum_rate) and np.isfinite(r_alt.sum_rate)
    assert r_model.sum_rate > 0 and r_alt.sum_rate > 0
    # The conventions weight interfering streams differently, so they can
    # diverge at skewed splits, but stay within an order of magnitude.
    assert 0.1 < r_alt.sum_rate / r_model.sum_rate < 10.0
    with pytest.raises(ValueError):
        closedrate.ClosedFormModel(SMALL, topo, variant="bogus")


def test_single_ud_no_inter_stream():
    cfg = SystemConfig(num_uds=1, num_rrus=1, uds_per_rru=(1,),
                       rru_antennas=8, bbu_antennas=16)
    topo = place_topology(cfg, 0)
    model = closedrate.ClosedFormModel(cfg, topo)
    eta = PowerSharingVector.uniform(1)
    _, _, in2, in3, _ = model.rate_terms(eta)
    assert in2[0] == 0.0    # no other streams
    assert in3[0] == 0.0    # no other UDs to leak


def test_rate_increases_with_bbu_antennas():
    from dataclasses import replace
    eta = PowerSharingVector.uniform(SMALL.num_uds)
    rates = []
    for n in (16, 32, 64):
        cfg = replace(SMALL, bbu_antennas=n)
        rates.append(closedrate.sum_rate(cfg, place_topology(cfg, 0),
                                         eta).sum_rate)
    assert rates[0] < rates[1] < rates[2]


def _kernel_args(cfg, topo, eta, variant="model"):
    from cranopt import sysmodel
    model = closedrate.ClosedFormModel(cfg, topo, variant=variant)
    budget = sysmodel.build_link_budget(cfg, topo, eta)
    leak_rows = budget.p_rx_access_data[model._rru_of, :]
    leak_sum = (leak_rows * model._other_mask).sum(axis=1)
    return (budget.p_rx_ud_pilot, budget.p_rx_ud_data,
            budget.p_rx_ta_pilot, budget.p_rx_ta_data,
            budget.noise_variance_access, budget.noise_variance_fronthaul,
            model.mu, model.cbeta, model.nu ** 2, float(cfg.bbu_antennas),
            model.w2, model.hh2, leak_sum,
            model.lam_b, float(model.lam_access[0]), variant == "alt")


@pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not active")
def test_numba_kernel_matches_numpy():
    topo = place_topology(SMALL, 0)
    eta = PowerSharingVector(np.linspace(0.2, 0.8, 4),
                             np.linspace(0.6, 0.4, 4))
    for variant in ("model", "alt"):
        args = _kernel_args(SMALL, topo, eta, variant)
        ref = _kernels._assemble_numpy(*args)
        fast = _kernels._assemble_numba(*args)
        for a, b in zip(ref, fast):
            assert np.allclose(a, b, rtol=1e-12, atol=0.0)


def test_kernel_perfect_csi_branches():
    # Zero noise variances exercise the exact-estimation branches.
    topo = place_topology(SMALL, 0)
    eta = PowerSharingVector.uniform(4)
    args = list(_kernel_args(SMALL, topo, eta))
    args[4] = 0.0
    args[5] = 0.0
    ps, in1, in2, in3, in4 = _kernels._assemble_numpy(*args)
    assert np.all(ps > 0)
    assert np.allclose(in1, 0.0)   # no estimation error
    assert np.allclose(in4, 0.0)   # no noise
