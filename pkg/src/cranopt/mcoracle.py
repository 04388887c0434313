"""Monte-Carlo ground truth for the two-layer uplink.

Simulates the full pilot + data chain per realization (channel draws,
MMSE estimation from noisy pilots, matched-filter combining at both
layers, amplify-and-forward) and measures term-by-term detector output
powers.  Each signal class is propagated with independent unit-power
test symbols, so the per-realization power decomposition is exact.

This module never reads closed-form quantities from the rate engine;
the combiner normalization factors are recomputed here from covariance
traces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel, estimation, sysmodel


@dataclass(frozen=True)
class ChannelRealization:
    access: channel.AccessChannelSet
    fronthaul: channel.FronthaulChannel
    est_access: tuple          # per RRU, (M, U_r)
    est_fronthaul: np.ndarray  # (N, K)
    amplification: np.ndarray  # (K,)


@dataclass(frozen=True)
class TermPowers:
    """Instantaneous detector-output powers per UD, one realization."""

    desired: np.ndarray
    inter_stream: np.ndarray
    cross_residual: np.ndarray
    noise: np.ndarray

    @property
    def interference_noise(self):
        return self.inter_stream + self.cross_residual + self.noise

    @property
    def total(self):
        return self.desired + self.interference_noise

    @property
    def sinr(self):
        return self.desired / self.interference_noise


@dataclass(frozen=True)
class EmpiricalRate:
    """Ergodic rates: mean-of-logs and the ratio-of-means variant."""

    per_ud_rate: np.ndarray
    sum_rate: float
    sum_rate_stderr: float
    per_ud_rate_ratio: np.ndarray
    sum_rate_ratio: float
    mean_signal_power: np.ndarray
    mean_in_power: np.ndarray
    n_realizations: int


class OracleSimulator:
    """Caches correlation square roots and pilots for one (cfg, topo)."""

    def __init__(self, cfg, topo):
        self.cfg = cfg
        self.topo = topo
        self.corr_m = channel.exp_correlation(cfg.rru_antennas,
                                              cfg.correlation_rho)
        self.corr_n = channel.exp_correlation(cfg.bbu_antennas,
                                              cfg.correlation_rho)
        self.sqrt_m = channel.matrix_sqrt_psd(self.corr_m)
        self.sqrt_n = channel.matrix_sqrt_psd(self.corr_n)
        self.h_det = channel.los_matrix(cfg.bbu_antennas, topo)
        self.nu, self.zeta = channel.rician_weights(cfg.rician_db)
        self.pilots_access = tuple(estimation.dft_pilots(u)
                                   for u in cfg.uds_per_rru)
        self.pilots_fronthaul = estimation.dft_pilots(cfg.num_uds)
        # Normalization constants from true-channel covariance traces.
        k = cfg.num_uds
        n = cfg.bbu_antennas
        self.lam_access = 1.0 / np.trace(self.corr_m).real
        self.lam_b = k / (self.nu ** 2 * n * k
                          + self.zeta ** 2 * k * np.trace(self.corr_n).real)

    def simulate_once(self, eta, rng, budget=None):
        """One realization: channels, pilot phases, detection, term powers."""
        cfg, topo = self.cfg, self.topo
        if budget is None:
            budget = sysmodel.build_link_budget(cfg, topo, eta)
        imap = topo.index_map
        k_total = cfg.num_uds
        sa = budget.noise_variance_access
        sf = budget.noise_variance_fronthaul

        acc = channel.sample_access(cfg, topo, rng, sqrt_corr=self.sqrt_m)
        fh = channel.sample_fronthaul(cfg, topo, rng, sqrt_corr=self.sqrt_n,
                                      h_det=self.h_det)

        # Pilot phase, access layer: adjacent-RRU pilot contamination is
        # assumed eliminated, so only serving UDs and noise are observed.
        est_access = []
        for r in range(cfg.num_rrus):
            u_r = cfg.uds_per_rru[r]
            x = self.pilots_access[r]
            p = budget.p_rx_ud_pilot[imap.block(r)]
            obs = (acc.serving[r] * np.sqrt(p)[None, :]) @ x \
                + np.sqrt(sa) * channel.complex_gaussian(
                    rng, (cfg.rru_antennas, u_r))
            est_access.append(estimation.mmse_estimate_access(
                obs, x, self.corr_m, p, sa))
        est_access = tuple(est_access)

        # Pilot phase, fronthaul layer.
        qa = budget.p_rx_ta_pilot
        xb = self.pilots_fronthaul
        h_true = fh.matrix
        obs_b = (h_true * np.sqrt(qa)[None, :]) @ xb \
            + np.sqrt(sf) * channel.complex_gaussian(
                rng, (cfg.bbu_antennas, k_total))
        obs_no_los = obs_b - (self.nu * self.h_det * np.sqrt(qa)[None, :]) @ xb
        est_b = estimation.mmse_estimate_fronthaul(
            obs_no_los, xb, self.corr_n, self.nu, self.zeta, self.h_det,
            qa, sf)

        amp = budget.amplification

        # Access-layer linear map: Z[i, j] is the combined, normalized
        # amplitude of UD j's data on forwarding stream i.
        z = np.zeros((k_total, k_total), dtype=complex)
        for r in range(cfg.num_rrus):
            cols = np.stack([acc.column_into(topo, r, j)
                             for j in range(k_total)], axis=1)
            scaled = cols * np.sqrt(budget.p_rx_access_data[r])[None, :]
            z[imap.block(r), :] = np.sqrt(self.lam_access) \
                * est_access[r].conj().T @ scaled

        # Fronthaul map: T[k*, i] carries stream i into detector output k*.
        t = np.sqrt(self.lam_b) * (est_b.conj().T @ h_true) \
            * np.sqrt(budget.p_rx_ta_data * amp)[None, :]

        c_full = t @ z
        c_diag = t * np.diagonal(z)[None, :]
        diag_power = np.abs(np.diagonal(c_diag)) ** 2
        inter = (np.abs(c_diag) ** 2).sum(axis=1) - diag_power
        resid = (np.abs(c_full - c_diag) ** 2).sum(axis=1)

        noise = self.lam_b * sf * (np.abs(est_b) ** 2).sum(axis=0)
        for r in range(cfg.num_rrus):
            fwd = t[:, imap.block(r)] @ est_access[r].conj().T  # (K, M)
            noise = noise + sa * self.lam_access \
                * (np.abs(fwd) ** 2).sum(axis=1)

        realization = ChannelRealization(
            access=acc, fronthaul=fh, est_access=est_access,
            est_fronthaul=est_b, amplification=amp)
        terms = TermPowers(desired=diag_power, inter_stream=inter,
                           cross_residual=resid, noise=noise)
        return realization, terms

    def ergodic_rate(self, eta, n_realizations, seed):
        """Average instantaneous rates over independent realizations."""
        if n_realizations < 2:
            raise ValueError("need at least 2 realizations")
        rng = np.random.default_rng(seed)
        budget = sysmodel.build_link_budget(self.cfg, self.topo, eta)
        k_total = self.cfg.num_uds
        rate_acc = np.zeros(k_total)
        sig_acc = np.zeros(k_total)
        in_acc = np.zeros(k_total)
        sum_rates = np.empty(n_realizations)
        for i in range(n_realizations):
            _, terms = self.simulate_once(eta, rng, budget=budget)
            inst = np.log2(1.0 + terms.sinr)
            rate_acc += inst
            sig_acc += terms.desired
            in_acc += terms.interference_noise
            sum_rates[i] = inst.sum()
        per_ud = rate_acc / n_realizations
        mean_sig = sig_acc / n_realizations
        mean_in = in_acc / n_realizations
        per_ud_ratio = np.log2(1.0 + mean_sig / mean_in)
        stderr = sum_rates.std(ddof=1) / np.sqrt(n_realizations)
        return EmpiricalRate(
            per_ud_rate=per_ud,
            sum_rate=float(per_ud.sum()),
            sum_rate_stderr=float(stderr),
            per_ud_rate_ratio=per_ud_ratio,
            sum_rate_ratio=float(per_ud_ratio.sum()),
            mean_signal_power=mean_sig,
            mean_in_power=mean_in,
            n_realizations=n_realizations,
        )


def simulate_once(cfg, topo, eta, rng):
    return OracleSimulator(cfg, topo).simulate_once(eta, rng)


def ergodic_rate(cfg, topo, eta, n_realizations, seed):
    return OracleSimulator(cfg, topo).ergodic_rate(eta, n_realizations, seed)


# --- asymptotic-lemma validation -------------------------------------------

def _lemma1_gap(size, trials, rng):
    """Jensen-style gap between mean-of-logs and log-of-mean-ratio.

    X and Y are sums of ``size`` squared complex-Gaussian magnitudes, so
    E{X} = E{Y} = size.
    """
    x = (np.abs(channel.complex_gaussian(rng, (trials, size))) ** 2).sum(axis=1)
    y = (np.abs(channel.complex_gaussian(rng, (trials, size))) ** 2).sum(axis=1)
    mean_log = np.log2(1.0 + x / y).mean()
    return abs(mean_log - np.log2(1.0 + 1.0))


def check_lemmas(n_grid, trials, rng, c=1.0, lemma1_sizes=(8, 64),
                 lemma1_trials=None):
    """Numerically exercise the three asymptotic approximations.

    Returns a dict with per-size deviation statistics:
    - ``lemma2_cross``: mean |x^H y| / N for independent CN(0, c I) pairs
    - ``lemma2_norm``: mean |x^H x / N - c|
    - ``lemma3``: mean |(x^H A x)^2 - (Tr A / N)^2| with x ~ CN(0, I/N)
    - ``lemma1_gap``: rate-approximation gap per size in ``lemma1_sizes``
    """
    n_grid = list(n_grid)
    if n_grid != sorted(n_grid):
        raise ValueError("n_grid must be ascending")
    report = {"lemma2_cross": {}, "lemma2_norm": {}, "lemma3": {},
              "lemma1_gap": {}}
    for n in n_grid:
        cross = np.empty(trials)
        norm = np.empty(trials)
        quad = np.empty(trials)
        # Diagonal test matrix with bounded spectral norm.
        a_diag = 1.0 + 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
        tr_a = a_diag.sum() / n
        for t in range(trials):
            x = np.sqrt(c) * channel.complex_gaussian(rng, n)
            y = np.sqrt(c) * channel.complex_gaussian(rng, n)
            cross[t] = abs(x.conj() @ y) / n
            norm[t] = abs((x.conj() @ x).real / n - c)
            xs = channel.complex_gaussian(rng, n) / np.sqrt(n)
            quad[t] = abs(((xs.conj() * a_diag) @ xs).real ** 2 - tr_a ** 2)
        report["lemma2_cross"][n] = cross.mean()
        report["lemma2_norm"][n] = norm.mean()
        report["lemma3"][n] = quad.mean()
    if lemma1_trials is None:
        lemma1_trials = trials
    for size in lemma1_sizes:
        report["lemma1_gap"][size] = _lemma1_gap(size, lemma1_trials, rng)
    return report
