"""MMSE channel estimation for both layers.

Closed-form estimate/error covariances operate on per-column M x M or
N x N blocks; the full Kronecker operators are block-diagonal in these
and are never materialized.  The operational estimators consume simulated
pilot observations and are used by the Monte-Carlo oracle.
"""

from __future__ import annotations

import numpy as np

_UNITARY_TOL = 1e-8


def dft_pilots(n):
    """Unitary DFT pilot matrix of size n (X X^H = I)."""
    return np.fft.fft(np.eye(n)) / np.sqrt(n)


def _check_unitary(pilots):
    n = pilots.shape[0]
    gram = pilots @ pilots.conj().T
    if not np.allclose(gram, np.eye(n), atol=_UNITARY_TOL):
        raise ValueError("pilot matrix must satisfy X X^H = I")


def access_cov(corr, p_pilot_rx, noise_var):
    """Estimate/error covariance of one access channel column.

    Returns (psi_est, psi_err) with psi_est = R (sigma^2/p I + R)^-1 R and
    psi_err = R - psi_est; noise_var == 0 is the perfect-CSI branch.
    """
    corr = np.asarray(corr)
    if noise_var == 0.0:
        return corr.copy(), np.zeros_like(corr)
    if p_pilot_rx <= 0.0:
        raise ValueError("pilot receive power must be positive")
    m = corr.shape[0]
    psi_est = corr @ np.linalg.solve(
        (noise_var / p_pilot_rx) * np.eye(m) + corr, corr)
    return psi_est, corr - psi_est


def fronthaul_cov(corr, zeta, p_pilot_rx, noise_var):
    """Estimate/error covariance of one fronthaul scatter column.

    Only the scattered part zeta * h_r is random; the LoS mean is known.
    """
    corr = np.asarray(corr)
    scatter_cov = zeta ** 2 * corr
    if zeta == 0.0:
        return np.zeros_like(corr), np.zeros_like(corr)
    if noise_var == 0.0:
        return scatter_cov.copy(), np.zeros_like(corr)
    if p_pilot_rx <= 0.0:
        raise ValueError("pilot receive power must be positive")
    n = corr.shape[0]
    psi_est = scatter_cov @ np.linalg.solve(
        (noise_var / p_pilot_rx) * np.eye(n) + scatter_cov, scatter_cov)
    return psi_est, scatter_cov - psi_est


def mmse_estimate_access(obs, pilots, corr, p_pilot_rx, noise_var):
    """MMSE estimate of one RRU's M x U serving channel from pilots.

    ``obs`` is the M x U received block, ``p_pilot_rx`` the per-UD pilot
    receive powers at this RRU.
    """
    _check_unitary(pilots)
    p_pilot_rx = np.asarray(p_pilot_rx, dtype=float)
    decorrelated = obs @ pilots.conj().T  # column k: sqrt(p_k) h_k + noise
    est = np.empty_like(decorrelated)
    m = corr.shape[0]
    for k, p in enumerate(p_pilot_rx):
        y = decorrelated[:, k] / np.sqrt(p)
        if noise_var == 0.0:
            est[:, k] = y
        else:
            est[:, k] = corr @ np.linalg.solve(
                (noise_var / p) * np.eye(m) + corr, y)
    return est


def mmse_estimate_fronthaul(obs_no_los, pilots, corr, nu, zeta, h_det,
                            p_pilot_rx, noise_var):
    """MMSE estimate of the N x K fronthaul channel.

    ``obs_no_los`` is the received pilot block with the known LoS term
    nu * H_d * P^(1/2) * X already removed; the returned estimate is
    nu * H_d plus the MMSE estimate of the scattered part.
    """
    _check_unitary(pilots)
    p_pilot_rx = np.asarray(p_pilot_rx, dtype=float)
    estimate = (nu * h_det).astype(complex)
    if zeta == 0.0:
        return estimate
    decorrelated = obs_no_los @ pilots.conj().T
    scatter_cov = zeta ** 2 * corr
    n = corr.shape[0]
    for k, p in enumerate(p_pilot_rx):
        y = decorrelated[:, k] / np.sqrt(p)
        if noise_var == 0.0:
            estimate[:, k] += y
        else:
            estimate[:, k] += scatter_cov @ np.linalg.solve(
                (noise_var / p) * np.eye(n) + scatter_cov, y)
    return estimate
