"""Channel generation: correlated Rayleigh access links, Rician fronthaul.

Receive-side spatial correlation follows the exponential model rho^|m-n|;
transmit-side correlation is the identity on both layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SQRT_CLAMP_TOL = 1e-12


def exp_correlation(size, rho):
    """Exponential correlation matrix with entry (m, n) = rho^|m-n|."""
    if size < 1:
        raise ValueError("size must be >= 1")
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    idx = np.arange(size)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def matrix_sqrt_psd(mat):
    """Hermitian PSD square root via eigendecomposition.

    Tiny negative eigenvalues from finite precision are clamped to zero.
    """
    vals, vecs = np.linalg.eigh(mat)
    vals = np.where(vals > _SQRT_CLAMP_TOL, vals, 0.0)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def rician_weights(k_rice_db):
    """LoS/scatter amplitude weights (nu, zeta) for a Rician factor in dB."""
    if math.isinf(k_rice_db) and k_rice_db < 0:
        return 0.0, 1.0
    kappa = 10.0 ** (k_rice_db / 10.0)
    return math.sqrt(kappa / (1.0 + kappa)), math.sqrt(1.0 / (1.0 + kappa))


def complex_gaussian(rng, shape):
    """i.i.d. standard circularly-symmetric complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / math.sqrt(2.0)


def los_matrix(n_antennas, topo):
    """Deterministic fronthaul component: ULA steering columns per stream.

    Stream k is steered to the azimuth of its hosting RRU as seen from the
    BBU; unit-modulus entries make Tr{H_d H_d^H} = N*K hold exactly.
    """
    theta = topo.rru_azimuths()[topo.index_map.rru_of]  # (K,)
    n = np.arange(n_antennas)
    return np.exp(1j * np.pi * np.outer(n, np.sin(theta)))


@dataclass(frozen=True)
class AccessChannelSet:
    """Serving and interfering UD-to-RRU channel matrices for one block."""

    serving: tuple       # serving[r]: (M, U_r)
    cross: dict          # (r, r_src) -> (M, U_{r_src}), r != r_src

    def column_into(self, topo, r, k):
        """Channel column of UD k as seen by RRU r."""
        r_k, slot = topo.index_map.pair(k)
        if r_k == r:
            return self.serving[r][:, slot]
        return self.cross[(r, r_k)][:, slot]


@dataclass(frozen=True)
class FronthaulChannel:
    h_det: np.ndarray      # (N, K) deterministic LoS part
    h_scatter: np.ndarray  # (N, K) scattered part, already correlated
    nu: float
    zeta: float

    @property
    def matrix(self):
        return self.nu * self.h_det + self.zeta * self.h_scatter


def sample_access(cfg, topo, rng, sqrt_corr=None):
    """One block-fading draw of all serving and interfering access channels.

    ``sqrt_corr`` is the precomputed M x M receive correlation square root;
    the receiving RRU's array determines the coloring on every link.
    """
    if sqrt_corr is None:
        sqrt_corr = matrix_sqrt_psd(
            exp_correlation(cfg.rru_antennas, cfg.correlation_rho))
    m = cfg.rru_antennas
    serving = tuple(
        sqrt_corr @ complex_gaussian(rng, (m, u)) for u in cfg.uds_per_rru)
    cross = {}
    for r in range(cfg.num_rrus):
        for r_src in range(cfg.num_rrus):
            if r_src == r:
                continue
            g = complex_gaussian(rng, (m, cfg.uds_per_rru[r_src]))
            cross[(r, r_src)] = sqrt_corr @ g
    return AccessChannelSet(serving=serving, cross=cross)


def sample_fronthaul(cfg, topo, rng, sqrt_corr=None, h_det=None):
    """One draw of the N x K Rician fronthaul channel."""
    if sqrt_corr is None:
        sqrt_corr = matrix_sqrt_psd(
            exp_correlation(cfg.bbu_antennas, cfg.correlation_rho))
    if h_det is None:
        h_det = los_matrix(cfg.bbu_antennas, topo)
    nu, zeta = rician_weights(cfg.rician_db)
    g = complex_gaussian(rng, (cfg.bbu_antennas, cfg.num_uds))
    return FronthaulChannel(h_det=h_det, h_scatter=sqrt_corr @ g,
                            nu=nu, zeta=zeta)
