"""Hot kernel for the closed-form SINR assembly.

The differential-evolution objective calls this once per candidate, so it
dominates optimizer runtime.  Two interchangeable implementations exist:
a numba ``@njit`` version and a pure-numpy fallback.  Selection: numpy is
used when the environment variable ``CRANOPT_NO_NUMBA`` is set (to any
non-empty value) or when numba is unavailable.

All inputs are plain float64 arrays in the eigenbasis of the receive
correlation matrices:

- ``mu``: access correlation eigenvalues (M,)
- ``cbeta``: fronthaul scatter-covariance eigenvalues zeta^2 * beta (N,)
- ``w2``: squared projections of each LoS column onto that basis (K, N)
- ``hh2``: squared LoS column inner products |h_i^H h_j|^2 (K, K)
- ``leak_sum``: per stream k, total cross-RRU data receive power at k's RRU
- ``pa, pd / qa, qd``: pilot and data receive powers per UD / per stream

Returns per-UD signal power and the four interference-plus-noise terms.
"""

from __future__ import annotations

import os

import numpy as np

HAS_NUMBA = False
if not os.environ.get("CRANOPT_NO_NUMBA"):
    try:
        from numba import njit
        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - depends on environment
        pass


def _assemble_numpy(pa, pd, qa, qd, sa, sf, mu, cbeta, nu2, n_bbu,
                    w2, hh2, leak_sum, lam_b, lam_acc, alt_coeffs):
    k_total = pa.shape[0]

    # Access layer, per UD: estimate / error covariance eigenvalues.
    if sa == 0.0:
        ahat = np.broadcast_to(mu, (k_total, mu.size)).copy()
    else:
        ahat = mu ** 2 / (sa / pa[:, None] + mu)
    t_hat = ahat.sum(axis=1)                       # Tr psi_est
    s_cross = (ahat * (mu - ahat)).sum(axis=1)     # Tr psi_est psi_err
    ups1 = t_hat ** 2 + s_cross
    t_hat_r = (ahat * mu).sum(axis=1)              # Tr psi_est R

    # Fronthaul layer, per stream.
    if sf == 0.0:
        ehat = np.broadcast_to(cbeta, (k_total, cbeta.size)).copy()
    else:
        ehat = cbeta ** 2 / (sf / qa[:, None] + cbeta)
    eerr = cbeta - ehat
    tr_e = nu2 * n_bbu + ehat.sum(axis=1)

    # Pair traces Tr{(nu^2 B_i + psi_est_i)(nu^2 B_j + psi_true_j)},
    # row index i is the detected stream, column j the interfering one.
    pair = (nu2 * nu2 * hh2 + nu2 * (ehat @ w2.T)
            + nu2 * (w2 @ cbeta)[:, None] + (ehat @ cbeta)[:, None])
    pair_err = nu2 * (eerr * w2).sum(axis=1) + (eerr * ehat).sum(axis=1)
    pair_diag = np.diagonal(pair).copy()

    lam2 = lam_b * lam_acc
    ps = lam2 * qd * ups1 * tr_e ** 2
    in1 = lam2 * qd * ups1 * pair_err

    if alt_coeffs:
        w_stream = lam2 * qd * pd * ups1
        in2 = (pair @ w_stream - pair_diag * w_stream) / pd
        w_leak = lam2 * qd * t_hat_r * leak_sum
    else:
        w_stream = lam2 * qd * ups1
        in2 = pair @ w_stream - pair_diag * w_stream
        w_leak = lam2 * qd / pd * t_hat_r * leak_sum
    in3 = pair @ w_leak

    in4 = (lam2 * qd / pd * sa * t_hat * pair_diag) + lam_b * sf * tr_e
    return ps, in1, in2, in3, in4


if HAS_NUMBA:

    @njit(cache=True)
    def _assemble_numba(pa, pd, qa, qd, sa, sf, mu, cbeta, nu2, n_bbu,
                        w2, hh2, leak_sum, lam_b, lam_acc, alt_coeffs):
        k_total = pa.shape[0]
        m = mu.size
        n = cbeta.size

        t_hat = np.empty(k_total)
        s_cross = np.empty(k_total)
        t_hat_r = np.empty(k_total)
        ahat = np.empty((k_total, m))
        for k in range(k_total):
            acc_t = 0.0
            acc_s = 0.0
            acc_r = 0.0
            for i in range(m):
                if sa == 0.0:
                    a = mu[i]
                else:
                    a = mu[i] * mu[i] / (sa / pa[k] + mu[i])
                ahat[k, i] = a
                acc_t += a
                acc_s += a * (mu[i] - a)
                acc_r += a * mu[i]
            t_hat[k] = acc_t
            s_cross[k] = acc_s
            t_hat_r[k] = acc_r
        ups1 = t_hat ** 2 + s_cross

        ehat = np.empty((k_total, n))
        tr_e = np.empty(k_total)
        pair_err = np.empty(k_total)
        for k in range(k_total):
            acc_e = 0.0
            acc_pe = 0.0
            for i in range(n):
                if sf == 0.0:
                    e = cbeta[i]
                else:
                    e = cbeta[i] * cbeta[i] / (sf / qa[k] + cbeta[i])
                ehat[k, i] = e
                acc_e += e
                err = cbeta[i] - e
                acc_pe += err * (nu2 * w2[k, i] + e)
            tr_e[k] = nu2 * n_bbu + acc_e
            pair_err[k] = acc_pe

        pair = np.empty((k_total, k_total))
        for i in range(k_total):
            for j in range(k_total):
                acc = nu2 * nu2 * hh2[i, j]
                for t in range(n):
                    acc += (nu2 * ehat[i, t] * w2[j, t]
                            + nu2 * cbeta[t] * w2[i, t]
                            + ehat[i, t] * cbeta[t])
                pair[i, j] = acc

        lam2 = lam_b * lam_acc
        ps = np.empty(k_total)
        in1 = np.empty(k_total)
        in2 = np.zeros(k_total)
        in3 = np.zeros(k_total)
        in4 = np.empty(k_total)
        for i in range(k_total):
            ps[i] = lam2 * qd[i] * ups1[i] * tr_e[i] ** 2
            in1[i] = lam2 * qd[i] * ups1[i] * pair_err[i]
            for j in range(k_total):
                if alt_coeffs:
                    if j != i:
                        in2[i] += pair[i, j] * lam2 * qd[j] * pd[j] \
                            * ups1[j] / pd[i]
                    in3[i] += pair[i, j] * lam2 * qd[j] * t_hat_r[j] \
                        * leak_sum[j]
                else:
                    if j != i:
                        in2[i] += pair[i, j] * lam2 * qd[j] * ups1[j]
                    in3[i] += pair[i, j] * lam2 * qd[j] / pd[j] \
                        * t_hat_r[j] * leak_sum[j]
            in4[i] = (lam2 * qd[i] / pd[i] * sa * t_hat[i] * pair[i, i]
                      + lam_b * sf * tr_e[i])
        return ps, in1, in2, in3, in4

    assemble_rate_terms = _assemble_numba
else:
    assemble_rate_terms = _assemble_numpy
