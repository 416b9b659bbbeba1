"""Pure-Python implementations of the scalar kernels.

These are the reference versions; ``_kernels`` (Cython) mirrors them and is
preferred when it has been compiled.
"""
import math

import numpy as np
from scipy import special


def _origin_slope(s):
    # phi_s'(0+): -inf, -1 or 0 depending on s
    return -math.inf if s < 0.5 else (-1.0 if s == 0.5 else 0.0)


def profile(s, tau):
    """Extension profile ``phi_s(tau)`` and its derivative, 0 < s < 1.

    phi_s(tau) = 2^{1-s}/Gamma(s) tau^s K_s(tau), normalized to phi_s(0) = 1;
    phi_s'(tau) = -2^{1-s}/Gamma(s) tau^s K_{1-s}(tau).
    """
    tau = np.asarray(tau, dtype=float)
    phi = np.ones_like(tau)
    dphi = np.full_like(tau, _origin_slope(s))
    pos = tau > 0.0
    t = tau[pos]
    # exponentially scaled K keeps large arguments from underflowing early
    w = 2.0 ** (1.0 - s) / math.gamma(s) * np.exp(s * np.log(t) - t)
    phi[pos] = w * special.kve(s, t)
    dphi[pos] = -w * special.kve(1.0 - s, t)
    return phi, dphi


def sign_changes(values, threshold):
    """Number of strict sign alternations among entries with |v| > threshold."""
    count = 0
    last = 0
    for v in values:
        if v > threshold:
            sgn = 1
        elif v < -threshold:
            sgn = -1
        else:
            continue
        if last and sgn != last:
            count += 1
        last = sgn
    return count
