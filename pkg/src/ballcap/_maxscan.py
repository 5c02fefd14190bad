"""Sampling scans for the approach-region maximal function.

A candidate point near the boundary point zeta has the form
``z = s*(cos(t)*zeta + sin(t)*u)`` with ``u`` a unit tangent direction, so
``<z, zeta> = s*cos(t) + s*sin(t)*<u, zeta>`` and ``||z|| = s``.  Candidates are
shared across apertures and filtered by the exact region predicate, so the
reported suprema are honest lower bounds and monotone in the aperture.

The scanned function is a real kernel combination f(z) = sum_k c_k * kappa(<z, w_k>)
with kappa selected by an integer family code:

0: (1-|s|^2)/|1-s|^2      1: Re 1/(1-s)       2: Re (1-s)^(-par)
3: 1 - ln|1-s|            4: 1/|1-s|
"""

import numpy as np

FAMILY_POISSON = 0
FAMILY_RE_GEOMETRIC = 1
FAMILY_RE_POWER = 2
FAMILY_RE_LOG = 3
FAMILY_ABS_GEOMETRIC = 4


def theta_grid(svals, alpha_max, n_theta):
    """Per-radius angle grids covering the widest admissible tangential cone."""
    grids = np.zeros((svals.shape[0], n_theta))
    for i, s in enumerate(svals):
        cap = np.sqrt(alpha_max * max(0.0, 1.0 - s * s) / max(s, 0.25))
        cap = min(np.pi / 2, cap)
        grids[i] = np.linspace(0.0, cap, n_theta)
    return grids


def _kernel_values_np(s, family, par):
    w = 1.0 - s
    if family == FAMILY_POISSON:
        return (1.0 - np.abs(s) ** 2) / np.abs(w) ** 2
    if family == FAMILY_RE_GEOMETRIC:
        return np.real(1.0 / w)
    if family == FAMILY_RE_POWER:
        return np.abs(w) ** (-par) * np.cos(par * np.arctan2(w.imag, w.real))
    if family == FAMILY_RE_LOG:
        return 1.0 - np.log(np.abs(w))
    if family == FAMILY_ABS_GEOMETRIC:
        return 1.0 / np.abs(w)
    raise ValueError("unknown kernel family code")


def scan_numpy(zw, uw, uz, coefs, family, par, alphas, svals, thetas):
    """Vectorized backend-fallback implementation of the maximal scan."""
    n_b, n_k = zw.shape
    n_t = uw.shape[1]
    n_a = alphas.shape[0]
    sups = np.zeros((n_b, n_a))
    cos_t = np.cos(thetas)  # (S, TH)
    sin_t = np.sin(thetas)
    a = svals[:, None] * cos_t  # (S, TH)
    b = svals[:, None] * sin_t
    one_minus = 1.0 - svals[:, None] ** 2  # (S, 1)
    for ib in range(n_b):
        # region radii per direction: <z,zeta> = a + b*uz
        sz = a[None, :, :] + b[None, :, :] * uz[ib][:, None, None]  # (T,S,TH)
        dist = np.abs(1.0 - sz)
        sw = (
            a[None, :, :, None] * zw[ib][None, None, None, :]
            + b[None, :, :, None] * uw[ib][:, None, None, :]
        )  # (T,S,TH,K)
        fvals = np.abs(_kernel_values_np(sw, family, par) @ coefs)  # (T,S,TH)
        for ia in range(n_a):
            mask = dist < 0.5 * alphas[ia] * one_minus[None, :, :]
            if mask.any():
                sups[ib, ia] = fvals[mask].max()
    return sups


def build_numba(jit):
    @jit
    def _kappa(s, family, par):
        w = 1.0 - s
        aw = abs(w)
        if family == 0:
            return (1.0 - abs(s) ** 2) / (aw * aw)
        if family == 1:
            return (w.real) / (aw * aw)
        if family == 2:
            return aw ** (-par) * np.cos(par * np.arctan2(w.imag, w.real))
        if family == 3:
            return 1.0 - np.log(aw)
        return 1.0 / aw

    @jit
    def scan(zw, uw, uz, coefs, family, par, alphas, svals, thetas):
        n_b, n_k = zw.shape
        n_t = uw.shape[1]
        n_s = svals.shape[0]
        n_th = thetas.shape[1]
        n_a = alphas.shape[0]
        sups = np.zeros((n_b, n_a))
        for ib in range(n_b):
            for it in range(n_t):
                u = uz[ib, it]
                for isx in range(n_s):
                    s = svals[isx]
                    lim = 1.0 - s * s
                    for ith in range(n_th):
                        th = thetas[isx, ith]
                        a = s * np.cos(th)
                        b = s * np.sin(th)
                        sz = a + b * u
                        dist = abs(1.0 - sz)
                        inside = False
                        for ia in range(n_a):
                            if dist < 0.5 * alphas[ia] * lim:
                                inside = True
                        if not inside:
                            continue
                        fv = 0.0
                        for k in range(n_k):
                            sw = a * zw[ib, k] + b * uw[ib, it, k]
                            fv += coefs[k] * _kappa(sw, family, par)
                        fv = abs(fv)
                        for ia in range(n_a):
                            if dist < 0.5 * alphas[ia] * lim and fv > sups[ib, ia]:
                                sups[ib, ia] = fv
        return sups

    return scan
