"""Simplex-constrained quadratic minimization: minimize lam' G lam over the
probability simplex.

The solver combines pairwise Frank-Wolfe steps (exact line search, weight
transferred from the worst active atom to the best one, ties broken by lowest
index) with an accelerated projected-gradient polish phase that kicks in when
the pairwise steps stall.  All iterates stay exactly on the simplex, so every
intermediate energy is a valid upper bound for the minimum; no linear system
is ever solved.

``build(jit)`` compiles the kernels with the supplied decorator (numba.njit or
the identity for the numpy path); both paths run the same code.
"""

import numpy as np


def build(jit):
    @jit
    def project_simplex(v):
        """Euclidean projection onto {x >= 0, sum x = 1} (sort-based)."""
        n = v.shape[0]
        u = np.sort(v)[::-1]
        css = np.cumsum(u) - 1.0
        rho = 0
        for i in range(n):
            if u[i] - css[i] / (i + 1.0) > 0.0:
                rho = i
        theta = css[rho] / (rho + 1.0)
        out = v - theta
        for i in range(n):
            if out[i] < 0.0:
                out[i] = 0.0
        return out

    @jit
    def _spectral_bound(G):
        # power iteration; a modest overestimate is fine for step sizes
        n = G.shape[0]
        v = np.full(n, 1.0 / np.sqrt(n))
        lam = 0.0
        for _ in range(60):
            w = G @ v
            lam = np.sqrt(w @ w)
            if lam <= 0.0:
                return 1.0
            v = w / lam
        return 1.2 * lam + 1e-300

    @jit
    def _fista(G, lam0, lip, target, max_inner):
        """Accelerated projected gradient from lam0; returns best feasible point."""
        x = lam0.copy()
        y = lam0.copy()
        t = 1.0
        best = lam0.copy()
        g = G @ best
        best_gap = 2.0 * (best @ g - g.min())
        for j in range(max_inner):
            gy = G @ y
            x_new = project_simplex(y - gy / lip)
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            x = x_new
            t = t_new
            if j % 40 == 39 or j == max_inner - 1:
                g = G @ x
                e = x @ g
                gap = 2.0 * (e - g.min())
                if gap < best_gap:
                    best_gap = gap
                    best = x.copy()
                if gap <= target:
                    break
                # adaptive restart on momentum overshoot
                if (x - y) @ (G @ (x - y)) < 0.0:
                    y = x.copy()
                    t = 1.0
        return best

    @jit
    def solve_simplex_qp(G, tol_rel, tol_abs, max_iter):
        """Minimize lam' G lam over the simplex.

        Returns (lam, energy, gap, iterations, converged) where gap is the
        Frank-Wolfe gap 2*(lam'G lam - min_i (G lam)_i) recomputed from a fresh
        matvec.  Convergence target: gap <= min(tol_rel*max(1, energy), tol_abs).
        """
        n = G.shape[0]
        lam = np.full(n, 1.0 / n)
        g = G @ lam
        energy = lam @ g
        lip = -1.0
        last_gap = np.inf
        stall = 0
        it = 0
        while it < max_iter:
            # best vertex (lowest index wins ties via strict <)
            imin = 0
            gmin = g[0]
            for i in range(1, n):
                if g[i] < gmin:
                    gmin = g[i]
                    imin = i
            # worst active vertex
            imax = -1
            gmax = -np.inf
            for i in range(n):
                if lam[i] > 0.0 and g[i] > gmax:
                    gmax = g[i]
                    imax = i
            gap = 2.0 * (energy - gmin)
            target = min(tol_rel * max(1.0, energy), tol_abs)
            if gap <= target:
                break
            if it % 500 == 499:
                if gap > 0.5 * last_gap:
                    stall += 1
                else:
                    stall = 0
                last_gap = gap
            if stall >= 2:
                if lip < 0.0:
                    lip = _spectral_bound(G)
                lam = _fista(G, lam, lip, target, 4000)
                g = G @ lam
                energy = lam @ g
                stall = 0
                it += 1
                continue
            # pairwise step imax -> imin with exact line search
            dg = gmin - gmax
            dgd = G[imin, imin] + G[imax, imax] - 2.0 * G[imin, imax]
            if dgd <= 0.0:
                step = lam[imax]
            else:
                step = -dg / dgd
                if step > lam[imax]:
                    step = lam[imax]
            if step <= 0.0:
                break
            lam[imin] += step
            lam[imax] -= step
            g += step * (G[:, imin] - G[:, imax])
            energy = lam @ g
            if it % 2000 == 1999:
                g = G @ lam  # shed incremental rounding drift
                energy = lam @ g
            it += 1
        g = G @ lam
        energy = lam @ g
        gap = 2.0 * (energy - g.min())
        converged = gap <= min(tol_rel * max(1.0, energy), tol_abs)
        return lam, energy, gap, it, converged

    return project_simplex, solve_simplex_qp
