"""Compiled numerical cores.

Everything that sits inside the per-evaluation hot path lives here as an
njit kernel so a 100k-evaluation swarm run stays in compiled code.  The
kernels accumulate strictly in index order; the pure-numpy step functions
in :mod:`fewview.optimizers` reproduce the same arithmetic, which is pinned
by an engine-equivalence test.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def csr_matvec(data, indices, indptr, x, out):
    """out = A @ x for CSR pieces, rows accumulated in index order."""
    for r in range(out.shape[0]):
        s = 0.0
        for k in range(indptr[r], indptr[r + 1]):
            s += data[k] * x[indices[k]]
        out[r] = s


@njit(cache=True)
def residual_sumsq(data, indices, indptr, b, y):
    """sum_r (b_r - (A y)_r)^2 without materialising A y."""
    acc = 0.0
    for r in range(b.shape[0]):
        s = 0.0
        for k in range(indptr[r], indptr[r + 1]):
            s += data[k] * y[indices[k]]
        d = b[r] - s
        acc += d * d
    return acc


@njit(cache=True)
def tv_value(y, width, height):
    """Isotropic total variation with forward differences, zero past edges."""
    acc = 0.0
    for i in range(height):
        row = i * width
        for j in range(width):
            p = y[row + j]
            dx = y[row + j + 1] - p if j + 1 < width else 0.0
            dy = y[row + width + j] - p if i + 1 < height else 0.0
            acc += np.sqrt(dx * dx + dy * dy)
    return acc


@njit(cache=True)
def objective_value(data, indices, indptr, b, y, mu, width, height):
    """Squared projection residual plus mu times total variation."""
    acc = residual_sumsq(data, indices, indptr, b, y)
    if mu != 0.0:
        acc += mu * tv_value(y, width, height)
    return acc


@njit(cache=True)
def kaczmarz_sweeps(data, indices, indptr, b, row_norms, x, lam, sweeps):
    """Cyclic row-action sweeps x += lam (b_r - <a_r, x>) / ||a_r||^2 a_r."""
    m = b.shape[0]
    for _ in range(sweeps):
        for r in range(m):
            nrm = row_norms[r]
            if nrm == 0.0:
                continue
            s = 0.0
            for k in range(indptr[r], indptr[r + 1]):
                s += data[k] * x[indices[k]]
            coef = lam * (b[r] - s) / nrm
            for k in range(indptr[r], indptr[r + 1]):
                x[indices[k]] += coef * data[k]


@njit(cache=True)
def dfo_generations(positions, fitnesses, best, n_gens, delta, phi, lo, hi,
                    data, indices, indptr, b, mu, width, height, rng):
    """Run n_gens swarm generations in place; returns the new best index.

    Per generation every particle except the current best moves.  Draw
    order per moving particle, matching optimizers.dfo_step exactly:
    jump mask (n doubles), attraction multipliers (n doubles), then one
    uniform per jumped component in ascending dimension order.
    """
    n_pop, n_dim = positions.shape
    old = np.empty_like(positions)
    for _ in range(n_gens):
        for i in range(n_pop):
            for d in range(n_dim):
                old[i, d] = positions[i, d]
        for i in range(n_pop):
            if i == best:
                continue
            left = (i - 1) % n_pop
            right = (i + 1) % n_pop
            nb = left if fitnesses[left] <= fitnesses[right] else right
            jump = rng.random(n_dim)
            u1 = rng.random(n_dim)
            for d in range(n_dim):
                if jump[d] < delta:
                    v = rng.uniform(lo, hi)
                else:
                    v = old[nb, d] + phi * u1[d] * (old[best, d] - old[i, d])
                    if v < lo:
                        v = lo
                    elif v > hi:
                        v = hi
                positions[i, d] = v
        for i in range(n_pop):
            if i == best:
                continue
            fitnesses[i] = objective_value(
                data, indices, indptr, b, positions[i], mu, width, height)
        best = 0
        for i in range(1, n_pop):
            if fitnesses[i] < fitnesses[best]:
                best = i
    return best
