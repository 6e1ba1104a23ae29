"""Fitness functions and image-quality metrics.

The reconstruction error is the squared 2-norm of the projection residual,
the reproduction error the 1-norm distance to the ground truth, and the
regularised objective adds mu times the isotropic total variation.
"""

import numpy as np

from . import _kernels, projector

LOWER = 0.0
UPPER = 255.0


class Problem:
    """One benchmark instance: system matrix, sinogram and ground truth.

    b is produced by forward projection of the ground truth unless an
    explicit sinogram is given.  mu weights the total-variation term in
    regularised_error.
    """

    def __init__(self, A, ground_truth, mu=0.0, b=None, problem_id=""):
        self.A = A
        self.ground_truth = np.asarray(ground_truth, dtype=float)
        if self.ground_truth.ndim != 2:
            raise ValueError("ground truth must be a 2-D image")
        self.height, self.width = self.ground_truth.shape
        if A.shape[1] != self.width * self.height:
            raise ValueError("matrix has %d columns for %d pixels"
                             % (A.shape[1], self.width * self.height))
        if mu < 0:
            raise ValueError("mu must be >= 0")
        self.mu = float(mu)
        if b is None:
            b = projector.forward_project(A, self.ground_truth.ravel())
        self.b = np.asarray(b, dtype=float)
        if self.b.shape[0] != A.shape[0]:
            raise ValueError("sinogram has length %d, expected %d"
                             % (self.b.shape[0], A.shape[0]))
        self.problem_id = problem_id or "problem"
        self.lower = LOWER
        self.upper = UPPER

    @property
    def n(self):
        return self.A.shape[1]

    def truth_vector(self):
        return self.ground_truth.ravel()

    def __repr__(self):
        return "Problem(%r, m=%d, n=%d, mu=%g)" % (
            self.problem_id, self.A.shape[0], self.n, self.mu)


def _check_length(y, n):
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != n:
        raise ValueError("vector has length %d, expected %d" % (y.shape[0], n))
    return y


def reconstruction_error(problem, y):
    """||b - A y||_2^2, the data-fidelity term."""
    y = _check_length(y, problem.n)
    A = problem.A
    return _kernels.residual_sumsq(A.data, A.indices, A.indptr, problem.b, y)


def reproduction_error(y, truth):
    """||y - truth||_1; accepts images or flat vectors of equal length."""
    y = np.asarray(y, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if y.shape[0] != t.shape[0]:
        raise ValueError("length mismatch: %d vs %d" % (y.shape[0], t.shape[0]))
    return float(np.abs(y - t).sum())


def total_variation(y, width=None, height=None):
    """Sum over pixels of sqrt(dx^2 + dy^2) with forward differences.

    Differences past the last row/column contribute zero, so constant
    images have zero total variation.  y may be a 2-D image or a flat
    vector with explicit width and height.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 2:
        height, width = y.shape
        y = y.ravel()
    else:
        if width is None or height is None:
            raise ValueError("flat input needs explicit width and height")
        if width * height != y.shape[0]:
            raise ValueError("width*height = %d does not match length %d"
                             % (width * height, y.shape[0]))
    return _kernels.tv_value(np.ascontiguousarray(y), int(width), int(height))


def regularised_error(problem, y):
    """reconstruction_error + problem.mu * total_variation."""
    y = _check_length(y, problem.n)
    A = problem.A
    return _kernels.objective_value(A.data, A.indices, A.indptr, problem.b, y,
                                    problem.mu, problem.width, problem.height)


def scale_to_range(y, mode="clamp"):
    """Map a vector into [0, 255].

    "clamp" clips each component; "minmax" maps [min, max] affinely onto
    [0, 255] and sends constant input to all zeros.
    """
    y = np.asarray(y, dtype=float)
    if mode == "clamp":
        return np.clip(y, LOWER, UPPER)
    if mode == "minmax":
        lo, hi = y.min(), y.max()
        if hi == lo:
            return np.zeros_like(y)
        return (y - lo) / (hi - lo) * UPPER
    raise ValueError("unknown mode: %r" % (mode,))
