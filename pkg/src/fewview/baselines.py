"""Classical reference reconstructors: ART, SART, SIRT, CGLS and FBP.

All five are deterministic, start from the zero image and work unclamped
in R^n; clamping into [0, 255] happens only when the reproduction error is
computed (see run_baseline).
"""

import time

import numpy as np

from . import _kernels
from .imaging import quantise
from .objective import (reconstruction_error, reproduction_error,
                        scale_to_range)
from .optimizers import RunRecord

BASELINES = ("art", "sart", "sirt", "cgls", "fbp")

DEFAULT_ITERATIONS = {"art": 200, "sart": 200, "sirt": 500, "cgls": 50, "fbp": 1}


class BaselineConfig:
    """Reference algorithm choice, iteration count and relaxation."""

    def __init__(self, algorithm, iterations=None, relaxation=1.0):
        if algorithm not in BASELINES:
            raise ValueError("unknown baseline: %r" % (algorithm,))
        if iterations is None:
            iterations = DEFAULT_ITERATIONS[algorithm]
        if iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < relaxation < 2.0:
            raise ValueError("relaxation must lie in (0, 2)")
        self.algorithm = algorithm
        self.iterations = int(iterations)
        self.relaxation = float(relaxation)

    def as_dict(self):
        return {"algorithm": self.algorithm, "iterations": self.iterations,
                "relaxation": self.relaxation}


def _inverse_sums(A, axis):
    s = np.asarray(A.sum(axis=axis)).ravel()
    inv = np.zeros_like(s)
    nz = s != 0
    inv[nz] = 1.0 / s[nz]
    return inv


def art_reconstruct(problem, config):
    """Cyclic Kaczmarz sweeps over the matrix rows; zero rows are skipped."""
    A = problem.A
    row_norms = np.asarray(A.multiply(A).sum(axis=1)).ravel()
    x = np.zeros(problem.n)
    _kernels.kaczmarz_sweeps(A.data, A.indices, A.indptr, problem.b,
                             row_norms, x, config.relaxation,
                             config.iterations)
    return x


def sirt_reconstruct(problem, config, callback=None):
    """Simultaneous update x += C A^T R (b - A x) with inverse row/column sums."""
    A = problem.A
    R = _inverse_sums(A, axis=1)
    C = _inverse_sums(A, axis=0)
    x = np.zeros(problem.n)
    for _ in range(config.iterations):
        x = x + config.relaxation * (C * (A.T @ (R * (problem.b - A @ x))))
        if callback is not None:
            callback(x)
    return x


def _angle_blocks(problem):
    """Row ranges of one projection angle each (angle-major layout)."""
    m = problem.A.shape[0]
    rays = problem.width
    if m % rays:
        return [(0, m)]
    return [(a * rays, (a + 1) * rays) for a in range(m // rays)]


def sart_reconstruct(problem, config):
    """SIRT-style update applied per angle block, swept in angle order."""
    A = problem.A
    blocks = []
    for r0, r1 in _angle_blocks(problem):
        Ab = A[r0:r1]
        blocks.append((Ab, problem.b[r0:r1],
                       _inverse_sums(Ab, axis=1), _inverse_sums(Ab, axis=0)))
    x = np.zeros(problem.n)
    for _ in range(config.iterations):
        for Ab, bb, R, C in blocks:
            x = x + config.relaxation * (C * (Ab.T @ (R * (bb - Ab @ x))))
    return x


def cgls_reconstruct(problem, config, tol=1e-10, callback=None):
    """Conjugate gradients on the normal equations from the zero image."""
    A = problem.A
    x = np.zeros(problem.n)
    r = problem.b.copy()
    s = A.T @ r
    p = s.copy()
    gamma = float(s @ s)
    for _ in range(config.iterations):
        if np.sqrt(gamma) < tol:
            break
        q = A @ p
        qq = float(q @ q)
        if qq == 0.0:
            break
        alpha = gamma / qq
        x += alpha * p
        r -= alpha * q
        s = A.T @ r
        gamma_new = float(s @ s)
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
        if callback is not None:
            callback(x.copy())
    return x


def _ramp_filtered(sino, num_rays):
    npad = 1
    while npad < 2 * num_rays:
        npad *= 2
    ramp = 2.0 * np.abs(np.fft.fftfreq(npad))
    padded = np.zeros((sino.shape[0], npad))
    padded[:, :num_rays] = sino
    return np.real(np.fft.ifft(np.fft.fft(padded, axis=1) * ramp, axis=1))[:, :num_rays]


def fbp_reconstruct(problem, config):
    """Ram-Lak filtered backprojection for the parallel geometry.

    Each angle's detector row is ramp-filtered in the frequency domain
    (zero padded to the next power of two), backprojected with linear
    detector interpolation and the sum scaled by pi / (2 alpha).
    """
    side = problem.width
    m = problem.A.shape[0]
    num_angles = m // side
    if num_angles * side != m:
        raise ValueError("sinogram rows do not split into equal angles")
    q = _ramp_filtered(problem.b.reshape(num_angles, side), side)
    angles = np.arange(num_angles) * np.pi / num_angles
    centre = side / 2.0
    cc = np.arange(side) + 0.5 - centre
    X, Y = np.meshgrid(cc, cc)  # pixel centres relative to the grid centre
    out = np.zeros((side, side))
    half = (side - 1) / 2.0
    for a, theta in enumerate(angles):
        t = X * np.cos(theta) + Y * np.sin(theta) + half
        j0 = np.floor(t).astype(np.int64)
        frac = t - j0
        j1 = j0 + 1
        v0 = np.where((j0 >= 0) & (j0 < side), q[a, np.clip(j0, 0, side - 1)], 0.0)
        v1 = np.where((j1 >= 0) & (j1 < side), q[a, np.clip(j1, 0, side - 1)], 0.0)
        out += v0 * (1.0 - frac) + v1 * frac
    out *= np.pi / (2.0 * num_angles)
    return out.ravel()


_RECONSTRUCT = {
    "art": art_reconstruct,
    "sart": sart_reconstruct,
    "sirt": sirt_reconstruct,
    "cgls": cgls_reconstruct,
    "fbp": fbp_reconstruct,
}


def reconstruct(problem, config):
    """Dispatch on config.algorithm; returns the unclamped image vector."""
    return _RECONSTRUCT[config.algorithm](problem, config)


def run_baseline(problem, config):
    """Run one deterministic baseline and wrap it in a RunRecord.

    e1 is evaluated on the raw output; the reproduction errors are
    evaluated after clamping into [0, 255] (recorded as scale_mode).
    """
    t0 = time.perf_counter()
    x = reconstruct(problem, config)
    scaled = scale_to_range(x, mode="clamp")
    truth = problem.truth_vector()
    return RunRecord(
        problem_id=problem.problem_id,
        algorithm_id=config.algorithm,
        seed=0,
        config=config.as_dict(),
        best=x,
        fitness=float(reconstruction_error(problem, x)),
        e1=float(reconstruction_error(problem, x)),
        e2=float(reproduction_error(scaled, truth)),
        e2_quantised=float(reproduction_error(quantise(scaled), truth)),
        history=[],
        fe_used=0,
        wall_time=time.perf_counter() - t0,
        scale_mode="clamp",
    )
