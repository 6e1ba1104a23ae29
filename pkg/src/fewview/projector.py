"""Parallel-beam geometry and the sparse ray/pixel system matrix.

The image is the pixel grid [0, side] x [0, side]: the pixel in row i,
column j covers x in [j, j+1] and y in [i, i+1].  At angle theta rays
travel along (-sin theta, cos theta) with the detector axis along
(cos theta, sin theta), so rays at angle 0 run up image columns and rays
at pi/2 run along image rows.  Ray r of num_rays is offset by
(r - (num_rays - 1) / 2) * ray_spacing from the grid centre.

Matrix rows are ordered angle-major: row = angle_index * num_rays + ray.
Entries are exact Euclidean lengths of the ray/pixel intersections.
"""

import numpy as np
import scipy.sparse as sp

from . import _kernels

# chords shorter than this are floating-point slivers from edge grazing
_MIN_WEIGHT = 1e-12
_PARALLEL_EPS = 1e-12


class ParallelGeometry:
    """Equally spaced view angles theta_i = i * pi / num_angles on [0, pi)."""

    def __init__(self, num_angles, num_rays, ray_spacing=1.0):
        if num_angles < 1:
            raise ValueError("num_angles must be >= 1")
        if num_rays < 1:
            raise ValueError("num_rays must be >= 1")
        self.num_angles = int(num_angles)
        self.num_rays = int(num_rays)
        self.ray_spacing = float(ray_spacing)
        self.angles = np.arange(self.num_angles) * np.pi / self.num_angles

    @property
    def num_values(self):
        return self.num_angles * self.num_rays

    def __repr__(self):
        return "ParallelGeometry(num_angles=%d, num_rays=%d, ray_spacing=%g)" % (
            self.num_angles, self.num_rays, self.ray_spacing)


def _ray_chords(ox, oy, ux, uy, side):
    """Pixel indices and chord lengths for the line (ox, oy) + s (ux, uy).

    Returns (rows, cols, lengths) for every pixel the ray crosses with a
    chord longer than _MIN_WEIGHT.  (ux, uy) must be a unit vector so the
    parameter difference equals the Euclidean chord length.
    """
    smin, smax = -np.inf, np.inf
    for o, u in ((ox, ux), (oy, uy)):
        if abs(u) < _PARALLEL_EPS:
            if o <= 0.0 or o >= side:
                return None
        else:
            s0, s1 = -o / u, (side - o) / u
            if s0 > s1:
                s0, s1 = s1, s0
            smin, smax = max(smin, s0), min(smax, s1)
    if smax - smin <= _MIN_WEIGHT:
        return None

    cuts = [np.array([smin, smax])]
    for o, u in ((ox, ux), (oy, uy)):
        if abs(u) >= _PARALLEL_EPS:
            lo = o + smin * u
            hi = o + smax * u
            if lo > hi:
                lo, hi = hi, lo
            grid = np.arange(np.ceil(lo), np.floor(hi) + 1.0)
            cuts.append((grid - o) / u)
    s = np.unique(np.concatenate(cuts))
    s = s[(s >= smin) & (s <= smax)]
    lengths = np.diff(s)
    keep = lengths > _MIN_WEIGHT
    if not keep.any():
        return None
    mid = (s[:-1] + s[1:]) / 2.0
    mx = ox + mid[keep] * ux
    my = oy + mid[keep] * uy
    cols = np.floor(mx).astype(np.int64)
    rows = np.floor(my).astype(np.int64)
    ok = (cols >= 0) & (cols < side) & (rows >= 0) & (rows < side)
    return rows[ok], cols[ok], lengths[keep][ok]


def build_system_matrix(geometry, side):
    """Sparse CSR matrix of ray/pixel intersection lengths.

    Shape is (num_angles * num_rays, side * side) with the image flattened
    row-major.  Construction is deterministic.
    """
    side = int(side)
    if geometry.num_rays != side:
        raise ValueError(
            "geometry.num_rays (%d) must equal the image side (%d)"
            % (geometry.num_rays, side))
    centre = side / 2.0
    offsets = (np.arange(geometry.num_rays)
               - (geometry.num_rays - 1) / 2.0) * geometry.ray_spacing
    row_idx, col_idx, weights = [], [], []
    for a, theta in enumerate(geometry.angles):
        ux, uy = -np.sin(theta), np.cos(theta)
        vx, vy = np.cos(theta), np.sin(theta)
        for r, t in enumerate(offsets):
            hit = _ray_chords(centre + t * vx, centre + t * vy, ux, uy, side)
            if hit is None:
                continue
            rows, cols, lengths = hit
            row_idx.append(np.full(lengths.shape, a * geometry.num_rays + r,
                                   dtype=np.int64))
            col_idx.append(rows * side + cols)
            weights.append(lengths)
    m = geometry.num_values
    n = side * side
    if not weights:
        return sp.csr_matrix((m, n))
    A = sp.coo_matrix(
        (np.concatenate(weights),
         (np.concatenate(row_idx), np.concatenate(col_idx))),
        shape=(m, n)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def forward_project(A, x):
    """Sinogram b = A x (angle-major ordering)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != A.shape[1]:
        raise ValueError("x has length %d, expected %d" % (x.shape[0], A.shape[1]))
    out = np.empty(A.shape[0])
    _kernels.csr_matvec(A.data, A.indices, A.indptr, x, out)
    return out


def back_project(A, r):
    """Adjoint application A^T r."""
    r = np.asarray(r, dtype=float).ravel()
    if r.shape[0] != A.shape[0]:
        raise ValueError("r has length %d, expected %d" % (r.shape[0], A.shape[0]))
    return A.T @ r


def dump_matrix(A, path):
    """Debug dump as text triplets 'row col weight', one entry per line."""
    coo = A.tocoo()
    with open(path, "w") as fh:
        for r, c, w in zip(coo.row, coo.col, coo.data):
            fh.write("%d %d %.17g\n" % (r, c, w))
