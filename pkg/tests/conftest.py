import numpy as np
import pytest

from fewview.imaging import PhantomSpec, generate_phantom
from fewview.objective import Problem
from fewview.projector import ParallelGeometry, build_system_matrix


class TapeRNG:
    """Scripted random source: replays a fixed sequence of doubles.

    random() pops raw doubles; uniform(lo, hi) scales them, mirroring how
    the generator-backed draws are consumed by the step functions.
    """

    def __init__(self, values):
        self.values = [float(v) for v in values]
        self.cursor = 0

    def _take(self, count):
        if self.cursor + count > len(self.values):
            raise AssertionError("RNG tape exhausted")
        out = self.values[self.cursor:self.cursor + count]
        self.cursor += count
        return out

    def random(self, size=None):
        if size is None:
            return self._take(1)[0]
        return np.array(self._take(int(size)))

    def uniform(self, lo, hi, size=None):
        if size is None:
            return lo + (hi - lo) * self._take(1)[0]
        return lo + (hi - lo) * np.array(self._take(int(size)))

    def integers(self, lo, hi):
        # tape stores the intended integer directly
        v = int(self._take(1)[0])
        assert lo <= v < hi, "tape integer %d outside [%d, %d)" % (v, lo, hi)
        return v


def midpoint_line_integral_matrix(geometry, side, step=1e-3):
    """Dense system-matrix oracle: midpoint-sampled numerical line integrals."""
    m = geometry.num_values
    dense = np.zeros((m, side * side))
    centre = side / 2.0
    offsets = (np.arange(geometry.num_rays)
               - (geometry.num_rays - 1) / 2.0) * geometry.ray_spacing
    reach = side * np.sqrt(2.0)
    s = np.arange(-reach, reach, step) + step / 2.0
    for a, theta in enumerate(geometry.angles):
        ux, uy = -np.sin(theta), np.cos(theta)
        vx, vy = np.cos(theta), np.sin(theta)
        for r, t in enumerate(offsets):
            px = centre + t * vx + s * ux
            py = centre + t * vy + s * uy
            ok = (px >= 0) & (px < side) & (py >= 0) & (py < side)
            if not ok.any():
                continue
            cols = np.floor(px[ok]).astype(int)
            rows = np.floor(py[ok]).astype(int)
            np.add.at(dense[a * geometry.num_rays + r],
                      rows * side + cols, step)
    return dense


def make_problem(kind="shepp-logan", side=16, alpha=4, mu=0.0):
    image = generate_phantom(PhantomSpec(kind, side))
    A = build_system_matrix(ParallelGeometry(alpha, side), side)
    return Problem(A, image, mu=mu,
                   problem_id="%s-%dx%d-a%d" % (kind, side, side, alpha))


@pytest.fixture
def small_problem():
    return make_problem()
