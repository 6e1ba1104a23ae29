"""Test phantoms and image helpers.

Images are 2-D float64 arrays with intensities in [0, 255].  The flattened
row-major vector of an image is the coordinate vector seen by the
projector, the error functions and the optimisers.
"""

import numpy as np

PHANTOM_KINDS = (
    "binary-disk",
    "binary-annulus",
    "binary-rects",
    "binary-bars",
    "shepp-logan",
)

BINARY_KINDS = PHANTOM_KINDS[:4]

# Head phantom built from ten ellipses: (added intensity, semi-axis a,
# semi-axis b, centre x, centre y, rotation in degrees) on [-1, 1]^2.
# Intensities follow the high-contrast convention whose overlaps sum to the
# six grey levels {0, 0.1, 0.2, 0.3, 0.4, 1.0}.  The large upper ellipse is
# centred at y = 0.34 (0.35 in the usual table): the 0.4-level region, where
# it overlaps the small ellipse at (0, 0.1), is otherwise missed by every
# pixel centre of a 32x32 grid.
_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.34, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.605, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)

# Nominal grey levels of the head phantom before scaling to [0, 255].
SHEPP_LOGAN_LEVELS = np.array([0.0, 0.1, 0.2, 0.3, 0.4, 1.0])


class PhantomSpec:
    """Phantom request: one of PHANTOM_KINDS at a given square side."""

    def __init__(self, kind, side):
        if kind not in PHANTOM_KINDS:
            raise ValueError("unknown phantom kind: %r" % (kind,))
        side = int(side)
        if side < 2:
            raise ValueError("side must be >= 2, got %d" % side)
        self.kind = kind
        self.side = side

    def __repr__(self):
        return "PhantomSpec(kind=%r, side=%d)" % (self.kind, self.side)

    def __eq__(self, other):
        return (
            isinstance(other, PhantomSpec)
            and self.kind == other.kind
            and self.side == other.side
        )

    def __hash__(self):
        return hash((self.kind, self.side))


def _pixel_centres(side):
    """Pixel-centre coordinates covering [-1, 1], ascending."""
    return -1.0 + (2.0 * np.arange(side) + 1.0) / side


def generate_shepp_logan(side):
    """Six-level head phantom sampled at pixel centres on [-1, 1]^2.

    Ellipse intensities are summed where ellipses overlap, snapped to the
    nearest of the six nominal levels and scaled by 255 with round-half-up,
    so every pixel lies in {0, 26, 51, 77, 102, 255}.  Row 0 is the top of
    the head.
    """
    side = int(side)
    if side < 2:
        raise ValueError("side must be >= 2, got %d" % side)
    c = _pixel_centres(side)
    X, Y = np.meshgrid(c, -c)  # row 0 at the top
    img = np.zeros((side, side))
    for value, a, b, x0, y0, deg in _ELLIPSES:
        t = np.deg2rad(deg)
        ct, st = np.cos(t), np.sin(t)
        u = (X - x0) * ct + (Y - y0) * st
        v = (X - x0) * st - (Y - y0) * ct
        img[u * u / (a * a) + v * v / (b * b) <= 1.0] += value
    # snap floating-point sums to the nominal level set
    idx = np.abs(img[..., None] - SHEPP_LOGAN_LEVELS).argmin(axis=-1)
    img = SHEPP_LOGAN_LEVELS[idx]
    return np.floor(img * 255.0 + 0.5)


def generate_binary_phantom(spec):
    """Deterministic two-level phantom with values in {0, 255}.

    Shapes, with s = spec.side and pixel centres at (col + 0.5, row + 0.5):

    binary-disk     centred disk, radius 0.35 s (strict interior)
    binary-annulus  centred ring, 0.2 s <= r < 0.4 s
    binary-rects    two disjoint axis-aligned rectangles, ~15% area each
    binary-bars     three vertical bars of width s // 8
    """
    if spec.kind not in BINARY_KINDS:
        raise ValueError("not a binary phantom kind: %r" % (spec.kind,))
    s = spec.side
    img = np.zeros((s, s))
    if spec.kind in ("binary-disk", "binary-annulus"):
        half = s / 2.0
        cc = np.arange(s) + 0.5
        X, Y = np.meshgrid(cc, cc)
        r = np.hypot(X - half, Y - half)
        if spec.kind == "binary-disk":
            img[r < 0.35 * s] = 255.0
        else:
            img[(r >= 0.2 * s) & (r < 0.4 * s)] = 255.0
    elif spec.kind == "binary-rects":
        r0, r1 = round(0.15 * s), round(0.45 * s)
        c0, c1 = round(0.10 * s), round(0.60 * s)
        img[r0:r1, c0:c1] = 255.0
        r0, r1 = round(0.55 * s), round(0.85 * s)
        c0, c1 = round(0.40 * s), round(0.90 * s)
        img[r0:r1, c0:c1] = 255.0
    else:  # binary-bars
        w = max(1, s // 8)
        for k in (1, 3, 5):
            img[:, k * w:(k + 1) * w] = 255.0
    return img


def generate_phantom(spec):
    """Dispatch on spec.kind; see generate_shepp_logan / generate_binary_phantom."""
    if spec.kind == "shepp-logan":
        return generate_shepp_logan(spec.side)
    return generate_binary_phantom(spec)


def quantise(image):
    """Round every pixel half-up to the nearest integer in {0, ..., 255}."""
    return np.clip(np.floor(np.asarray(image, dtype=float) + 0.5), 0.0, 255.0)
