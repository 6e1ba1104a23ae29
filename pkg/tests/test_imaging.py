import math

import numpy as np
import pytest

from fewview.imaging import (PHANTOM_KINDS, PhantomSpec, _ELLIPSES,
                             SHEPP_LOGAN_LEVELS, generate_binary_phantom,
                             generate_phantom, generate_shepp_logan, quantise)


def shepp_logan_point_oracle(x, y):
    """Scalar oracle: evaluate all ten ellipse memberships at one point,
    sum the intensities, snap to the nominal level set, scale half-up."""
    total = 0.0
    for value, a, b, x0, y0, deg in _ELLIPSES:
        t = math.radians(deg)
        u = (x - x0) * math.cos(t) + (y - y0) * math.sin(t)
        v = (x - x0) * math.sin(t) - (y - y0) * math.cos(t)
        if (u / a) ** 2 + (v / b) ** 2 <= 1.0:
            total += value
    level = min(SHEPP_LOGAN_LEVELS, key=lambda lv: abs(lv - total))
    return math.floor(level * 255.0 + 0.5)


class TestSheppLogan:
    def test_corner_outside_every_ellipse(self):
        assert generate_shepp_logan(32)[0, 0] == 0.0

    def test_exactly_six_levels(self):
        # the discrete problem advertises six grey levels at both sizes
        for side in (32, 64):
            assert len(np.unique(generate_shepp_logan(side))) == 6

    def test_level_set(self):
        img = generate_shepp_logan(32)
        assert set(np.unique(img)) == {0.0, 26.0, 51.0, 77.0, 102.0, 255.0}

    def test_centre_pixel_matches_point_oracle(self):
        for side in (32, 64):
            img = generate_shepp_logan(side)
            j = side // 2
            x = -1.0 + (2.0 * j + 1.0) / side
            y = -x  # row j sits below the horizontal midline
            assert img[j, j] == shepp_logan_point_oracle(x, y)

    def test_every_pixel_matches_point_oracle_16(self):
        side = 16
        img = generate_shepp_logan(side)
        for i in range(side):
            for j in range(side):
                x = -1.0 + (2.0 * j + 1.0) / side
                y = 1.0 - (2.0 * i + 1.0) / side
                assert img[i, j] == shepp_logan_point_oracle(x, y)

    def test_deterministic(self):
        assert np.array_equal(generate_shepp_logan(32), generate_shepp_logan(32))

    def test_side_too_small(self):
        with pytest.raises(ValueError):
            generate_shepp_logan(1)


class TestBinaryPhantoms:
    def test_disk_corner_zero(self):
        img = generate_binary_phantom(PhantomSpec("binary-disk", 32))
        assert img[0, 0] == 0.0

    def test_values_binary(self):
        for kind in ("binary-disk", "binary-annulus", "binary-rects",
                     "binary-bars"):
            img = generate_binary_phantom(PhantomSpec(kind, 32))
            assert set(np.unique(img)) <= {0.0, 255.0}
            assert (img == 255.0).any()

    def test_disk_count_matches_membership_oracle(self):
        side = 32
        img = generate_binary_phantom(PhantomSpec("binary-disk", side))
        count = 0
        for i in range(side):
            for j in range(side):
                dx = (j + 0.5) - side / 2.0
                dy = (i + 0.5) - side / 2.0
                if math.hypot(dx, dy) < 0.35 * side:
                    count += 1
        assert (img == 255.0).sum() == count

    def test_annulus_count_matches_membership_oracle(self):
        side = 32
        img = generate_binary_phantom(PhantomSpec("binary-annulus", side))
        count = 0
        for i in range(side):
            for j in range(side):
                r = math.hypot((j + 0.5) - side / 2.0, (i + 0.5) - side / 2.0)
                if 0.2 * side <= r < 0.4 * side:
                    count += 1
        assert (img == 255.0).sum() == count

    def test_rects_cover_roughly_fifteen_percent_each(self):
        for side in (32, 64):
            img = generate_binary_phantom(PhantomSpec("binary-rects", side))
            frac = (img == 255.0).sum() / side ** 2
            assert 0.25 < frac < 0.35

    def test_bars_width(self):
        side = 32
        img = generate_binary_phantom(PhantomSpec("binary-bars", side))
        on_cols = np.where((img == 255.0).all(axis=0))[0]
        assert len(on_cols) == 3 * (side // 8)

    def test_shepp_kind_rejected(self):
        with pytest.raises(ValueError):
            generate_binary_phantom(PhantomSpec("shepp-logan", 32))


class TestPhantomSpec:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            PhantomSpec("binary-triangles", 32)

    def test_side_bound(self):
        with pytest.raises(ValueError):
            PhantomSpec("binary-disk", 1)

    def test_all_kinds_and_sides_valid_images(self):
        for kind in PHANTOM_KINDS:
            for side in (32, 64):
                img = generate_phantom(PhantomSpec(kind, side))
                assert img.shape == (side, side)
                assert img.min() >= 0.0 and img.max() <= 255.0
                if kind == "shepp-logan":
                    assert len(np.unique(img)) == 6
                else:
                    assert set(np.unique(img)) <= {0.0, 255.0}

    def test_generators_pure(self):
        for kind in PHANTOM_KINDS:
            spec = PhantomSpec(kind, 32)
            assert np.array_equal(generate_phantom(spec), generate_phantom(spec))


class TestQuantise:
    def test_zero_fixed_point(self):
        img = np.zeros((4, 4))
        assert np.array_equal(quantise(img), img)

    def test_round_to_nearest(self):
        assert quantise(np.array([[127.4]]))[0, 0] == 127.0
        assert quantise(np.array([[127.5]]))[0, 0] == 128.0

    def test_boundary_preserved(self):
        assert quantise(np.array([[255.0]]))[0, 0] == 255.0
        assert quantise(np.array([[0.0]]))[0, 0] == 0.0

    def test_clamps(self):
        out = quantise(np.array([[-3.2, 300.0]]))
        assert out[0, 0] == 0.0 and out[0, 1] == 255.0

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        img = rng.uniform(-10, 270, size=(8, 8))
        once = quantise(img)
        assert np.array_equal(quantise(once), once)
