"""Generate every test phantom and render it as a PGM image.

The workbench ships four parametric binary phantoms (disk, annulus, two
rectangles, three bars) plus the six-level head phantom.  All of them are
deterministic, so the rendered bytes are identical on every run.
"""

import os

import numpy as np

from fewview import PHANTOM_KINDS, PhantomSpec, generate_phantom, render_image

OUT = os.path.join(os.path.dirname(__file__), "output", "phantoms")
os.makedirs(OUT, exist_ok=True)

for kind in PHANTOM_KINDS:
    for side in (32, 64):
        image = generate_phantom(PhantomSpec(kind, side))
        levels = np.unique(image)
        path = os.path.join(OUT, "%s_%d.pgm" % (kind, side))
        render_image(image.ravel(), side, side, path,
                     comment="%s %dx%d" % (kind, side, side))
        print("%-15s %dx%d  levels=%s -> %s"
              % (kind, side, side, levels.astype(int).tolist(), path))

print("\nThe head phantom always carries exactly six grey levels; the")
print("binary phantoms use only {0, 255}.")
