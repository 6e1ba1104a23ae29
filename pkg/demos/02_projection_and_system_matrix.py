"""Build the sparse parallel-beam system matrix and inspect its behaviour.

The matrix rows hold exact ray/pixel intersection lengths.  With few
projection angles the system is heavily underdetermined: here 6 angles
give 192 equations for 1024 unknowns, which is why plain inversion is
hopeless and the reconstruction becomes an optimisation problem.
"""

import numpy as np

from fewview import (ParallelGeometry, PhantomSpec, back_project,
                     build_system_matrix, forward_project, generate_phantom)

side, alpha = 32, 6
geometry = ParallelGeometry(alpha, side)
A = build_system_matrix(geometry, side)
print("geometry: %d angles x %d rays" % (alpha, side))
print("matrix:   %d x %d with %d stored weights (%.2f%% dense)"
      % (A.shape[0], A.shape[1], A.nnz, 100.0 * A.nnz / np.prod(A.shape)))
print("weights:  min %.3g  max %.3g (grid diagonal is %.3g)"
      % (A.data.min(), A.data.max(), side * np.sqrt(2)))

image = generate_phantom(PhantomSpec("shepp-logan", side))
sinogram = forward_project(A, image.ravel())
print("\nsinogram of the head phantom: length %d, range [%.1f, %.1f]"
      % (len(sinogram), sinogram.min(), sinogram.max()))

# angle 0 rays run along image columns, so that block is the column sums
col_sums = image.sum(axis=0)
print("angle-0 block equals column sums:",
      np.allclose(sinogram[:side], col_sums, atol=1e-9))

# the stored transpose is the exact adjoint
rng = np.random.default_rng(0)
x, r = rng.standard_normal(A.shape[1]), rng.standard_normal(A.shape[0])
lhs = forward_project(A, x) @ r
rhs = x @ back_project(A, r)
print("adjoint identity <Ax, r> = <x, A^T r>: relative error %.2e"
      % (abs(lhs - rhs) / abs(lhs)))
