"""Run the five classical reconstructors on a few-view problem.

ART/SART/SIRT/CGLS drive the projection residual e1 towards zero, but with
only six views a tiny residual says little about fidelity to the object:
the reproduction error e2 stays large.  FBP is not designed for the
few-view regime at all.
"""

import os

from fewview import (BASELINES, BaselineConfig, build_problem, render_image,
                     run_baseline, scale_to_range)

OUT = os.path.join(os.path.dirname(__file__), "output", "baselines")
os.makedirs(OUT, exist_ok=True)

problem = build_problem("shepp-logan", 32, 6)
print("problem: %s (m=%d equations, n=%d pixels)\n"
      % (problem.problem_id, problem.A.shape[0], problem.n))
print("%-6s %14s %12s %10s" % ("method", "e1 (residual)", "e2 (to truth)",
                               "seconds"))
for algorithm in BASELINES:
    record = run_baseline(problem, BaselineConfig(algorithm))
    path = os.path.join(OUT, "%s.pgm" % algorithm)
    render_image(scale_to_range(record.best), 32, 32, path,
                 comment="%s %s" % (problem.problem_id, algorithm))
    print("%-6s %14.4g %12.0f %10.2f" % (algorithm, record.e1, record.e2,
                                         record.wall_time))

print("\nImages written to %s" % OUT)
print("Note how SIRT nearly solves A y = b (tiny e1) yet its e2 shows the")
print("reconstruction is still far from the actual phantom.")
