"""Run a miniature benchmark and derive the statistical tables.

The full protocol (five phantoms x two sizes x four view counts, 30
repetitions, 100k evaluations) takes a while, so this demo shrinks every
axis: two problems, five repetitions, 10k evaluations.  The outputs have
exactly the shape of the full-scale tables: per-problem medians plus
pairwise rank-sum win matrices at the 0.05 significance level.
"""

import os

from fewview import ExperimentConfig, emit_tables, run_experiment
from fewview.harness import sweep_boxes, sweep_mu

OUT = os.path.join(os.path.dirname(__file__), "output", "protocol")
os.makedirs(OUT, exist_ok=True)

config = ExperimentConfig(
    phantoms=["shepp-logan", "binary-disk"], sizes=[32], projections=[6],
    algorithms=["dfo-tr", "dfo-tr-mu", "sirt", "cgls", "fbp"],
    repetitions=5, base_seed=1, budget=10_000, boxes=50, mu=55.0)

print("running %d problems x %d algorithms x %d repetitions ..."
      % (2, len(config.algorithms), config.repetitions))
store = run_experiment(config)
for path in emit_tables(store, OUT, repetitions=config.repetitions):
    print("wrote", path)

print("\nmedians_e2.csv:")
print(open(os.path.join(OUT, "medians_e2.csv")).read())
print("wins_e2.csv (row algorithm beats column algorithm on k problems):")
print(open(os.path.join(OUT, "wins_e2.csv")).read())

print("mini box-count sweep (flies, mu=0):")
sweep_boxes(kind="shepp-logan", side=32, alpha=6, box_counts=(1, 50),
            repetitions=5, budget=10_000, base_seed=1, out_dir=OUT)
print(open(os.path.join(OUT, "sweep_boxes.csv")).read())

print("mini TV-weight sweep (flies, 50 boxes):")
sweep_mu(kind="shepp-logan", side=32, alpha=6, mus=(0.0, 55.0), boxes=50,
         repetitions=5, budget=10_000, base_seed=1, out_dir=OUT)
print(open(os.path.join(OUT, "sweep_mu.csv")).read())
