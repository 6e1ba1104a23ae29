"""Experiment orchestration and I/O.

Builds the benchmark suite (phantoms x sizes x projection counts), runs
seeded trials optionally across a worker pool, persists run records as
JSON lines, derives the median and win-matrix CSV tables and renders
images as binary PGM.  Repeating an experiment with the same configuration
and base seed reproduces the metric files byte for byte, independent of
the worker count.
"""

import csv
import hashlib
import io
import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .baselines import BASELINES, BaselineConfig, run_baseline
from .imaging import PHANTOM_KINDS, PhantomSpec, generate_phantom, quantise
from .objective import Problem
from .optimizers import (SQRT3, OptimizerConfig, RunRecord, run_optimizer,
                         tune_dfo)
from .projector import ParallelGeometry, build_system_matrix
from .stats import median, win_matrix

# optimiser aliases: vanilla swarms search the full box; the -tr variants
# use the tuned flies parameters, with -tr-mu adding boxing and the TV term
OPTIMIZER_TOKENS = ("dfo", "dfo-tr", "dfo-tr-mu", "de", "gpso", "lpso")
ALGORITHM_TOKENS = OPTIMIZER_TOKENS + BASELINES

DEFAULT_PROJECTIONS = (6, 8, 16, 32)
DEFAULT_SIZES = (32, 64)


class ExperimentConfig:
    """Suite definition plus runtime knobs for run_experiment."""

    def __init__(self, phantoms=PHANTOM_KINDS, sizes=DEFAULT_SIZES,
                 projections=DEFAULT_PROJECTIONS, algorithms=("dfo-tr-mu", "sirt"),
                 repetitions=30, base_seed=0, budget=100_000, boxes=50,
                 mu=55.0, output_dir="results", workers=1):
        for kind in phantoms:
            if kind not in PHANTOM_KINDS:
                raise ValueError("unknown phantom kind: %r" % (kind,))
        for token in algorithms:
            if token not in ALGORITHM_TOKENS:
                raise ValueError("unknown algorithm: %r" % (token,))
        if repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        self.phantoms = list(phantoms)
        self.sizes = [int(s) for s in sizes]
        self.projections = [int(a) for a in projections]
        self.algorithms = list(algorithms)
        self.repetitions = int(repetitions)
        self.base_seed = int(base_seed)
        self.budget = int(budget)
        self.boxes = int(boxes)
        self.mu = float(mu)
        self.output_dir = str(output_dir)
        self.workers = int(workers)


_CONFIG_LISTS = {"phantoms": str, "algorithms": str, "sizes": int,
                 "projections": int}
_CONFIG_SCALARS = {"repetitions": int, "base_seed": int, "budget": int,
                   "boxes": int, "mu": float, "output_dir": str,
                   "workers": int}


def parse_config_file(path):
    """Flat key = value file; '#' starts a comment; unknown keys are errors."""
    kwargs = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError("%s:%d: expected key = value" % (path, lineno))
            key, value = (part.strip() for part in line.split("=", 1))
            if key in _CONFIG_LISTS:
                conv = _CONFIG_LISTS[key]
                kwargs[key] = [conv(v.strip()) for v in value.split(",") if v.strip()]
            elif key in _CONFIG_SCALARS:
                kwargs[key] = _CONFIG_SCALARS[key](value)
            else:
                raise ValueError("%s:%d: unknown key %r" % (path, lineno, key))
    return ExperimentConfig(**kwargs)


def stable_seed(*parts):
    """Machine-independent 63-bit seed from the textual parts."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def problem_id(kind, side, alpha):
    return "%s-%dx%d-a%d" % (kind, side, side, alpha)


def build_problem(kind, side, alpha):
    """Phantom, geometry, system matrix and forward-projected sinogram."""
    image = generate_phantom(PhantomSpec(kind, side))
    A = build_system_matrix(ParallelGeometry(alpha, side), side)
    return Problem(A, image, problem_id=problem_id(kind, side, alpha))


def build_suite(config):
    """All (phantom, size, projections) problems of the configuration."""
    return [build_problem(kind, side, alpha)
            for kind in config.phantoms
            for side in config.sizes
            for alpha in config.projections]


def make_algorithm(token, config):
    """Resolve an algorithm token to ('optimizer'|'baseline', config)."""
    budget, boxes, mu = config.budget, config.boxes, config.mu
    if token in BASELINES:
        return "baseline", BaselineConfig(token)
    if token == "dfo":
        opt = OptimizerConfig("dfo", N=100, delta=0.001, phi=1.0,
                              budget=budget, num_boxes=1, mu=0.0)
    elif token == "dfo-tr":
        opt = OptimizerConfig("dfo", N=2, delta=0.001, phi=SQRT3,
                              budget=budget, num_boxes=1, mu=0.0)
    elif token == "dfo-tr-mu":
        opt = OptimizerConfig("dfo", N=2, delta=0.001, phi=SQRT3,
                              budget=budget, num_boxes=boxes, mu=mu)
    elif token in ("gpso", "lpso", "de"):
        opt = OptimizerConfig(token, N=100, budget=budget, num_boxes=1, mu=0.0)
    else:
        raise ValueError("unknown algorithm: %r" % (token,))
    return "optimizer", opt


class ResultStore:
    """Append-only collection of run records keyed by (problem, algorithm,
    repetition), optionally mirrored to a JSON-lines file.

    Deterministic baselines are stored once per problem (repetition 0) and
    expanded to the requested sample size at table time.
    """

    def __init__(self, path=None):
        self.path = path
        self.records = {}
        self.errors = {}

    @staticmethod
    def _parse_key(key):
        return (key[0], key[1], int(key[2]))

    @classmethod
    def load(cls, path):
        store = cls(path)
        if os.path.exists(path):
            with open(path) as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    entry = json.loads(line)
                    key = cls._parse_key(entry["key"])
                    if "error" in entry:
                        store.errors[key] = entry["error"]
                    else:
                        store.records[key] = RunRecord.from_dict(entry["record"])
        return store

    def _append_line(self, payload):
        if self.path is None:
            return
        with open(self.path, "a") as fh:
            fh.write(json.dumps(payload) + "\n")

    def add(self, key, record):
        if key in self.records or key in self.errors:
            raise ValueError("duplicate key: %r" % (key,))
        self.records[key] = record
        self._append_line({"key": list(key), "record": record.as_dict()})

    def add_error(self, key, message):
        if key in self.records or key in self.errors:
            raise ValueError("duplicate key: %r" % (key,))
        self.errors[key] = message
        self._append_line({"key": list(key), "error": message})

    def __contains__(self, key):
        return key in self.records or key in self.errors

    def __len__(self):
        return len(self.records)

    def problem_ids(self):
        seen = []
        for pid, _, _ in self.records:
            if pid not in seen:
                seen.append(pid)
        return seen

    def algorithm_ids(self):
        seen = []
        for _, alg, _ in self.records:
            if alg not in seen:
                seen.append(alg)
        return seen

    def samples(self, metric="e1", expand_to=None):
        """metric values as {algorithm: {problem: [values]}}.

        Single-record (deterministic) cells are replicated to expand_to
        values so they can be ranked against expand_to stochastic runs.
        """
        if metric not in ("e1", "e2", "e2_quantised", "fitness"):
            raise ValueError("unknown metric: %r" % (metric,))
        out = {}
        for (pid, alg, _rep), record in sorted(self.records.items(),
                                               key=lambda kv: kv[0][2]):
            out.setdefault(alg, {}).setdefault(pid, []).append(
                getattr(record, metric))
        if expand_to:
            for per_problem in out.values():
                for pid, values in per_problem.items():
                    if len(values) == 1 and expand_to > 1:
                        per_problem[pid] = values * expand_to
        return out


def _run_cells_for_problem(problem, cells):
    """Execute (token, kind, algo_config, seed, rep) cells on one problem."""
    results = []
    baseline_cache = {}
    for token, kind, algo_config, seed, rep in cells:
        key = (problem.problem_id, token, rep)
        try:
            if kind == "baseline":
                if token not in baseline_cache:
                    baseline_cache[token] = run_baseline(problem, algo_config)
                record = baseline_cache[token]
            else:
                record = run_optimizer(problem, algo_config, seed)
                record.algorithm_id = token
            results.append((key, record, None))
        except Exception as exc:  # noqa: BLE001 - cell failures must not kill the run
            results.append((key, None, "%s: %s" % (type(exc).__name__, exc)))
    return results


def _worker_task(payload):
    (kind, side, alpha), cells = payload
    problem = build_problem(kind, side, alpha)
    out = []
    for key, record, error in _run_cells_for_problem(problem, cells):
        out.append((key, None if record is None else record.as_dict(), error))
    return out


def run_experiment(config, store_path=None, workers=None):
    """Run every (problem, algorithm, repetition) cell into a ResultStore.

    Stochastic algorithms get seed = stable_seed(base_seed, problem,
    algorithm, repetition); deterministic baselines run once per problem.
    With a store path, completed cells are skipped on re-run so an
    interrupted experiment resumes where it stopped.
    """
    workers = config.workers if workers is None else int(workers)
    store = ResultStore.load(store_path) if store_path else ResultStore()
    store.path = store_path
    tasks = []
    for kind in config.phantoms:
        for side in config.sizes:
            for alpha in config.projections:
                pid = problem_id(kind, side, alpha)
                cells = []
                for token in config.algorithms:
                    algo_kind, algo_config = make_algorithm(token, config)
                    reps = (range(1) if algo_kind == "baseline"
                            else range(config.repetitions))
                    for rep in reps:
                        key = (pid, token, rep)
                        if key in store:
                            continue
                        seed = stable_seed(config.base_seed, pid, token, rep)
                        cells.append((token, algo_kind, algo_config, seed, rep))
                if cells:
                    tasks.append(((kind, side, alpha), cells))

    if workers <= 1:
        for (kind, side, alpha), cells in tasks:
            problem = build_problem(kind, side, alpha)
            for key, record, error in _run_cells_for_problem(problem, cells):
                _store_result(store, key, record, error)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for results in pool.map(_worker_task, tasks):
                for key, record_dict, error in results:
                    record = (None if record_dict is None
                              else RunRecord.from_dict(record_dict))
                    _store_result(store, key, record, error)
    return store


def _store_result(store, key, record, error):
    if error is None:
        store.add(key, record)
    else:
        warnings.warn("cell %r failed: %s" % (key, error))
        store.add_error(key, error)


def _format(value):
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(v) for v in row])
    return path


def emit_tables(store, out_dir, alpha=0.05, repetitions=None):
    """Write median and win-matrix CSVs for e1 and e2; returns the paths.

    medians_<metric>.csv has one row per problem and one column per
    algorithm; wins_<metric>.csv is the pairwise count of significant
    rank-sum wins with a trailing row-sum column.
    """
    if len(store) == 0:
        raise ValueError("empty result store")
    os.makedirs(out_dir, exist_ok=True)
    problems = store.problem_ids()
    algorithms = store.algorithm_ids()
    if repetitions is None:
        repetitions = max(rep for _, _, rep in store.records) + 1
    paths = []
    for metric in ("e1", "e2"):
        samples = store.samples(metric, expand_to=repetitions)
        rows = []
        for pid in problems:
            row = [pid]
            for alg in algorithms:
                values = samples.get(alg, {}).get(pid)
                row.append(median(values) if values else "")
            rows.append(row)
        paths.append(_write_csv(os.path.join(out_dir, "medians_%s.csv" % metric),
                                ["problem"] + algorithms, rows))
        # failed cells are excluded: rank only problems every algorithm has
        complete = [pid for pid in problems
                    if all(samples.get(alg, {}).get(pid) for alg in algorithms)]
        if len(complete) < len(problems):
            warnings.warn("win matrix (%s) restricted to %d of %d problems "
                          "with complete samples"
                          % (metric, len(complete), len(problems)))
        if len(algorithms) > 1 and complete:
            wm = win_matrix(samples, alpha=alpha, algorithms=algorithms,
                            problems=complete)
            rows = []
            for i, alg in enumerate(algorithms):
                row = [alg]
                row.extend("NA" if i == j else int(wm.counts[i, j])
                           for j in range(len(algorithms)))
                row.append(int(wm.row_sums()[i]))
                rows.append(row)
        else:
            rows = [[alg] + ["NA"] * len(algorithms) + [0]
                    for alg in algorithms]
        paths.append(_write_csv(os.path.join(out_dir, "wins_%s.csv" % metric),
                                ["algorithm"] + algorithms + ["sum"], rows))
    return paths


def render_image(vector, width, height, path, comment=""):
    """Write an 8-bit binary PGM (P5); pixel values are clamped and rounded."""
    data = quantise(np.asarray(vector, dtype=float).reshape(height, width))
    header = io.BytesIO()
    header.write(b"P5\n")
    if comment:
        header.write(("# %s\n" % comment.replace("\n", " ")).encode("ascii"))
    header.write(("%d %d\n255\n" % (width, height)).encode("ascii"))
    try:
        with open(path, "wb") as fh:
            fh.write(header.getvalue())
            fh.write(data.astype(np.uint8).tobytes())
    except OSError as exc:
        raise OSError("cannot write image %r: %s" % (path, exc)) from exc
    return path


def _sweep(problem, configs, labels, repetitions, base_seed, workers=1):
    """Run labelled optimizer configs on one problem; returns a ResultStore."""
    store = ResultStore()
    tasks = []
    for label, config in zip(labels, configs):
        for rep in range(repetitions):
            seed = stable_seed(base_seed, problem.problem_id, label, rep)
            tasks.append((label, config, seed, rep))
    if workers <= 1:
        for label, config, seed, rep in tasks:
            record = run_optimizer(problem, config, seed)
            record.algorithm_id = label
            store.add((problem.problem_id, label, rep), record)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_cell, problem, config, seed)
                       for _, config, seed, _ in tasks]
            for (label, _, _, rep), future in zip(tasks, futures):
                record = future.result()
                record.algorithm_id = label
                store.add((problem.problem_id, label, rep), record)
    return store


def _sweep_cell(problem, config, seed):
    return run_optimizer(problem, config, seed)


def sweep_boxes(kind="shepp-logan", side=32, alpha=6, box_counts=(1, 2, 3, 10, 50, 100),
                repetitions=30, budget=100_000, mu=0.0, base_seed=0,
                out_dir=None, workers=1):
    """Box-count sweep with the tuned flies configuration.

    Labels runs as boxes-<P>; writes sweep_boxes.csv (median e1/e2 and
    significant-win counts per box count) plus win matrices when out_dir
    is given.
    """
    problem = build_problem(kind, side, alpha)
    labels = ["boxes-%d" % p for p in box_counts]
    configs = [OptimizerConfig("dfo", N=2, delta=0.001, phi=SQRT3,
                               budget=budget, num_boxes=p, mu=mu)
               for p in box_counts]
    store = _sweep(problem, configs, labels, repetitions, base_seed, workers)
    if out_dir:
        _emit_sweep(store, out_dir, "sweep_boxes.csv", "boxes",
                    [str(p) for p in box_counts], labels, repetitions)
    return store


def sweep_mu(kind="shepp-logan", side=32, alpha=6, mus=(0.0, 55.0), boxes=50,
             repetitions=30, budget=100_000, base_seed=0, out_dir=None,
             workers=1):
    """TV-weight sweep with boxing fixed; labels runs as mu-<value>."""
    problem = build_problem(kind, side, alpha)
    labels = ["mu-%g" % m for m in mus]
    configs = [OptimizerConfig("dfo", N=2, delta=0.001, phi=SQRT3,
                               budget=budget, num_boxes=boxes, mu=m)
               for m in mus]
    store = _sweep(problem, configs, labels, repetitions, base_seed, workers)
    if out_dir:
        _emit_sweep(store, out_dir, "sweep_mu.csv", "mu",
                    ["%g" % m for m in mus], labels, repetitions)
    return store


def _emit_sweep(store, out_dir, filename, name, values, labels, repetitions):
    os.makedirs(out_dir, exist_ok=True)
    pid = store.problem_ids()[0]
    s1 = store.samples("e1", expand_to=repetitions)
    s2 = store.samples("e2", expand_to=repetitions)
    w1 = win_matrix(s1, algorithms=labels, problems=[pid])
    w2 = win_matrix(s2, algorithms=labels, problems=[pid])
    rows = []
    for i, (value, label) in enumerate(zip(values, labels)):
        rows.append([value, median(s1[label][pid]), median(s2[label][pid]),
                     int(w1.row_sums()[i]), int(w2.row_sums()[i])])
    _write_csv(os.path.join(out_dir, filename),
               [name, "median_e1", "median_e2", "wins_e1", "wins_e2"], rows)
    emit_tables(store, out_dir, repetitions=repetitions)


def tune_command(kind="shepp-logan", side=32, alpha=6, meta_budget=1000,
                 inner_budget=1000, seed=0):
    """Hyper-parameter tuning entry point; returns (N, phi, delta)."""
    problem = build_problem(kind, side, alpha)
    return tune_dfo(problem, meta_budget, inner_budget=inner_budget, seed=seed)
