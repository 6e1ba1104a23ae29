"""Population-based reconstructors and the search-space expansion schedule.

The dispersive-flies update (ring neighbourhoods, elitism and
per-component uniform restarts), global/local PSO and DE/best/1 operate on
flattened image vectors inside a box [0, upper] that widens over the
evaluation budget.  A run is driven by run_optimizer; the step functions
mutate a SwarmState in place and are directly testable.
"""

import math
import time

import numpy as np

from . import _kernels
from .imaging import quantise
from .objective import reconstruction_error, reproduction_error

SQRT3 = math.sqrt(3.0)

# inertia/acceleration pair for the PSO variants
PSO_W = 0.729844
PSO_C = 1.49618

ALGORITHMS = ("dfo", "gpso", "lpso", "de")


class BoxSchedule:
    """Nested boxes [0, p/P * 255] switched at equal budget divisions.

    Box p (1-based) is active while the evaluation counter lies in
    ((p-1) * budget / P, p * budget / P]; the final box is the full range.
    """

    def __init__(self, num_boxes, budget, full_upper=255.0):
        if num_boxes < 1:
            raise ValueError("num_boxes must be >= 1")
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.num_boxes = int(num_boxes)
        self.budget = int(budget)
        self.full_upper = float(full_upper)

    def __repr__(self):
        return "BoxSchedule(num_boxes=%d, budget=%d, full_upper=%g)" % (
            self.num_boxes, self.budget, self.full_upper)


def active_box(schedule, fe):
    """Bounds (0, upper) of the box containing evaluation count fe."""
    if fe < 0 or fe > schedule.budget:
        raise ValueError("fe=%d outside [0, %d]" % (fe, schedule.budget))
    p = max(1, math.ceil(fe * schedule.num_boxes / schedule.budget))
    p = min(p, schedule.num_boxes)
    return 0.0, p * schedule.full_upper / schedule.num_boxes


class OptimizerConfig:
    """Algorithm choice plus every tunable the step functions read."""

    def __init__(self, algorithm="dfo", N=2, delta=0.001, phi=SQRT3,
                 w=PSO_W, c=PSO_C, F=0.5, CR=0.5,
                 budget=100_000, num_boxes=1, mu=0.0):
        if algorithm not in ALGORITHMS:
            raise ValueError("unknown algorithm: %r" % (algorithm,))
        if N < 2:
            raise ValueError("population size must be >= 2")
        if algorithm == "de" and N < 4:
            raise ValueError("de needs a population of >= 4")
        if not 0.0 <= delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        if not 0.0 <= phi <= SQRT3 + 1e-12:
            raise ValueError("phi must lie in [0, sqrt(3)]")
        if budget < N:
            raise ValueError("budget must cover at least one initialisation")
        if mu < 0:
            raise ValueError("mu must be >= 0")
        self.algorithm = algorithm
        self.N = int(N)
        self.delta = float(delta)
        self.phi = float(phi)
        self.w = float(w)
        self.c = float(c)
        self.F = float(F)
        self.CR = float(CR)
        self.budget = int(budget)
        self.num_boxes = int(num_boxes)
        self.mu = float(mu)

    def as_dict(self):
        return {
            "algorithm": self.algorithm, "N": self.N, "delta": self.delta,
            "phi": self.phi, "w": self.w, "c": self.c, "F": self.F,
            "CR": self.CR, "budget": self.budget,
            "num_boxes": self.num_boxes, "mu": self.mu,
        }


class SwarmState:
    """Mutable swarm for one run: positions, fitnesses and bookkeeping.

    Also carries the algorithm coefficients the step functions read
    (delta/phi for the flies, w/c for PSO, F/CR for DE).
    """

    def __init__(self, positions, fitnesses, rng, budget, fe_count=0,
                 velocities=None, pbest_positions=None, pbest_fitnesses=None,
                 delta=0.001, phi=SQRT3, w=PSO_W, c=PSO_C, F=0.5, CR=0.5):
        self.positions = positions
        self.fitnesses = fitnesses
        self.rng = rng
        self.budget = budget
        self.fe_count = fe_count
        self.velocities = velocities
        self.pbest_positions = pbest_positions
        self.pbest_fitnesses = pbest_fitnesses
        self.delta = delta
        self.phi = phi
        self.w = w
        self.c = c
        self.F = F
        self.CR = CR
        self.best_index = int(np.argmin(fitnesses))

    @property
    def N(self):
        return self.positions.shape[0]

    @property
    def n(self):
        return self.positions.shape[1]


def dfo_step(state, fitness, box):
    """One dispersive-flies generation inside box.

    Every particle except the current swarm best moves.  Per dimension,
    with probability delta the coordinate restarts uniformly in the box;
    otherwise it is attracted from its fitter ring neighbour towards the
    swarm best: n_d + phi * u1 * (g_d - x_d), u1 fresh per component.
    Moved particles are clamped and re-evaluated (N - 1 evaluations).
    Per moving particle the draws are: jump mask, then attraction
    multipliers, then one uniform per jumped component in ascending order.
    """
    cost = state.N - 1
    if state.fe_count + cost > state.budget:
        return state
    lo, hi = box
    old = state.positions.copy()
    fits = state.fitnesses
    best = state.best_index
    g = old[best]
    for i in range(state.N):
        if i == best:
            continue
        left = (i - 1) % state.N
        right = (i + 1) % state.N
        nb = old[left] if fits[left] <= fits[right] else old[right]
        jump = state.rng.random(state.n) < state.delta
        u1 = state.rng.random(state.n)
        new = nb + state.phi * u1 * (g - old[i])
        np.clip(new, lo, hi, out=new)
        k = int(jump.sum())
        if k:
            new[jump] = state.rng.uniform(lo, hi, k)
        state.positions[i] = new
    for i in range(state.N):
        if i == best:
            continue
        state.fitnesses[i] = fitness(state.positions[i])
    state.fe_count += cost
    state.best_index = int(np.argmin(state.fitnesses))
    return state


def pso_step(state, fitness, box, topology="global"):
    """One inertia-weight PSO generation inside box.

    v <- w v + c u1 (pbest - x) + c u2 (lbest - x), x <- x + v, with lbest
    the best personal best globally or over the ring {i-1, i, i+1}.
    Components pushed outside the box are placed on the boundary with that
    velocity component zeroed.  Costs N evaluations.
    """
    if topology not in ("global", "ring"):
        raise ValueError("unknown topology: %r" % (topology,))
    if state.fe_count + state.N > state.budget:
        return state
    lo, hi = box
    pb, pf = state.pbest_positions, state.pbest_fitnesses
    if topology == "global":
        gbest = pb[int(np.argmin(pf))]
        locals_ = [gbest] * state.N
    else:
        locals_ = []
        for i in range(state.N):
            ring = ((i - 1) % state.N, i, (i + 1) % state.N)
            locals_.append(pb[min(ring, key=lambda j: (pf[j], j))])
    for i in range(state.N):
        u1 = state.rng.random(state.n)
        u2 = state.rng.random(state.n)
        v = (state.w * state.velocities[i]
             + state.c * u1 * (pb[i] - state.positions[i])
             + state.c * u2 * (locals_[i] - state.positions[i]))
        x = state.positions[i] + v
        out = (x < lo) | (x > hi)
        if out.any():
            np.clip(x, lo, hi, out=x)
            v[out] = 0.0
        state.positions[i] = x
        state.velocities[i] = v
    for i in range(state.N):
        f = fitness(state.positions[i])
        state.fitnesses[i] = f
        if f < pf[i]:
            pf[i] = f
            pb[i] = state.positions[i].copy()
    state.fe_count += state.N
    state.best_index = int(np.argmin(pf))
    return state


def de_step(state, fitness, box):
    """One DE/best/1 generation with binomial crossover inside box.

    mutant = g + F (x_r1 - x_r2) with r1, r2 distinct and != i; the trial
    keeps mutant components where u < CR plus one forced component, is
    clamped, and replaces the parent only when strictly fitter.  Costs N
    evaluations.
    """
    if state.N < 4:
        raise ValueError("de needs a population of >= 4")
    if state.fe_count + state.N > state.budget:
        return state
    lo, hi = box
    old = state.positions.copy()
    g = old[state.best_index]
    trials = np.empty_like(old)
    for i in range(state.N):
        r1 = int(state.rng.integers(0, state.N - 1))
        if r1 >= i:
            r1 += 1
        r2 = int(state.rng.integers(0, state.N - 2))
        a, b = sorted((i, r1))
        if r2 >= a:
            r2 += 1
        if r2 >= b:
            r2 += 1
        jrand = int(state.rng.integers(0, state.n))
        cross = state.rng.random(state.n) < state.CR
        cross[jrand] = True
        mutant = g + state.F * (old[r1] - old[r2])
        trial = np.where(cross, mutant, old[i])
        np.clip(trial, lo, hi, out=trial)
        trials[i] = trial
    for i in range(state.N):
        f = fitness(trials[i])
        if f < state.fitnesses[i]:
            state.positions[i] = trials[i]
            state.fitnesses[i] = f
    state.fe_count += state.N
    state.best_index = int(np.argmin(state.fitnesses))
    return state


class RunRecord:
    """Outcome of one trial: final solution, error metrics and history."""

    def __init__(self, problem_id, algorithm_id, seed, config, best,
                 fitness, e1, e2, e2_quantised, history, fe_used, wall_time,
                 scale_mode="none", snapshots=None):
        self.problem_id = problem_id
        self.algorithm_id = algorithm_id
        self.seed = seed
        self.config = config
        self.best = best
        self.fitness = fitness
        self.e1 = e1
        self.e2 = e2
        self.e2_quantised = e2_quantised
        self.history = history
        self.fe_used = fe_used
        self.wall_time = wall_time
        self.scale_mode = scale_mode
        self.snapshots = snapshots or []

    def as_dict(self):
        """JSON-ready dict; snapshots are deliberately not serialised."""
        return {
            "problem_id": self.problem_id,
            "algorithm_id": self.algorithm_id,
            "seed": self.seed,
            "config": self.config,
            "best": [float(v) for v in self.best],
            "fitness": self.fitness,
            "e1": self.e1,
            "e2": self.e2,
            "e2_quantised": self.e2_quantised,
            "history": [[int(fe), float(f)] for fe, f in self.history],
            "fe_used": self.fe_used,
            "wall_time": self.wall_time,
            "scale_mode": self.scale_mode,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["problem_id"], d["algorithm_id"], d["seed"], d["config"],
                   np.asarray(d["best"], dtype=float), d["fitness"], d["e1"],
                   d["e2"], d["e2_quantised"],
                   [(fe, f) for fe, f in d["history"]],
                   d["fe_used"], d["wall_time"], d.get("scale_mode", "none"))


def _make_state(problem, config, rng, box, fitness):
    lo, hi = box
    positions = np.empty((config.N, problem.n))
    for i in range(config.N):
        positions[i] = rng.uniform(lo, hi, problem.n)
    fitnesses = np.array([fitness(positions[i]) for i in range(config.N)])
    state = SwarmState(positions, fitnesses, rng, config.budget,
                       fe_count=config.N, delta=config.delta, phi=config.phi,
                       w=config.w, c=config.c, F=config.F, CR=config.CR)
    if config.algorithm in ("gpso", "lpso"):
        state.velocities = np.zeros_like(positions)
        state.pbest_positions = positions.copy()
        state.pbest_fitnesses = fitnesses.copy()
    return state


def _best_of(state, algorithm):
    if algorithm in ("gpso", "lpso"):
        i = int(np.argmin(state.pbest_fitnesses))
        return state.pbest_positions[i].copy(), float(state.pbest_fitnesses[i])
    i = state.best_index
    return state.positions[i].copy(), float(state.fitnesses[i])


def _gens_until_event(fe, cost, schedule, next_mark, budget):
    """Whole generations until the next box switch or history mark."""
    window = schedule.budget / schedule.num_boxes
    p = max(1, math.ceil((fe + 1) * schedule.num_boxes / schedule.budget))
    stop = min(p * window, next_mark, budget)
    gens = max(1, int((stop - fe) // cost))
    if fe + gens * cost > budget:
        gens = (budget - fe) // cost
    return gens


def run_optimizer(problem, config, seed, engine="auto", snapshot_every=None):
    """Run one optimisation trial and return its RunRecord.

    Particles start uniformly inside the first scheduled box and persist
    across box expansions.  The fitness is the regularised error with
    config.mu (plain reconstruction error when mu is 0).  Deterministic
    for a fixed seed.  engine: "numba" (compiled dispersive-flies inner
    loop, default for dfo), "numpy" (pure step functions), or "auto".
    """
    if engine not in ("auto", "numpy", "numba"):
        raise ValueError("unknown engine: %r" % (engine,))
    if engine == "auto":
        engine = "numba" if config.algorithm == "dfo" else "numpy"
    if engine == "numba" and config.algorithm != "dfo":
        raise ValueError("the compiled engine only supports dfo")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    schedule = BoxSchedule(config.num_boxes, config.budget)
    A = problem.A

    def fitness(y):
        return _kernels.objective_value(A.data, A.indices, A.indptr,
                                        problem.b, y, config.mu,
                                        problem.width, problem.height)

    state = _make_state(problem, config, rng, active_box(schedule, 0), fitness)

    history = []
    next_mark = 1000
    snapshots = []
    next_snap = snapshot_every if snapshot_every else None

    def record_progress():
        nonlocal next_mark, next_snap
        best, fit = _best_of(state, config.algorithm)
        while next_mark <= state.fe_count:
            history.append((next_mark, fit))
            next_mark += 1000
        if next_snap is not None:
            while next_snap <= state.fe_count:
                snapshots.append((next_snap, best.copy()))
                next_snap += snapshot_every

    record_progress()
    cost = config.N - 1 if config.algorithm == "dfo" else config.N
    while state.fe_count + cost <= config.budget:
        box = active_box(schedule, min(state.fe_count + 1, config.budget))
        if engine == "numba" and snapshot_every is None:
            gens = _gens_until_event(state.fe_count, cost, schedule,
                                     next_mark, config.budget)
            state.best_index = int(_kernels.dfo_generations(
                state.positions, state.fitnesses, state.best_index, gens,
                config.delta, config.phi, box[0], box[1],
                A.data, A.indices, A.indptr, problem.b, config.mu,
                problem.width, problem.height, state.rng))
            state.fe_count += gens * cost
        elif config.algorithm == "dfo":
            dfo_step(state, fitness, box)
        elif config.algorithm == "gpso":
            pso_step(state, fitness, box, topology="global")
        elif config.algorithm == "lpso":
            pso_step(state, fitness, box, topology="ring")
        else:
            de_step(state, fitness, box)
        record_progress()

    best, fit = _best_of(state, config.algorithm)
    truth = problem.truth_vector()
    return RunRecord(
        problem_id=problem.problem_id,
        algorithm_id=config.algorithm,
        seed=seed,
        config=config.as_dict(),
        best=best,
        fitness=fit,
        e1=float(reconstruction_error(problem, best)),
        e2=float(reproduction_error(best, truth)),
        e2_quantised=float(reproduction_error(quantise(best), truth)),
        history=history,
        fe_used=state.fe_count,
        wall_time=time.perf_counter() - t0,
        snapshots=snapshots,
    )


DFO_TUNING_BOUNDS = ((2.0, 100.0), (0.0, SQRT3), (-4.0, -1.0))


def tune_dfo(problem, meta_budget, inner_budget=1000, seed=None,
             bounds=DFO_TUNING_BOUNDS, meta_population=10):
    """Hyper-parameter search for the dispersive-flies reconstructor.

    A meta-level dispersive-flies swarm explores (N, phi, log10 delta)
    over `bounds`; the meta-fitness of a triple is the final
    reconstruction error of one inner run with that configuration.  As the
    meta-fitness is stochastic, the incumbent best triple is re-evaluated
    every generation before the others move, so a generation costs
    meta_population evaluations.  Returns the final incumbent
    (N, phi, delta).
    """
    P = int(meta_population)
    if meta_budget < P:
        raise ValueError("meta_budget must cover one initialisation")
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    def decode(theta):
        return (max(2, int(round(theta[0]))),
                float(min(max(theta[1], 0.0), SQRT3)),
                float(min(10.0 ** theta[2], 1.0)))

    def meta_fitness(theta):
        N, phi, delta = decode(theta)
        # the inner run cannot initialise more particles than its budget
        config = OptimizerConfig(algorithm="dfo", N=min(N, inner_budget),
                                 phi=phi, delta=delta, budget=inner_budget,
                                 num_boxes=1, mu=0.0)
        inner_seed = int(rng.integers(0, 2 ** 63 - 1))
        return run_optimizer(problem, config, inner_seed).e1

    thetas = np.array([rng.uniform(lo, hi) for _ in range(P)])
    fits = np.array([meta_fitness(t) for t in thetas])
    fe = P
    best = int(np.argmin(fits))
    while fe + P <= meta_budget:
        # counter inner-run noise: refresh the incumbent's score
        fits[best] = meta_fitness(thetas[best])
        fe += 1
        old = thetas.copy()
        g = old[best]
        for i in range(P):
            if i == best:
                continue
            left = (i - 1) % P
            right = (i + 1) % P
            nb = old[left] if fits[left] <= fits[right] else old[right]
            jump = rng.random(3) < 0.001
            u1 = rng.random(3)
            new = nb + u1 * (g - old[i])
            np.clip(new, lo, hi, out=new)
            if jump.any():
                new[jump] = rng.uniform(lo[jump], hi[jump])
            thetas[i] = new
        for i in range(P):
            if i == best:
                continue
            fits[i] = meta_fitness(thetas[i])
            fe += 1
        best = int(np.argmin(fits))
    return decode(thetas[best])
