"""Integration of the projected gradient flow and its relatives.

Four systems share the Trajectory record:

- "projected":  x' + x = P(x - lambda(t) grad f(x)), the constrained flow
- "scaled":     x' = -lambda(t) grad f(x), unconstrained, schedule-driven
- "unscaled":   y' = -grad f(y), unconstrained, unit clock
- "discrete":   x_{k+1} = P(x_k - a_k grad f(x_k)), the classical iteration

Continuous systems integrate with fixed-step classic Runge-Kutta. The
exact projected flow never leaves the feasible set, but a numerical
step can; after every accepted step the state is re-projected and the
pre-projection residual is recorded as feas_drift so the correction
stays observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DivergenceError, InvalidInputError
from .geometry import ConvexSet, WholeSpace, as_point, distance
from .objectives import Objective
from .schedules import Schedule

SYSTEMS = ("projected", "scaled", "unscaled", "discrete")

DIVERGENCE_NORM = 1e12
DEFAULT_STEP = 1e-3
DEFAULT_HORIZON = 50.0
DEFAULT_SAMPLE_EVERY = 0.1

BEST_SEEN = "best-seen (diagnostic-only)"
ANALYTIC = "analytic"


@dataclass(eq=False)
class FlowProblem:
    domain: ConvexSet
    objective: Objective
    schedule: Optional[Schedule]
    x0: np.ndarray
    system: str = "projected"

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise InvalidInputError(f"unknown system {self.system!r}, expected one of {SYSTEMS}")
        self.x0 = as_point(self.x0, self.objective.dim)
        if self.domain.dim is not None and self.domain.dim != self.x0.size:
            raise InvalidInputError("domain and starting point dimensions differ")
        if self.system in ("projected", "discrete"):
            if self.domain.residual(self.x0) > 1e-12:
                raise InvalidInputError("starting point must lie in the feasible set")
        if self.system in ("scaled", "unscaled") and not isinstance(self.domain, WholeSpace):
            raise InvalidInputError(f"the {self.system} system is unconstrained; use WholeSpace")
        if self.system != "discrete" and self.schedule is None and self.system != "unscaled":
            raise InvalidInputError(f"the {self.system} system needs a schedule")


@dataclass(eq=False)
class Trajectory:
    """Sampled run: row k holds the state and diagnostics at time t[k]."""

    t: np.ndarray
    x: np.ndarray
    f_gap: np.ndarray
    gamma: np.ndarray
    feas_drift: np.ndarray
    speed: np.ndarray
    dist_argmin: Optional[np.ndarray]
    problem: FlowProblem
    f_star_source: str = ANALYTIC

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    def __len__(self) -> int:
        return self.t.size


def _rhs_factory(problem: FlowProblem):
    grad = problem.objective.grad_fn
    if problem.system == "projected":
        lam = problem.schedule.value
        proj = problem.domain._project

        def F(t, x):
            return proj(x - lam(t) * grad(x)) - x

    elif problem.system == "scaled":
        lam = problem.schedule.value

        def F(t, x):
            return -lam(t) * grad(x)

    elif problem.system == "unscaled":

        def F(t, x):
            return -grad(x)

    else:
        raise InvalidInputError("the discrete system has no right-hand side; use discrete_run")
    return F


def rhs(problem: FlowProblem, t: float, x) -> np.ndarray:
    """Vector field of the chosen continuous system at (t, x)."""
    if t < 0:
        raise InvalidInputError("time must be >= 0")
    p = as_point(x, problem.objective.dim)
    return _rhs_factory(problem)(float(t), p)


def _sample_grid(horizon: float, sample_every: float) -> np.ndarray:
    n_full = int(math.floor(horizon / sample_every + 1e-9))
    times = [k * sample_every for k in range(n_full + 1)]
    if horizon - times[-1] > 1e-9 * max(1.0, horizon):
        times.append(horizon)
    else:
        times[-1] = horizon
    return np.asarray(times)


def integrate(
    problem: FlowProblem,
    horizon: float = DEFAULT_HORIZON,
    step: float = DEFAULT_STEP,
    sample_every: float = DEFAULT_SAMPLE_EVERY,
) -> Trajectory:
    """Run classic fixed-step RK4 up to ``horizon``.

    Samples land on multiples of ``sample_every`` plus t=0 and t=horizon;
    each inter-sample segment is subdivided into equal substeps no larger
    than ``step``. Raises DivergenceError, carrying the failure time, as
    soon as the state norm passes 1e12 or stops being finite.
    """
    if problem.system == "discrete":
        raise InvalidInputError("use discrete_run for the discrete system")
    if not (np.isfinite(horizon) and horizon > 0):
        raise InvalidInputError("horizon must be positive and finite")
    if not (0 < step <= sample_every):
        raise InvalidInputError("need 0 < step <= sample_every")

    F = _rhs_factory(problem)
    projected = problem.system == "projected"
    resid = problem.domain._residual
    proj = problem.domain._project
    guard_sq = DIVERGENCE_NORM * DIVERGENCE_NORM

    sample_times = _sample_grid(horizon, sample_every)
    x = problem.x0.copy()
    states = [x.copy()]
    drifts = [0.0]

    with np.errstate(over="ignore", invalid="ignore"):
        t0 = 0.0
        for t1 in sample_times[1:]:
            span = t1 - t0
            n_sub = max(1, math.ceil(span / step - 1e-12))
            h = span / n_sub
            drift = 0.0
            for i in range(n_sub):
                t = t0 + i * h
                k1 = F(t, x)
                k2 = F(t + 0.5 * h, x + (0.5 * h) * k1)
                k3 = F(t + 0.5 * h, x + (0.5 * h) * k2)
                k4 = F(t + h, x + h * k3)
                x = x + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
                ss = float(x @ x)
                if not math.isfinite(ss) or ss > guard_sq:
                    raise DivergenceError(
                        f"state norm left the trust region near t = {t + h:.6g}", time=t + h
                    )
                if projected:
                    drift = resid(x)
                    if drift > 0.0:
                        x = proj(x)
            states.append(x.copy())
            drifts.append(drift)
            t0 = t1

    return _assemble(problem, sample_times, states, drifts, F)


def _assemble(problem, times, states, drifts, F) -> Trajectory:
    obj = problem.objective
    xs = np.vstack(states)
    fvals = np.array([obj.fn(s) for s in states], dtype=float)
    if obj.optimum is not None:
        f_star = obj.optimum.f_star
        source = ANALYTIC
        dist_argmin = np.array([distance(obj.optimum.argmin, s) for s in states])
    else:
        f_star = float(np.min(fvals))
        source = BEST_SEEN
        dist_argmin = None
    if problem.schedule is not None:
        gamma = np.array([problem.schedule.gamma(t) for t in times])
    else:
        gamma = np.array([float(t) for t in times])
    speed = np.array([float(np.linalg.norm(F(float(t), s))) for t, s in zip(times, states)])
    return Trajectory(
        t=np.asarray(times, dtype=float),
        x=xs,
        f_gap=fvals - f_star,
        gamma=gamma,
        feas_drift=np.asarray(drifts, dtype=float),
        speed=speed,
        dist_argmin=dist_argmin,
        problem=problem,
        f_star_source=source,
    )


def discrete_run(domain: ConvexSet, objective: Objective, steps, x0) -> Trajectory:
    """Iterate x_{k+1} = P(x_k - a_k grad f(x_k)), one sample per iterate.

    Sample times are the iteration indices and gamma accumulates the step
    sizes, mirroring the continuous clock. Zero steps are allowed (they
    leave the iterate in place); negative steps are not.
    """
    a = np.atleast_1d(np.asarray(steps, dtype=float))
    if a.size == 0:
        raise InvalidInputError("need at least one step size")
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise InvalidInputError("step sizes must be finite and >= 0")
    problem = FlowProblem(domain=domain, objective=objective, schedule=None, x0=x0, system="discrete")

    grad = objective.grad_fn
    proj = domain._project
    x = problem.x0.copy()
    states = [x.copy()]
    for ak in a:
        x = np.array(proj(x - ak * grad(x)), dtype=float)
        ss = float(x @ x)
        if not math.isfinite(ss) or ss > DIVERGENCE_NORM**2:
            raise DivergenceError(
                f"iterate norm left the trust region at k = {len(states)}", time=float(len(states))
            )
        states.append(x)

    times = np.arange(a.size + 1, dtype=float)
    xs = np.vstack(states)
    fvals = np.array([objective.fn(s) for s in states])
    if objective.optimum is not None:
        f_star = objective.optimum.f_star
        source = ANALYTIC
        dist_argmin = np.array([distance(objective.optimum.argmin, s) for s in states])
    else:
        f_star = float(np.min(fvals))
        source = BEST_SEEN
        dist_argmin = None
    gamma = np.concatenate([[0.0], np.cumsum(a)])
    disp = np.linalg.norm(np.diff(xs, axis=0), axis=1)
    speed = np.concatenate([[0.0], disp])
    return Trajectory(
        t=times,
        x=xs,
        f_gap=fvals - f_star,
        gamma=gamma,
        feas_drift=np.zeros(times.size),
        speed=speed,
        dist_argmin=dist_argmin,
        problem=problem,
        f_star_source=source,
    )


def reparam_check(
    objective: Objective,
    schedule: Schedule,
    x0,
    horizon: float = 10.0,
    step: float = DEFAULT_STEP,
) -> float:
    """Largest gap between the scaled flow and the unscaled flow on the
    rescaled clock.

    Integrates x' = -lambda(t) grad f(x) up to ``horizon`` and
    y' = -grad f(y) up to gamma(horizon), then compares x(t) with
    y(gamma(t)) at every sample of the scaled run, interpolating the
    densely sampled unscaled trajectory. The two are the same curve up
    to integrator and interpolation error.
    """
    space = WholeSpace(as_point(x0).size)
    scaled = integrate(
        FlowProblem(space, objective, schedule, x0, system="scaled"),
        horizon=horizon,
        step=step,
        sample_every=max(step, horizon / 500.0),
    )
    g_end = schedule.gamma(horizon)
    if g_end <= 0:
        raise InvalidInputError("schedule accumulates no time over the horizon")
    unscaled = integrate(
        FlowProblem(space, objective, None, x0, system="unscaled"),
        horizon=g_end,
        step=min(step, g_end / 10.0),
        sample_every=min(step, g_end / 10.0),
    )
    worst = 0.0
    for k, t in enumerate(scaled.t):
        g = schedule.gamma(float(t))
        y = np.array([np.interp(g, unscaled.t, unscaled.x[:, j]) for j in range(unscaled.x.shape[1])])
        worst = max(worst, float(np.linalg.norm(scaled.x[k] - y)))
    return worst


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Trajectory CSV: t,gamma,f_gap,dist_argmin,feas_drift,speed,x_0..x_{n-1}.

    Floats are written with repr so identical runs produce byte-identical
    files. dist_argmin is left empty when the objective has no argmin
    metadata.
    """
    dim = traj.x.shape[1]
    header = ["t", "gamma", "f_gap", "dist_argmin", "feas_drift", "speed"]
    header += [f"x_{j}" for j in range(dim)]
    lines = [",".join(header)]
    for k in range(len(traj)):
        da = "" if traj.dist_argmin is None else repr(float(traj.dist_argmin[k]))
        row = [
            repr(float(traj.t[k])),
            repr(float(traj.gamma[k])),
            repr(float(traj.f_gap[k])),
            da,
            repr(float(traj.feas_drift[k])),
            repr(float(traj.speed[k])),
        ]
        row += [repr(float(v)) for v in traj.x[k]]
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
