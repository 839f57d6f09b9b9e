"""Convex objectives with analytic gradients and optimality metadata.

An Objective bundles the function and gradient callables with what is
known about its minimum: the optimal value and the argmin set, an
optional Holder error bound certificate, a strong convexity modulus,
and an evenness flag. The certificate checks at the bottom of the
module sample the claimed inequalities rather than trusting the
metadata.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError, UnsupportedObjectiveError
from .geometry import Ball, Box, ConvexSet, as_point, distance


@dataclass(frozen=True)
class HolderErrorBound:
    """Certificate for (f(x) - f_star)^theta >= kappa * dist(x, argmin)."""

    kappa: float
    theta: float

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise InvalidInputError("kappa must be positive and finite")
        if not (0 < self.theta <= 1):
            raise InvalidInputError("theta must lie in (0, 1]")


@dataclass(frozen=True)
class Desingularizer:
    """phi(s) = s^theta / (kappa * theta), increasing and concave on (0, inf)."""

    kappa: float
    theta: float

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise InvalidInputError("kappa must be positive and finite")
        if not (0 < self.theta <= 1):
            raise InvalidInputError("theta must lie in (0, 1]")

    def value(self, s: float) -> float:
        if s < 0:
            raise InvalidInputError("desingularizer argument must be >= 0")
        if s == 0.0:
            return 0.0
        return s**self.theta / (self.kappa * self.theta)

    def derivative(self, s: float) -> float:
        if s <= 0:
            raise InvalidInputError("desingularizer derivative needs s > 0")
        return s ** (self.theta - 1.0) / self.kappa


@dataclass(frozen=True)
class Optimum:
    """Known minimum: optimal value plus the argmin described as a set."""

    f_star: float
    argmin: ConvexSet


@dataclass(frozen=True)
class Objective:
    fn: Callable[[np.ndarray], float]
    grad_fn: Callable[[np.ndarray], np.ndarray]
    dim: int
    name: str = "objective"
    optimum: Optional[Optimum] = None
    holder: Optional[HolderErrorBound] = None
    strong_convexity: Optional[float] = None
    is_even: bool = False

    def value(self, x) -> float:
        p = as_point(x, self.dim)
        v = float(self.fn(p))
        if not np.isfinite(v):
            raise InvalidInputError("objective evaluated to a non-finite value")
        return v

    def grad(self, x) -> np.ndarray:
        p = as_point(x, self.dim)
        g = np.asarray(self.grad_fn(p), dtype=float)
        if g.shape != (self.dim,):
            raise InvalidInputError(f"gradient has shape {g.shape}, expected ({self.dim},)")
        if not np.all(np.isfinite(g)):
            raise InvalidInputError("gradient has non-finite components")
        return g

    def __call__(self, x) -> float:
        return self.value(x)

    def gap(self, x) -> float:
        """f(x) - f_star. Needs optimum metadata."""
        if self.optimum is None:
            raise UnsupportedObjectiveError(f"{self.name}: no known optimum")
        return self.value(x) - self.optimum.f_star


def grad_check(obj: Objective, x, h: float = 1e-5) -> float:
    """Worst safeguarded relative error of the analytic gradient against
    central finite differences, componentwise."""
    if h <= 0:
        raise InvalidInputError("step h must be positive")
    p = as_point(x, obj.dim)
    g = obj.grad(p)
    worst = 0.0
    for i in range(obj.dim):
        e = np.zeros(obj.dim)
        e[i] = h
        fd = (obj.fn(p + e) - obj.fn(p - e)) / (2.0 * h)
        err = abs(g[i] - fd) / max(1.0, abs(g[i]), abs(fd))
        worst = max(worst, err)
    return worst


def singleton(point) -> Box:
    """Degenerate box {p}: the cleanest descriptor for a point argmin."""
    p = as_point(point)
    return Box(p, p)


def quadratic(center, diag=None, shift: float = 0.0, name: str | None = None) -> Objective:
    """f(x) = sum_i d_i (x_i - a_i)^2 + shift with every d_i > 0.

    Strongly convex with modulus 2*min(d); certificate kappa is
    sqrt(min(d)) at theta = 1/2, which the anisotropy makes tight.
    """
    a = as_point(center)
    d = np.ones(a.size) if diag is None else as_point(diag, a.size)
    if np.any(d <= 0):
        raise InvalidInputError("diagonal weights must all be positive")
    shift = float(shift)
    if not np.isfinite(shift):
        raise InvalidInputError("shift must be finite")

    def fn(x, a=a, d=d, shift=shift):
        r = x - a
        return float(d @ (r * r)) + shift

    def grad_fn(x, a=a, d=d):
        return 2.0 * d * (x - a)

    dmin = float(np.min(d))
    return Objective(
        fn=fn,
        grad_fn=grad_fn,
        dim=a.size,
        name=name or "quadratic",
        optimum=Optimum(f_star=shift, argmin=singleton(a)),
        holder=HolderErrorBound(kappa=np.sqrt(dmin), theta=0.5),
        strong_convexity=2.0 * dmin,
        is_even=bool(np.all(a == 0.0)),
    )


def even_quartic(dim: int) -> Objective:
    """f(x) = ||x||^4 + ||x||^2: even, strongly convex, minimum 0 at the origin."""
    if dim < 1:
        raise InvalidInputError("dim must be a positive integer")

    def fn(x):
        s = float(x @ x)
        return s * s + s

    def grad_fn(x):
        return (4.0 * float(x @ x) + 2.0) * x

    return Objective(
        fn=fn,
        grad_fn=grad_fn,
        dim=int(dim),
        name="even_quartic",
        optimum=Optimum(f_star=0.0, argmin=singleton(np.zeros(dim))),
        holder=HolderErrorBound(kappa=1.0, theta=0.5),
        strong_convexity=2.0,
        is_even=True,
    )


def flat_bottom(center, rho: float) -> Objective:
    """f(x) = max(0, ||x - a|| - rho)^2, the squared distance to Ball(a, rho).

    The whole ball is the argmin, so this is the stock example of a
    minimizer set with interior. Not strongly convex: flat inside the ball.
    The bound (f)^{1/2} = dist(x, Ball(a, rho)) holds with equality, so
    kappa = 1 at theta = 1/2 is exact.
    """
    a = as_point(center)
    rho = float(rho)
    if not np.isfinite(rho) or rho <= 0:
        raise InvalidInputError("rho must be positive and finite")
    ball = Ball(a, rho)

    def fn(x, a=a, rho=rho):
        r = float(np.linalg.norm(x - a))
        excess = r - rho
        return excess * excess if excess > 0.0 else 0.0

    def grad_fn(x, a=a, rho=rho):
        d = x - a
        r = float(np.linalg.norm(d))
        if r <= rho:
            return np.zeros_like(d)
        return (2.0 * (r - rho) / r) * d

    return Objective(
        fn=fn,
        grad_fn=grad_fn,
        dim=a.size,
        name="flat_bottom",
        optimum=Optimum(f_star=0.0, argmin=ball),
        holder=HolderErrorBound(kappa=1.0, theta=0.5),
        strong_convexity=None,
        is_even=bool(np.all(a == 0.0)),
    )


def make_power_objective(g: Objective, theta: float) -> Objective:
    """Raise a nonnegative strongly convex objective to the power 1/(2*theta).

    Returns h = g^{1/(2 theta)} with the chain-rule gradient, defined as the
    zero vector wherever g vanishes (the correct C^1 extension since the
    exponent exceeds 1). h inherits g's argmin and carries the certificate
    kappa = sqrt(m/2) at the requested theta, m being g's modulus.
    """
    if not (0 < theta <= 0.5):
        raise InvalidInputError("theta must lie in (0, 1/2]")
    if g.strong_convexity is None:
        raise UnsupportedObjectiveError(f"{g.name}: strong convexity modulus not set")
    if g.optimum is None:
        raise UnsupportedObjectiveError(f"{g.name}: optimum metadata required")
    if g.optimum.f_star < 0:
        raise InvalidInputError("base objective must be nonnegative")
    p = 1.0 / (2.0 * theta)

    def fn(x, base=g.fn, p=p):
        return float(base(x)) ** p

    def grad_fn(x, base=g.fn, base_grad=g.grad_fn, p=p):
        gv = float(base(x))
        if gv == 0.0:
            return np.zeros(x.size)
        return (p * gv ** (p - 1.0)) * base_grad(x)

    m = g.strong_convexity
    return Objective(
        fn=fn,
        grad_fn=grad_fn,
        dim=g.dim,
        name=f"{g.name}^{p:g}",
        optimum=Optimum(f_star=g.optimum.f_star**p, argmin=g.optimum.argmin),
        holder=HolderErrorBound(kappa=float(np.sqrt(m / 2.0)), theta=theta),
        strong_convexity=m if p == 1.0 else None,
        is_even=g.is_even,
    )


GAP_FLOOR = 1e-14  # below this the bound ratios are 0/0 noise


def gheb_check(obj: Objective, domain: ConvexSet, samples) -> float:
    """Smallest sampled value of (f(x) - f_star)^theta / dist(x, argmin).

    The certificate holds when the return value is at least
    kappa * (1 - 1e-6). Samples at or below the gap floor are skipped:
    the inequality says nothing on the argmin set itself.
    """
    if obj.optimum is None or obj.holder is None:
        raise UnsupportedObjectiveError(f"{obj.name}: needs optimum and bound certificate")
    theta = obj.holder.theta
    f_star = obj.optimum.f_star
    argmin = obj.optimum.argmin
    worst = np.inf
    for x in np.atleast_2d(np.asarray(samples, dtype=float)):
        pt = as_point(x, obj.dim)
        if domain.residual(pt) > 1e-9:
            raise InvalidInputError("sample lies outside the domain")
        gap = obj.value(pt) - f_star
        if gap <= GAP_FLOOR:
            continue
        dist = distance(argmin, pt)
        if dist == 0.0:
            continue
        worst = min(worst, gap**theta / dist)
    if worst == np.inf:
        raise InvalidInputError("no sample had a positive objective gap")
    return float(worst)


def lojasiewicz_check(obj: Objective, phi: Desingularizer, samples) -> float:
    """Smallest sampled value of phi'(f(x) - f_star) * ||grad f(x)||.

    The inequality passes when the return value is >= 1 - 1e-6.
    """
    if obj.optimum is None:
        raise UnsupportedObjectiveError(f"{obj.name}: needs optimum metadata")
    f_star = obj.optimum.f_star
    worst = np.inf
    for x in np.atleast_2d(np.asarray(samples, dtype=float)):
        pt = as_point(x, obj.dim)
        gap = obj.value(pt) - f_star
        if gap <= GAP_FLOOR:
            continue
        worst = min(worst, phi.derivative(gap) * float(np.linalg.norm(obj.grad(pt))))
    if worst == np.inf:
        raise InvalidInputError("no sample had a positive objective gap")
    return float(worst)
