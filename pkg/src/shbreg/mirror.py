"""Dual (mirror-descent style) heavy-ball iteration with convex regularizers.

When the sought solution carries structure that a plain least-norm iterate
cannot express, the momentum iteration is run on a dual variable xi and the
primal iterate is read off through the mirror map x = grad R*(xi) of a
strongly convex regularizer R.  Two regularizers are provided:

* entropy on the probability simplex: R is the negative Boltzmann-Shannon
  entropy restricted to densities with unit integral (strong convexity
  modulus 1/2); the mirror map is the normalized exponential, so every
  iterate automatically is a strictly positive density;
* quadratic around a center x0 in the weighted geometry (modulus 1), whose
  mirror map is the shift x0 + xi, which reduces the dual iteration exactly
  to the primal momentum iteration started at x0.

Progress toward the truth is measured with the Bregman distance of R.
"""

import math

import numpy as np
from dataclasses import dataclass

from .solvers import _data_vector, index_stream, resolve_base_steps, step_coefficients

__all__ = [
    "Regularizer",
    "mirror_map",
    "DualState",
    "dual_step",
    "bregman_distance",
    "rate_envelope",
    "run_mirror",
]


@dataclass(frozen=True)
class Regularizer:
    """A strongly convex penalty with a closed-form mirror map.

    ``mu`` is the strong-convexity modulus that step-size budgets are checked
    against: base steps of the dual iteration must stay below
    ``2 * mu / ||A||^2``.
    """

    kind: str
    grid: object
    mu: float
    x0: np.ndarray = None

    def __post_init__(self):
        if self.kind not in ("entropy_simplex", "quadratic"):
            raise ValueError("regularizer kind must be 'entropy_simplex' or 'quadratic'")
        if self.mu <= 0:
            raise ValueError("strong-convexity modulus must be positive")
        if self.kind == "quadratic":
            if self.x0 is None:
                raise ValueError("quadratic regularizers need a center")
            center = np.array(self.x0, dtype=float)
            if center.shape != self.grid.nodes.shape:
                raise ValueError("center must be sampled on the grid")
            center.setflags(write=False)
            object.__setattr__(self, "x0", center)

    @classmethod
    def entropy_on_simplex(cls, grid):
        """Negative entropy restricted to unit-integral densities on ``grid``."""
        return cls(kind="entropy_simplex", grid=grid, mu=0.5)

    @classmethod
    def quadratic(cls, grid, x0):
        """Half squared weighted distance to the center ``x0``."""
        return cls(kind="quadratic", grid=grid, mu=1.0, x0=x0)


def mirror_map(reg, xi):
    """Primal iterate induced by a dual variable: x = grad R*(xi).

    Entropy case: exp(xi) normalized by its quadrature integral, evaluated
    with a max shift so large dual variables cannot overflow (the shift
    cancels in the normalization).  Quadratic case: the center plus xi.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != reg.grid.nodes.shape:
        raise ValueError("dual variable must be sampled on the grid")
    if reg.kind == "quadratic":
        return reg.x0 + xi
    shifted = np.exp(xi - xi.max())
    return shifted / reg.grid.integrate(shifted)


@dataclass(frozen=True)
class DualState:
    """Dual iterate pair and the primal read-out x = grad R*(xi_cur)."""

    xi_cur: np.ndarray
    xi_prev: np.ndarray
    x: np.ndarray
    n: int

    @classmethod
    def start(cls, reg):
        zero = np.zeros(reg.grid.m)
        return cls(xi_cur=zero, xi_prev=zero.copy(), x=mirror_map(reg, zero), n=0)


def dual_step(state, reg, row, y_i, eta):
    """One heavy-ball step on the dual variable, then refresh the primal."""
    if eta < 0:
        raise ValueError("step size must be nonnegative")
    alpha, beta = step_coefficients(state.n)
    residual = row.apply(state.x) - y_i
    xi_new = state.xi_cur - alpha * eta * residual * row.kernel_row \
        + beta * (state.xi_cur - state.xi_prev)
    return DualState(xi_cur=xi_new, xi_prev=state.xi_cur, x=mirror_map(reg, xi_new),
                     n=state.n + 1)


def bregman_distance(reg, x_bar, x):
    """Bregman distance D(x_bar, x) of the regularizer.

    Entropy case: the Kullback-Leibler form, the quadrature of
    ``x_bar * log(x_bar / x)`` with the convention 0 log 0 = 0; a node where
    ``x`` vanishes but ``x_bar`` does not makes the distance infinite.
    Quadratic case: half the squared weighted distance.
    """
    x_bar = np.asarray(x_bar, dtype=float)
    x = np.asarray(x, dtype=float)
    if reg.kind == "quadratic":
        return 0.5 * reg.grid.norm_sq(x_bar - x)
    carrying = x_bar > 0
    if np.any(carrying & (x <= 0)):
        return math.inf
    integrand = np.zeros_like(x_bar)
    integrand[carrying] = x_bar[carrying] * (np.log(x_bar[carrying]) - np.log(x[carrying]))
    return reg.grid.integrate(integrand)


def rate_envelope(n, p, total_level, m0):
    """Shape of the noisy-data error bound for the dual iteration.

    Returns ``p * m0 / (n+1) + (n+1) * delta^2 / p + delta^2``; the bound is
    this envelope times an instance constant, so checks fit the constant
    rather than hardcode it.  With ``n + 1`` of order ``p / delta`` the
    envelope is O(delta).
    """
    if n < 0:
        raise ValueError("step index must be nonnegative")
    return p * m0 / (n + 1.0) + (n + 1.0) * total_level**2 / p + total_level**2


def run_mirror(problem, data, reg, policy, n_iters, seed=0, observer=None, index_path=None):
    """Drive the dual iteration for ``n_iters`` random-row steps.

    The same contract as :func:`shbreg.solvers.run` (observer at every
    iterate including n = 0 on a live buffer, replayable ``index_path``,
    deterministic given the seed), with the dual update carried in
    moving-average form and the primal refreshed through the mirror map
    after every step.  Full-scope constant policies are checked against the
    admissible budget ``mu0 < 2 * mu``; row-scope policies are accepted
    unchecked, which is how the quadratic regularizer reproduces the primal
    solver on its own per-row steps.
    """
    if n_iters < 0:
        raise ValueError("iteration count must be nonnegative")
    if reg.grid is not problem.grid:
        raise ValueError("regularizer and problem must share the grid")
    if policy.norm_scope == "full" and policy.mu0 >= 2 * reg.mu:
        raise ValueError("dual steps need mu0 < 2 * mu for this regularizer")
    y = _data_vector(problem, data)
    bundle = problem.bundle
    base = resolve_base_steps(policy, bundle)
    if index_path is None:
        idx = index_stream(seed, bundle.p, n_iters)
    else:
        idx = np.asarray(index_path, dtype=np.intp)
        if idx.size and (idx.min() < 0 or idx.max() >= bundle.p):
            raise ValueError("index path entries must lie in [0, p)")
        n_iters = idx.size
    gate = policy.is_discrepancy
    if gate:
        levels = policy.per_eq_levels
        tau = policy.tau
    K = bundle.kernel_matrix
    Kw = bundle.weighted_kernel_matrix

    xi = np.zeros(problem.m)
    zeta = np.zeros(problem.m)
    x = mirror_map(reg, xi)

    collected = []

    def emit(n, current):
        if observer is None:
            collected.append(current.copy())
        else:
            value = observer(n, current)
            if value is not None:
                collected.append(value)

    emit(0, x)
    for n in range(n_iters):
        i = idx[n]
        residual = Kw[i] @ x - y[i]
        eta = base[i]
        if gate and abs(residual) <= tau * levels[i]:
            eta = 0.0
        if eta != 0.0:
            zeta = zeta - (eta * residual) * K[i]
        xi = ((n + 1.0) * xi + zeta) / (n + 2.0)
        x = mirror_map(reg, xi)
        emit(n + 1, x)
    return collected
