"""Row-action solvers with heavy-ball momentum for ill-posed linear systems.

One iteration touches a single randomly drawn equation.  The momentum
iteration

    x_{n+1} = x_n - alpha_n * eta_i * A_i^*(A_i x_n - y_i) + beta_n (x_n - x_{n-1})

with alpha_n = 1/(n+2) and beta_n = n/(n+2) admits an equivalent
moving-average form

    z_{n+1} = z_n - eta_i * A_i^*(A_i x_n - y_i),
    x_{n+1} = ((n+1) x_n + z_{n+1}) / (n+2),

which is the production path here (z accumulates the corrections, x is a
running average of itself and z).  Setting alpha_n = 1, beta_n = 0 recovers
plain stochastic gradient steps.  Regularization comes from stopping early:
an a-priori rule maps the noise level to an iteration budget, and a
discrepancy-principle step-size rule freezes updates on equations whose
residual has dropped to the noise floor.
"""

import math

import numpy as np
from dataclasses import dataclass

__all__ = [
    "step_coefficients",
    "StepPolicy",
    "resolve_base_steps",
    "step_size",
    "SolverState",
    "shb_step_ima",
    "shb_step_twostep",
    "sgd_step",
    "index_stream",
    "run",
    "a_priori_stop",
    "RateConstants",
    "stability_bound",
    "rate_bound",
]

VARIANTS = ("shb", "sgd")


def step_coefficients(n):
    """Momentum schedule (alpha_n, beta_n) = (1/(n+2), n/(n+2)) at step ``n``."""
    if n < 0:
        raise ValueError("step index must be nonnegative")
    return 1.0 / (n + 2), n / (n + 2.0)


@dataclass(frozen=True)
class StepPolicy:
    """Step-size rule: constant, or gated by the discrepancy principle.

    The base step for equation i is ``mu0`` divided by a squared operator
    norm: the row's own norm when ``norm_scope == "row"``, the full bundle
    norm when ``norm_scope == "full"`` (the scope a solver needs is resolved
    when a run is set up).  A discrepancy policy additionally zeroes the step
    whenever the drawn equation's residual is at or below ``tau`` times its
    noise level, so converged equations stop injecting noise.
    """

    kind: str
    mu0: float
    tau: float = None
    per_eq_levels: np.ndarray = None
    norm_scope: str = "row"

    def __post_init__(self):
        if self.kind not in ("constant", "discrepancy"):
            raise ValueError("policy kind must be 'constant' or 'discrepancy'")
        if self.norm_scope not in ("row", "full"):
            raise ValueError("norm scope must be 'row' or 'full'")
        if not (self.mu0 > 0 and math.isfinite(self.mu0)):
            raise ValueError("mu0 must be positive and finite")
        if self.kind == "discrepancy":
            if self.tau is None or self.tau < 1:
                raise ValueError("discrepancy policies need tau >= 1")
            if self.per_eq_levels is None:
                raise ValueError("discrepancy policies need per-equation noise levels")
            levels = np.array(self.per_eq_levels, dtype=float)
            if np.any(levels < 0):
                raise ValueError("noise levels must be nonnegative")
            levels.setflags(write=False)
            object.__setattr__(self, "per_eq_levels", levels)

    @classmethod
    def constant(cls, mu0, norm_scope="row"):
        return cls(kind="constant", mu0=mu0, norm_scope=norm_scope)

    @classmethod
    def discrepancy(cls, mu0, tau, per_eq_levels, norm_scope="row"):
        return cls(kind="discrepancy", mu0=mu0, tau=tau, per_eq_levels=per_eq_levels,
                   norm_scope=norm_scope)

    @property
    def is_discrepancy(self):
        return self.kind == "discrepancy"


def resolve_base_steps(policy, bundle):
    """Per-equation base steps of ``policy`` against a concrete bundle."""
    if policy.norm_scope == "row":
        norms = bundle.row_norms_sq
        if np.any(norms == 0):
            raise ValueError("cannot form a step size for a zero row")
        return policy.mu0 / norms
    return np.full(bundle.p, policy.mu0 / bundle.full_norm_sq)


def step_size(policy, row_index, row, residual_abs, full_norm_sq=None):
    """Step size for one drawn equation.

    Constant policies always return the base step; discrepancy policies
    return it only while ``residual_abs`` exceeds ``tau`` times the
    equation's noise level, and 0 otherwise.  ``full_norm_sq`` must be
    supplied for full-scope policies, which divide by the bundle norm
    instead of the row norm.
    """
    if residual_abs < 0:
        raise ValueError("residual magnitude must be nonnegative")
    if policy.norm_scope == "full":
        if full_norm_sq is None:
            raise ValueError("full-scope policies need the bundle norm")
        norm_sq = full_norm_sq
    else:
        norm_sq = row.norm_sq
    if norm_sq == 0:
        raise ValueError("cannot form a step size for a zero row")
    if policy.is_discrepancy and residual_abs <= policy.tau * policy.per_eq_levels[row_index]:
        return 0.0
    return policy.mu0 / norm_sq


@dataclass(frozen=True)
class SolverState:
    """Iterate pair of the momentum recursion plus its moving-average partner.

    The redundancy is deliberate: ``z == x_cur + n * (x_cur - x_prev)`` holds
    along the iteration (up to rounding), which is what makes the two-step
    and moving-average forms interchangeable.
    """

    x_cur: np.ndarray
    x_prev: np.ndarray
    z: np.ndarray
    n: int

    @classmethod
    def start(cls, x0):
        x0 = np.asarray(x0, dtype=float)
        return cls(x_cur=x0.copy(), x_prev=x0.copy(), z=x0.copy(), n=0)


def shb_step_ima(state, row, y_i, eta):
    """One momentum step in moving-average form."""
    if eta < 0:
        raise ValueError("step size must be nonnegative")
    residual = row.apply(state.x_cur) - y_i
    z_new = state.z - eta * residual * row.kernel_row
    x_new = ((state.n + 1.0) * state.x_cur + z_new) / (state.n + 2.0)
    return SolverState(x_cur=x_new, x_prev=state.x_cur, z=z_new, n=state.n + 1)


def shb_step_twostep(state, row, y_i, eta, coefficients=None):
    """One momentum step in the direct two-term form.

    Produces the same trajectory as :func:`shb_step_ima` up to rounding.
    ``coefficients`` overrides (alpha_n, beta_n), which is how the plain
    gradient special case (1, 0) is cross-checked.
    """
    if eta < 0:
        raise ValueError("step size must be nonnegative")
    alpha, beta = step_coefficients(state.n) if coefficients is None else coefficients
    residual = row.apply(state.x_cur) - y_i
    x_new = state.x_cur - alpha * eta * residual * row.kernel_row \
        + beta * (state.x_cur - state.x_prev)
    z_new = x_new + (state.n + 1.0) * (x_new - state.x_cur)
    return SolverState(x_cur=x_new, x_prev=state.x_cur, z=z_new, n=state.n + 1)


def sgd_step(state, row, y_i, eta):
    """One plain stochastic gradient step (no momentum)."""
    if eta < 0:
        raise ValueError("step size must be nonnegative")
    residual = row.apply(state.x_cur) - y_i
    x_new = state.x_cur - eta * residual * row.kernel_row
    z_new = x_new + (state.n + 1.0) * (x_new - state.x_cur)
    return SolverState(x_cur=x_new, x_prev=state.x_cur, z=z_new, n=state.n + 1)


def index_stream(seed, p, size):
    """The i.i.d. uniform equation draws of a run.

    Backed by a counter-based generator keyed on ``seed`` (an int or a tuple
    of ints), so ensembles can hand run r the stream ``(base_seed, r)`` and
    stay reproducible and order-independent.
    """
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    return gen.integers(0, p, size=size)


def _data_vector(problem, data):
    if data is None:
        return problem.exact_data
    values = getattr(data, "values", data)
    values = np.asarray(values, dtype=float)
    if values.shape != (problem.p,):
        raise ValueError("data must have one entry per equation")
    return values


def run(problem, data, policy, n_iters, seed=0, variant="shb", x0=None, observer=None,
        index_path=None):
    """Drive a solver for ``n_iters`` random-row steps.

    Parameters
    ----------
    problem : ProblemInstance
    data : NoisyData, array, or None
        Right-hand side; None means the exact data.
    policy : StepPolicy
    n_iters : int
    seed : int or tuple
        Seed of the equation-draw stream (ignored when ``index_path`` is given).
    variant : {"shb", "sgd"}
        Momentum iteration or plain stochastic gradient.
    x0 : array, optional
        Initial guess, zero by default.
    observer : callable, optional
        Called as ``observer(n, x)`` at every iterate including n = 0.  The
        array is a live buffer that later steps overwrite; copy it to keep
        it.  Non-None return values are collected and returned.  Without an
        observer the full trajectory of iterate copies is returned.
    index_path : int array, optional
        Replay this explicit sequence of row draws instead of sampling; its
        length overrides ``n_iters``.

    Returns
    -------
    list of observed values, in call order.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if n_iters < 0:
        raise ValueError("iteration count must be nonnegative")
    if policy.mu0 >= 1:
        raise ValueError("this solver family needs mu0 < 1")
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
        if levels.shape != (bundle.p,):
            raise ValueError("policy noise levels must have one entry per equation")
        tau = policy.tau
    K = bundle.kernel_matrix
    Kw = bundle.weighted_kernel_matrix
    momentum = variant == "shb"

    x = np.zeros(problem.m) if x0 is None else np.array(x0, dtype=float)
    if x.shape != problem.grid.nodes.shape:
        raise ValueError("initial guess must be sampled on the grid")
    z = x.copy()

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
        if momentum:
            if eta != 0.0:
                z = z - (eta * residual) * K[i]
            x = ((n + 1.0) * x + z) / (n + 2.0)
        elif eta != 0.0:
            x = x - (eta * residual) * K[i]
        emit(n + 1, x)
    return collected


def a_priori_stop(p, total_level):
    """Iteration budget from the noise level: ceil(p / delta) - 1.

    The relative epsilon guards the ceiling against the floating-point
    representation of ``total_level`` (e.g. p = 100, delta = 0.01 must give
    9999, not 10000).
    """
    if p < 1:
        raise ValueError("need at least one equation")
    if total_level <= 0:
        raise ValueError("stopping rule needs a positive noise level")
    q = p / float(total_level)
    return int(math.ceil(q * (1.0 - 1e-12))) - 1


@dataclass(frozen=True)
class RateConstants:
    """Constants entering the error bounds.

    c0       smallest step margin min_i (1 - eta_i ||A_i||^2), in (0, 1]
    eta_bar  largest per-equation step size
    m0       source energy ||x0 - truth||_w^2 + c0 * sum_i lambda_i^2 / eta_i
             (0 when no source representation is in play)
    """

    c0: float
    eta_bar: float
    m0: float = 0.0

    def __post_init__(self):
        if not (0 < self.c0 <= 1):
            raise ValueError("step margin c0 must lie in (0, 1]")
        if self.eta_bar <= 0:
            raise ValueError("largest step must be positive")
        if self.m0 < 0:
            raise ValueError("source energy must be nonnegative")

    @classmethod
    def for_policy(cls, bundle, policy, m0=0.0):
        base = resolve_base_steps(policy, bundle)
        if policy.norm_scope == "row":
            # eta_i ||A_i||^2 == mu0 for every row, exactly
            c0 = 1.0 - policy.mu0
        else:
            c0 = 1.0 - float(np.max(base * bundle.row_norms_sq))
        return cls(c0=c0, eta_bar=float(np.max(base)), m0=m0)


def stability_bound(n, total_level, p, constants):
    """Noise-propagation bound: mean squared gap between noisy- and exact-data
    runs after n steps is at most ``eta_bar * n * delta^2 / (c0 * p)``."""
    if n < 0:
        raise ValueError("step index must be nonnegative")
    return constants.eta_bar * n * total_level**2 / (constants.c0 * p)


def rate_bound(n, p, constants):
    """Exact-data error bound under a source representation of the truth:
    mean squared error after n steps is at most ``p * m0 / (c0 * (n + 1))``."""
    if n < 0:
        raise ValueError("step index must be nonnegative")
    return p * constants.m0 / (constants.c0 * (n + 1.0))
