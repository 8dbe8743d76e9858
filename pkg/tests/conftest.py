import numpy as np
import pytest

from shbreg import Grid, OperatorBundle, ProblemInstance, RowOperator


def make_random_problem(p, m, seed, a=0.0, b=1.0):
    """Dense random rows on a uniform grid with a random truth."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0))))
    grid = Grid.uniform(a, b, m)
    bundle = OperatorBundle(rows=tuple(
        RowOperator(rng.standard_normal(m), grid) for _ in range(p)))
    truth = rng.standard_normal(m)
    return ProblemInstance(
        name=f"random-{p}x{m}",
        grid=grid,
        sample_points=np.arange(p, dtype=float),
        bundle=bundle,
        truth=truth,
        exact_data=bundle.apply_all(truth),
    )


@pytest.fixture
def random_problem():
    return make_random_problem
