"""Heavy-ball momentum vs plain stochastic gradient steps.

Same benchmark, same per-row step sizes, two iterations: with the momentum
schedule alpha = 1/(n+2), beta = n/(n+2) the iterate is a running average,
so its error curve is visibly smoother and diverges more slowly after the
minimum; the plain method reaches a comparable (here slightly lower)
minimum sooner but oscillates more.
"""

import os

from shbreg import (
    RunSpec,
    StepPolicy,
    add_noise,
    build_example1,
    monte_carlo,
    semi_convergence_stats,
    write_csv,
)
from shbreg.plots import line_plot_svg

OUT = os.path.join(os.path.dirname(__file__), "demo_out")


def main():
    os.makedirs(OUT, exist_ok=True)
    problem = build_example1(p=100, m=400)
    data = add_noise(problem, 1e-2, seed=41)
    policy = StepPolicy.constant(0.6)

    curves = []
    minima = {}
    for variant in ("shb", "sgd"):
        spec = RunSpec(problem=problem, policy=policy, n_iters=4000, data=data,
                       variant=variant)
        trace = monte_carlo(spec, 10, base_seed=920)
        stats = semi_convergence_stats(trace)
        minima[variant] = stats.err_min
        label = "momentum" if variant == "shb" else "plain"
        print(f"{label:9s}: best {stats.err_min:.2e} at {stats.n_min}, "
              f"final {stats.err_final:.2e}")
        write_csv(trace, os.path.join(OUT, f"compare_{variant}.csv"))
        curves.append((label, trace.iters, trace.mean_sq_rel_err))

    ratio = max(minima.values()) / min(minima.values())
    print(f"best-error ratio: {ratio:.2f} (comparable methods)")
    line_plot_svg(os.path.join(OUT, "compare.svg"), curves,
                  title="momentum vs plain stochastic gradient")
    print(f"wrote traces and plot to {OUT}")


if __name__ == "__main__":
    main()
