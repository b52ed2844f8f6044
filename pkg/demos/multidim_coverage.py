"""Multi-dimensional solvers on one random separable instance.

Solves the same d = 2 instance with the cutting-plane solver (both
centering engines), dimension reduction, the recursive active-set scheme,
and the projected subgradient baseline, then reports the true optimality
gap and the simulation cost of each run.
"""

import numpy as np

from dcso.bench import random_separable_model, subgradient_baseline
from dcso.cutplane import EngineKind, stochastic_vaidya
from dcso.dimred import dimension_reduction_solve
from dcso.multieas import solve_recursive
from dcso.oracle import CountingOracle, Guarantee
from dcso.rng import seed_stream

D, N = 2, 30
G = Guarantee(epsilon=0.3, delta=1e-3)


def main():
    model = random_separable_model(D, N, seed_stream(27, "model"))
    print(f"instance: d={D}, N={N}, optimum at {model.x_star} (value 0)\n")
    print(f"{'solver':<22} {'solution':<12} {'gap':>8} {'cost':>12}")

    def show(name, solve):
        oracle = CountingOracle(model.oracle())
        sol = np.atleast_1d(solve(oracle, seed_stream(27, name)))
        print(f"{name:<22} {str(sol.tolist()):<12} {model.true_value(sol):>8.4f} {oracle.calls:>12}")

    L = model.lipschitz()
    show("vaidya", lambda o, r: stochastic_vaidya(o, D, N, G, L, r))
    show("vaidya/random-walk", lambda o, r: stochastic_vaidya(
        o, D, N, G, L, r, engine_kind=EngineKind.RANDOM_WALK))
    show("dimension-reduction", lambda o, r: dimension_reduction_solve(o, D, N, G, r))
    show("recursive active-set", lambda o, r: solve_recursive(o, D, N, G, r)[0])
    show("subgradient baseline", lambda o, r: subgradient_baseline(
        o, D, N, G, L, r, c_b=0.01))


if __name__ == "__main__":
    main()
