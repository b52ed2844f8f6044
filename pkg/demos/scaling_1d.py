"""Cost growth of the one-dimensional solvers as the grid gets larger.

Trisection adaptive sampling keeps a logarithmic number of iterations, so
its simulation cost grows like log N. The active-set scheme spends almost
all of its budget on the shrinking live set and ends up with a cost that is
essentially flat in N. This script measures both on the separable benchmark
family and prints the two cost curves side by side.
"""

from dcso.harness import ExperimentConfig, run_experiment

N_LIST = [10, 30, 50, 80, 110, 150]


def main():
    curves = {}
    for alg in ("AS", "EAS"):
        cfg = ExperimentConfig.from_dict({
            "algorithm": alg,
            "model": "SEPARABLE",
            "d": 1,
            "N": N_LIST,
            "epsilon": 0.2,
            "delta": 1e-6,
            "replications": 20,
            "master_seed": 314,
        })
        curves[alg], _ = run_experiment(cfg)

    print(f"{'N':>5} {'AS mean cost':>14} {'EAS mean cost':>14}")
    for n in N_LIST:
        print(f"{n:>5} {curves['AS'].mean_cost(n):>14.0f} {curves['EAS'].mean_cost(n):>14.0f}")
    ratio_as = curves["AS"].mean_cost(N_LIST[-1]) / curves["AS"].mean_cost(N_LIST[0])
    ratio_eas = curves["EAS"].mean_cost(N_LIST[-1]) / curves["EAS"].mean_cost(N_LIST[0])
    print(f"\ncost({N_LIST[-1]}) / cost({N_LIST[0]}):  AS {ratio_as:.2f}x   EAS {ratio_eas:.2f}x")


if __name__ == "__main__":
    main()
