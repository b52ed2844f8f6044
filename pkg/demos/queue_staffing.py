"""Staffing a pair of queues that share a budget of N + 1 servers.

The decision x gives queue 1 exactly x servers and queue 2 the remaining
N + 1 - x. The objective, average customer waiting time across both
queues, is only available through discrete-event simulation. The script
first scans a coarse landscape to show how flat the optimum region is,
then runs the active-set solver against the simulation oracle.
"""

from dcso.bench import QueueModel, QueueOracle
from dcso.harness import landscape_scan
from dcso.onedim import enhanced_adaptive_sampling
from dcso.oracle import CountingOracle, Guarantee
from dcso.rng import seed_stream

N = 25


def main():
    model = QueueModel(N=N)
    oracle = QueueOracle(model, estimated_sigma2=4.0)

    points = list(range(2, N + 1, 3))
    print(f"landscape over x (queue-1 servers out of {N + 1}):")
    rows = landscape_scan(oracle, points, 40, seed_stream(12, "scan"))
    for x, mean, hw in rows:
        bar = "#" * int(round(mean * 4))
        print(f"  x={x:>3}  wait {mean:6.2f} +- {hw:4.2f}  {bar}")

    counted = CountingOracle(oracle)
    sol = enhanced_adaptive_sampling(
        counted, N, Guarantee(epsilon=4.0, delta=0.1), seed_stream(12, "solve")
    )
    print(f"\nchosen split: {sol} servers for queue 1, {N + 1 - sol} for queue 2")
    print(f"simulation runs consumed: {counted.calls}")


if __name__ == "__main__":
    main()
