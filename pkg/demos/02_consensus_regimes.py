"""Where does a population end up? Classification and simulation agree.

For stubborn positives and stubborn neutrals the limit can often be read
off the initial opinions alone: a pinned extreme drags everyone along, a
zero-anchored neutral pins the consensus to zero, a one-signed population
keeps its sign. This demo classifies several starting configurations and
then simulates them to show the prediction holding.

Usage:
    python demos/02_consensus_regimes.py
"""

import opdyn as od
from opdyn.rng import SplitMix64

CASES = [
    ("one zealot at +1", od.StubbornPositive(), [1.0, -0.4, 0.1, -0.9, 0.3]),
    ("nobody at the extremes", od.StubbornPositive(), [0.8, -0.4, 0.1, -0.9, 0.3]),
    ("anchored at neutral", od.StubbornNeutral(), [0.0, 0.7, -0.5, 0.2, -0.8]),
    ("all mildly positive", od.StubbornNeutral(), [0.3, 0.7, 0.5, 0.2, 0.9]),
    ("all mildly negative", od.StubbornNeutral(), [-0.3, -0.7, -0.5, -0.2, -0.9]),
    ("mixed signs, no anchor", od.StubbornNeutral(), [0.6, -0.6, 0.4, -0.2, 0.8]),
    ("no theory for extremists", od.StubbornExtremist(), [0.6, -0.6, 0.4, -0.2, 0.8]),
]


def main():
    rng = SplitMix64(2024)
    w = od.random_strongly_connected_matrix(5, rng, edge_probability=0.5)
    schedule = od.StaticSchedule(w)
    print(f"shared 5-agent strongly connected graph, weight floor {w.beta:.3f}\n")

    for label, kind, x0 in CASES:
        result = od.classify_limit(x0, kind, rjsc=True)
        stop = od.StopRule(max_steps=200_000, consensus_epsilon=1e-9)
        if result.value in (1.0, -1.0):
            # creeping toward a pinned extreme has no geometric rate, so
            # stop on distance to the predicted limit instead of spread
            stop = od.StopRule(max_steps=10**6, consensus_epsilon=1e-9,
                               target=result.value, target_epsilon=1e-4)
        record = od.simulate(x0, schedule, kind, stop, keep_states=False)
        limit = float(record.final_state.mean())
        print(f"{label:26s} [{kind.name}]")
        print(f"  prediction: {result.outcome.value:28s} ({result.basis})")
        print(f"  simulation: settled near {limit:+.4f} after {record.steps} steps "
              f"(stop: {record.stop_reason})")
        print()


if __name__ == "__main__":
    main()
