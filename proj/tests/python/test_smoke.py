"""Smoke tests for the python bindings."""

import math
import sys

import fscbound


def check(name, ok):
    print(f"{name}: {'ok' if ok else 'FAIL'}")
    return 0 if ok else 1


def main():
    failures = 0

    ch = fscbound.bsc(0.1)
    failures += check("bsc shape", ch.num_states == 1 and ch.num_inputs == 2)

    ge = fscbound.gilbert_elliott(0.3, 0.3, 0.001, 0.5, constraint="rll_1_inf")
    failures += check("ge digest", len(ge.digest) > 0)
    pi = ge.stationary_state_dist()
    failures += check("ge stationary", abs(pi[0] - 0.5) < 1e-10)

    total, admissible = fscbound.context_counts(ge, 2, 1)
    failures += check("context counts", total == 16 and admissible == 12)
    failures += check("grid size", fscbound.grid_size(ge, 1, 1, 0.05) == 1771)

    q = fscbound.quantize(ge, 1, 1, [0.12, 0.25, 0.375, 0.255], 0.1)
    failures += check(
        "quantize",
        max(abs(a - b) for a, b in zip(q, [0.1, 0.2, 0.4, 0.3])) < 1e-12,
    )

    res = fscbound.value_iteration(ch, 0, 0, 0, 0.5, 0.02, 5)
    failures += check("value iteration", abs(res.sigma - 0.531004) < 1e-4)

    est = fscbound.directed_info_rate(
        ch, 0, 0, 0, [0.5, 0.5], 100000, burn_in=1000, seed=3
    )
    failures += check(
        "rate estimate",
        abs(est.mean - 0.531004) < 3 * est.std_error + 1e-6,
    )

    exact = fscbound.exact_directed_info(ch, 0, 0, 0, [0.5, 0.5], 1)
    failures += check("exact one step", abs(exact - 0.531004) < 1e-5)

    lb, rows = fscbound.markov_lower_bound(ch, 0, 0.1, 50000, seed=7)
    failures += check("lower bound", abs(lb.mean - 0.531004) < 0.02)
    failures += check("lower bound rows", abs(rows[0] - 0.5) < 1e-12)

    all_pass, items = fscbound.run_oracle_checks(seed=99)
    failures += check("oracle checks", all_pass and len(items) >= 4)
    all_pass_bad, _ = fscbound.run_oracle_checks(seed=99, corrupt=True)
    failures += check("oracle negative control", not all_pass_bad)

    text = fscbound.parse_config(
        "[channel]\nmodel = bsc\neps = 0.1\n[bounds]\ntriples = 1,1,1\n"
    )
    failures += check("config round trip", "triples" in text)
    try:
        fscbound.parse_config("[bounds]\ntriples = 2,1,1\n")
        failures += check("config error", False)
    except fscbound.ConfigError:
        failures += check("config error", True)

    if failures:
        print(f"{failures} smoke checks failed")
        return 1
    print("python smoke tests passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
