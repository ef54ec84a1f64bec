"""Smoke test for the `immunolearn` extension module.

Build and install first, e.g. `maturin develop --release -m crates/py/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import math

import immunolearn as il


def close(a, b, rel=1e-10):
    return abs(a - b) <= rel * abs(b)


def main():
    # closed forms against the hand anchors and the dense oracle
    col = il.SingleColumnParams(2, 1.0, 0.5)
    assert close(il.hitting_time_mean_exact(col), 10.0, 1e-12)
    assert close(il.hitting_time_mean_exact(il.SingleColumnParams(1, 1.0, 0.5)), 2.0, 1e-12)
    small = il.SingleColumnParams(6, 0.5, 0.3)
    for a, b in zip(il.invariant_pmf(small), il.oracle_invariant_pmf(small)):
        assert close(a, b), (a, b)

    # figure parameters through the discrete-model identification
    single, mat = il.identify_parameters(0.1, 100, 0.005, 200)
    assert mat.lambda_m == 1.0 and mat.q_tilde == 1.9
    assert close(il.steady_allones_count(mat), 54.33013684206942, 1e-9)
    assert abs(il.transition_time_prediction(mat) - 557.7176) < 1e-3
    assert abs(single.alpha - 2.0) < 1e-12

    # simulation agrees with the exact mean hitting time
    times = il.hitting_times(col, 20_000, seed=1)
    est = il.estimate_mean(times, 0.95, 1)
    assert abs(est["point"] - 10.0) < 4 * est["std_error"], est

    # trajectories and steady-state draws
    run = il.simulate_matrix(il.MatrixParams(6, 4, 0.2, 0.5), horizon=50.0, seed=3)
    assert run["end_time"] == 50.0 and len(run["matrix"]) == 6
    assert run["series"][0] == (0.0, 0)
    draws = il.sample_steady(il.MatrixParams(1, 1, 0.5, 0.5), 20_000, seed=4)
    frac = sum(d[0][0] for d in draws) / len(draws)
    assert abs(frac - 2.0 / 3.0) < 4 * math.sqrt(2.0 / 9.0 / len(draws)), frac

    # same seed, same answer
    assert il.hitting_times(col, 100, seed=7) == il.hitting_times(col, 100, seed=7)

    try:
        il.MatrixParams(0, 1, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid parameters accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
