"""Smoke test for the weaksim Python extension.

Build and run with python/run_smoke.sh, or copy the built cdylib next to
this file as weaksim.so and run python3 python/smoke.py.
"""

import math
import sys

sys.path.insert(0, "python")
sys.path.insert(0, ".")

import weaksim


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    names = weaksim.builtin_scenarios()
    assert "two_state_22" in names and len(names) == 7, names

    # amplified weak values
    rows = dict(weaksim.weak_values("two_state_22"))
    assert close(rows["sigma_z[A]+sigma_z[B]"], 22), rows
    assert close(rows["sigma_z[A]"], 211, 1e-8)
    assert close(rows["sigma_z[B]"], -189, 1e-8)
    assert close(rows["sigma_z[A]*sigma_z[B]"], 21)

    # hand-built two-state vector reproduces the same numbers
    pre = weaksim.Ket([0.11 + 0j, 0.95 + 0j, -1.05 + 0j, 0j], [2, 2])
    post = weaksim.Ket([1 + 0j, 1 + 0j, 1 + 0j, 1 + 0j], [2, 2])
    tsv = weaksim.TwoStateVector(pre, post)
    za = weaksim.Operator.sigma_z().embed(0, [2, 2])
    zb = weaksim.Operator.sigma_z().embed(1, [2, 2])
    assert close(tsv.weak_value(za.plus(zb)).real, 22)
    assert close(tsv.weak_value(za.times(zb)).real, 21)

    # ABL certainty for the epsilon pair
    eps = 0.1
    e_pre = weaksim.Ket([eps + 0j, 1 + 0j, 1 + 0j, 0j], [2, 2])
    e_post = weaksim.Ket([eps + 0j, 1 + 0j, -1 + 0j, 0j], [2, 2])
    e_tsv = weaksim.TwoStateVector(e_pre, e_post)
    probs = dict(e_tsv.abl_probabilities(za.plus(zb)))
    assert close(probs[2.0], 1.0, 1e-12), probs
    assert close(e_tsv.strong_expectation(za.plus(zb)), 2.0, 1e-12)

    # pointer moments against the published closed form, both engines
    delta = 10.0
    expected = 2 * eps**4 / (eps**4 + 2 - 2 * math.exp(-2 / delta**2))
    m = weaksim.moments("epsilon_sum", delta)
    assert close(m.mean_q[0] + m.mean_q[1], expected, 1e-10)
    g = weaksim.grid_oracle_moments("epsilon_sum", delta)
    assert close(g.mean_q[0] + g.mean_q[1], expected, 1e-8)

    # causality demonstration, exact
    assert weaksim.causality_probability("nothing") == 1.0
    assert weaksim.causality_probability("flip_to_one") == 0.5
    assert weaksim.causality_probability("flip_to_one", nonlocal_measurement=False) == 1.0

    assert weaksim.modsum_identity_check()

    # Monte Carlo pipeline is deterministic and sane
    s1 = weaksim.run_experiment("product_phase", "resch-steinberg", 4.0, 50_000, 7)
    s2 = weaksim.run_experiment("product_phase", "resch-steinberg", 4.0, 50_000, 7)
    assert s1.estimate == s2.estimate and s1.n_postselected == s2.n_postselected
    assert abs(s1.estimate - 1.0) < 0.3, s1

    n = weaksim.required_ensemble("epsilon_sum", "direct", 600.0, 2.0, 0.5)
    assert 1.2e5 < n < 1.08e6, n

    # degenerate post-selection raises
    try:
        weaksim.TwoStateVector(
            weaksim.Ket([0j, 1 + 0j, 1 + 0j, 0j], [2, 2]),
            weaksim.Ket([0j, 1 + 0j, -1 + 0j, 0j], [2, 2]),
        )
    except RuntimeError:
        pass
    else:
        raise AssertionError("orthogonal selection must raise")

    print("smoke OK")


if __name__ == "__main__":
    main()
