"""Acceptance criteria, one test each; every test prints a PASS/FAIL line with its runtime."""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from statecap.capacity import (
    capacity_causal,
    capacity_full_csi,
    capacity_gp,
    capacity_no_csi,
    capacity_no_decoder_csi,
    capacity_probing,
)
from statecap.channels import (
    SideChannel,
    bec,
    bsc,
    example_sz_channel,
    ternary_counterexample_causal,
    ternary_counterexample_probing,
    xor_channel,
)
from statecap.degradation import (
    appendix_a_bound,
    erasure_degradation_witness,
    erasure_margin,
    hbar,
    map_error_probability,
    ml_estimator,
    ml_offdiag_ratio,
    off_diagonal_mass,
    stochastic_degradation_lp,
)
from statecap.channels import generalized_erasure
from statecap.probability import (
    conditional_entropy_and_mi,
    joint_from_channel,
    kl_divergence,
    variational_distance,
)
from statecap.sweeps import figure_spec, run_sweep
from statecap.thresholds import (
    appendix_b_roots,
    example_lower_capacity,
    example_upper_capacity,
    overline_epsilon,
    overline_q,
    perfect_csi_optimizers,
    prop1_check,
    prop2_check,
    prop3_check,
    theorem_checks,
    underline_epsilon,
    underline_q,
)

from conftest import random_model, random_stochastic

LOG2 = np.log(2)
SZ = example_sz_channel(0.5)


@contextmanager
def criterion(number, title, budget, capsys):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < budget, f"took {elapsed:.1f} s, budget {budget} s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        with capsys.disabled():
            print(f"\n[criterion {number:>2}] {status}  {title}  ({elapsed:.2f} s of {budget} s)")


def test_criterion_01_thresholds_at_half(capsys):
    with criterion(1, "thresholds of the binary example at theta=1/2", 5, capsys):
        e = underline_epsilon(SZ)
        q = underline_q(SZ)
        e_hat, q_hat = appendix_b_roots(0.5)
        assert 0.095 <= e <= 0.105
        assert abs(e - e_hat) <= 1e-6
        assert 0.035 <= q <= 0.039
        assert abs(q - q_hat) <= 1e-6
        assert abs(overline_epsilon(SZ) - 0.8) <= 1e-9
        assert abs(overline_q(SZ) - 0.4) <= 1e-9


def test_criterion_02_endpoint_identities(capsys):
    with criterion(2, "endpoint identities for C and C'", 10, capsys):
        for theta in (0.2, 0.5, 0.8):
            m = example_sz_channel(theta)
            lo = capacity_no_csi(m).value
            up = capacity_full_csi(m).value
            assert abs(capacity_causal(m, bec(1.0)).value - lo) <= 2e-9
            assert abs(capacity_causal(m, bec(0.0)).value - up) <= 2e-9
            assert abs(capacity_probing(m, bec(1.0)).value - lo) <= 2e-9
            assert abs(capacity_probing(m, bec(0.0)).value - up) <= 2e-9


def test_criterion_03_closed_forms(capsys):
    with criterion(3, "no-CSI and perfect-CSI closed forms", 10, capsys):
        for theta in np.linspace(0, 1, 9):
            m = example_sz_channel(theta)
            assert abs(capacity_no_csi(m).value - example_lower_capacity(theta)) <= 1e-6
            assert abs(capacity_full_csi(m).value - example_upper_capacity(theta)) <= 1e-6


def test_criterion_04_plateaus(capsys):
    with criterion(4, "erasure and symmetric sweep plateaus", 60, capsys):
        for name, low_edge, high_edge in (("fig3", 0.11, 0.79), ("fig4", 0.04, 0.39)):
            res = run_sweep(figure_spec(name, 101))
            g = res.grid
            c, cp = res.column("C_causal"), res.column("C_probing")
            lo, up = res.column("C_lower"), res.column("C_upper")
            assert np.all(np.abs(c[g >= low_edge - 1e-12] - lo[g >= low_edge - 1e-12]) <= 2e-8)
            assert np.all(np.abs(cp[g <= high_edge + 1e-12] - up[g <= high_edge + 1e-12]) <= 2e-8)


def test_criterion_05_counterexamples(capsys):
    with criterion(5, "counterexample channels", 30, capsys):
        m = ternary_counterexample_causal()
        assert capacity_causal(m, bec(0.9)).value > capacity_no_csi(m).value + 1e-4
        assert not prop1_check(m).holds
        m = ternary_counterexample_probing()
        assert capacity_probing(m, bsc(0.1)).value < capacity_full_csi(m).value - 1e-4
        assert not prop2_check(m)
        m = xor_channel(0.25)
        low, tilde = capacity_no_decoder_csi(m, bec(0.5))
        assert tilde.value > low.value + 1e-4
        assert not prop3_check(m).holds


def _models(rng):
    while True:
        ns = int(rng.integers(2, 4))
        ny = int(rng.integers(2, 5))
        yield random_model(rng, 2, ns, ny, sparsity=0.3 * rng.random())


def _near_uniform_side(rng, ns):
    nt = int(rng.integers(2, 5))
    lam = 10 ** rng.uniform(-3, -0.5)
    return SideChannel((1 - lam) * np.full((ns, nt), 1 / nt) + lam * random_stochastic(rng, ns, nt))


def _near_identity_side(rng, ns):
    nt = ns + int(rng.integers(0, 2))
    base = np.zeros((ns, nt))
    base[np.arange(ns), np.arange(ns)] = 1
    lam = 10 ** rng.uniform(-4, -1)
    return SideChannel((1 - lam) * base + lam * random_stochastic(rng, ns, nt))


def test_criterion_06_theorem_soundness(capsys):
    with criterion(6, "Thm1 and Thm2 verdicts are sound", 120, capsys):
        rng = np.random.default_rng(2024)
        models = _models(rng)
        passed1 = passed2 = 0
        while passed1 < 50:
            m = next(models)
            side = _near_uniform_side(rng, m.s_size)
            if not theorem_checks(m, side)["Thm1"].holds:
                continue
            passed1 += 1
            assert abs(capacity_causal(m, side).value - capacity_no_csi(m).value) <= 2e-8
        while passed2 < 50:
            m = next(models)
            side = _near_identity_side(rng, m.s_size)
            if not theorem_checks(m, side)["Thm2"].holds:
                continue
            passed2 += 1
            assert abs(capacity_probing(m, side).value - capacity_full_csi(m).value) <= 2e-8


def test_criterion_07_margin_lp_equivalence(capsys):
    with criterion(7, "erasure margin verdict agrees with LP feasibility", 30, capsys):
        rng = np.random.default_rng(7)
        seen = set()
        for _ in range(100):
            ns, nt = int(rng.integers(2, 4)), int(rng.integers(2, 5))
            side = random_stochastic(rng, ns, nt, sparsity=0.3 * rng.random())
            mix = rng.random()
            side = (1 - mix) * side + mix * np.full((ns, nt), 1 / nt)
            eps = float(rng.random())
            margin_verdict = erasure_margin(side) >= eps
            lp = stochastic_degradation_lp(side, generalized_erasure(eps, ns))
            assert lp.degraded == margin_verdict
            seen.add(margin_verdict)
            for v in (lp, erasure_degradation_witness(side, eps)):
                if v.degraded:
                    composed = generalized_erasure(eps, ns).matrix @ v.witness
                    assert np.abs(composed - side).max() <= 1e-8
        assert seen == {True, False}


def test_criterion_08_information_inequalities(capsys):
    with criterion(8, "Pinsker, HV bound and the hbar chain", 10, capsys):
        rng = np.random.default_rng(8)
        for _ in range(200):
            n = int(rng.integers(2, 6))
            p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
            assert kl_divergence(p, q) >= 2 * variational_distance(p, q) ** 2 - 1e-15
        for _ in range(200):
            ns, nt = int(rng.integers(2, 5)), int(rng.integers(2, 6))
            p_s = rng.dirichlet(np.ones(ns))
            side = random_stochastic(rng, ns, nt, sparsity=0.3)
            h, _ = conditional_entropy_and_mi(joint_from_channel(p_s, side))
            assert map_error_probability(p_s, side) <= h / (2 * LOG2) + 1e-12
        checked_twocases = 0
        for _ in range(200):
            ns = int(rng.integers(2, 5))
            p_s = rng.dirichlet(np.ones(ns)) * 0.5 + 0.5 / ns
            side = _near_identity_side(rng, ns).matrix if rng.random() < 0.7 else \
                random_stochastic(rng, ns, ns + 1)
            est = ml_estimator(side)
            hb = hbar(p_s, side)
            assert off_diagonal_mass(est.matrix) <= hb + 1e-12
            if hb <= 1:
                checked_twocases += 1
                assert ml_offdiag_ratio(est) <= hb / (hb + 1) + 1e-12
        assert checked_twocases >= 100


def test_criterion_09_gp_sandwich(capsys):
    with criterion(9, "Gelfand-Pinsker sandwich on the 21-point grid", 600, capsys):
        res = run_sweep(figure_spec("fig9"))
        g = res.grid
        c, cp = res.column("C_causal"), res.column("C_probing")
        gp = res.column("C_gp_lb")
        assert np.all(c - 2e-6 <= gp) and np.all(gp <= cp + 2e-6)
        assert abs(gp[g == 1.0][0] - res.column("C_lower")[0]) <= 1e-4
        assert abs(gp[g == 0.0][0] - res.column("C_upper")[0]) <= 1e-4
        assert gp[np.isclose(g, 0.5)][0] > res.column("C_lower")[0] + 1e-3


def test_criterion_10_singular_value_route(capsys):
    with criterion(10, "alternative Thm2 threshold and the smallest-singular-value bound", 60, capsys):
        rng = np.random.default_rng(10)
        models = _models(rng)
        passed = 0
        while passed < 50:
            m = next(models)
            side = _near_identity_side(rng, m.s_size)
            if not theorem_checks(m, side)["Thm2alt"].holds:
                continue
            passed += 1
            assert abs(capacity_probing(m, side).value - capacity_full_csi(m).value) <= 2e-8
            bound = appendix_a_bound(m.state_dist, side, perfect_csi_optimizers(m).table)
            sigma = np.linalg.svd(ml_estimator(side).matrix, compute_uv=False).min()
            assert bound.sigma_min_lower <= sigma + 1e-12
