"""Window partitions, threshold classification, and chain-audit tests.

Oracles here are independent of the implementation: direct per-prime
summation loops, exact rational arithmetic for the truncated exponential,
closed-form model moments for the Monte Carlo laws, and hand-derived
algebraic rearrangements for the chain inequalities.
"""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from momentlab.primes import primes_up_to
from momentlab.forms import hecke_eigenforms, sym_square_L1
from momentlab.satotate import sample_family
from momentlab.pipeline import (
    CHAIN_CONSTANT,
    PartitionParams,
    partition_params,
    coefficient_system,
    prime_dirichlet_poly,
    square_dirichlet_poly,
    classify_family,
    log_l_upper_bound,
    log_l_margin_rows,
    truncated_exp,
    truncated_exp_exact,
    truncated_exp_dominates,
    gaussian_heuristic_prediction,
    chain_validator,
    chain_table_rows,
    markov_moment_bound,
    markov_regime_certificate,
    exceptional_measure_report,
    fourth_power_product_report,
    sym_ratio_report,
)


def desk_params():
    # log_k = 100, cutoff e^-2: two windows, the first fully computable.
    return partition_params(100.0, 2.0)


def desk_system(lam=2.0):
    params = desk_params()
    return params, coefficient_system(params, lam, p_limit=int(params.x(1)))


# ----------------------------------------------------------------- partitions


class TestPartitionParams:
    def test_contract_example_million(self):
        p = partition_params(1e6, 2.0)
        llk = math.log(1e6)  # the argument is already log k
        assert p.I == 3
        assert p.beta[0] == 0.0
        assert abs(p.beta[1] - 1.0 / llk**2) < 1e-15
        assert abs(p.beta[1] - 0.00524) < 1e-5
        assert len(p.beta) == p.I + 1

    def test_steep_cutoff_gives_single_window(self):
        # with the steep cutoff e^-10000 no rung clears it at computable
        # sizes, so the empty-set convention gives I = 1
        p = partition_params(100.0, 10000.0)
        assert p.I == 1

    def test_ratio_twenty_exact(self):
        # the ladder is built by literal multiplication, so the invariant
        # beta_{i+1} == 20 * beta_i holds bit-exactly
        for log_k in (50.0, 100.0, 1e6, 1e9, 1e300):
            p = partition_params(log_k, 2.0)
            for i in range(1, p.I):
                assert p.beta[i + 1] == 20.0 * p.beta[i]

    def test_top_rung_brackets_cutoff(self):
        for log_k, t in [(100.0, 2.0), (1e6, 2.0), (1e9, 5.0), (500.0, 1.0)]:
            p = partition_params(log_k, t)
            cutoff = math.exp(-t)
            assert p.beta[p.I] > cutoff
            if p.I >= 2:
                assert p.beta[p.I - 1] <= cutoff
                assert p.beta[p.I] <= 20.0 * cutoff * (1.0 + 1e-12)

    def test_log_x_consistency(self):
        p = partition_params(100.0, 2.0)
        assert p.log_x(0) == 0.0
        assert abs(p.x(1) - math.exp(p.beta[1] * 100.0)) < 1e-9
        assert abs(p.loglog_k - math.log(100.0)) == 0.0
        with pytest.raises(ValueError):
            p.log_x(p.I + 1)

    def test_small_log_k_rejected(self):
        with pytest.raises(ValueError):
            partition_params(math.e)
        with pytest.raises(ValueError):
            partition_params(0.5)


# ---------------------------------------------------------- coefficient system


class TestCoefficientSystem:
    def test_weight_bounds_random_sources(self):
        params = desk_params()
        rng = np.random.default_rng(20260816)
        n = len(primes_up_to(int(params.x(1))))
        for _ in range(10):
            lam = rng.uniform(-2.0, 2.0, size=n)
            cs = coefficient_system(params, lam, p_limit=int(params.x(1)))
            lam_sq = cs.lam**2
            for u_j in cs.u:
                assert np.all(u_j >= 0.0)
                assert np.all(u_j <= lam_sq + 1e-15)
                assert np.all(u_j <= 4.0 + 1e-15)
            for w_j in cs.w:
                assert np.all(w_j >= 0.0)
                assert np.all(w_j <= 2.0 + 1e-15)

    def test_support_masks(self):
        params, cs = desk_system()
        for j in range(1, params.I + 1):
            lx = params.log_x(j)
            beyond_linear = cs.log_primes > lx
            beyond_square = 2.0 * cs.log_primes > lx
            assert np.all(cs.u[j - 1][beyond_linear] == 0.0)
            assert np.all(cs.w[j - 1][beyond_square] == 0.0)

    def test_direct_formula_spot_check(self):
        params, cs = desk_system(lam=1.3)
        j = 2
        lx = params.log_x(j)
        for idx in (0, 5, len(cs.primes) - 1):
            p = float(cs.primes[idx])
            expect_u = 1.3**2 * p ** (-1.0 / lx) * (lx - math.log(p)) / lx
            assert cs.u[j - 1][idx] == pytest.approx(expect_u, rel=1e-14)
            expect_w = (
                (1.3**2 - 2.0) ** 2
                / 2.0
                * p ** (-2.0 / lx)
                * (lx - 2.0 * math.log(p))
                / lx
            )
            assert cs.w[j - 1][idx] == pytest.approx(expect_w, rel=1e-14)

    def test_rows_covered(self):
        params, cs = desk_system()
        # window 1 tops out at x_1 ~ 111.6 (covered); window 2 at e^{94.3}
        assert cs.rows_covered == 1
        assert cs.p_limit == int(params.x(1))

    def test_validation(self):
        params = desk_params()
        with pytest.raises(ValueError):
            coefficient_system(params, 2.5, p_limit=100)  # beyond two-sided bound
        with pytest.raises(ValueError):
            coefficient_system(params, 2.0)  # top window astronomically large
        with pytest.raises(ValueError):
            coefficient_system(params, np.ones(3), p_limit=100)  # misaligned
        with pytest.raises(ValueError):
            coefficient_system(params, 2.0, p_limit=1)  # empty table


# --------------------------------------------------------------- g / p  stats


class TestWindowStatistics:
    def test_g_zero_input(self):
        params, cs = desk_system()
        assert prime_dirichlet_poly(0.0, 1, 1, cs) == 0.0
        assert prime_dirichlet_poly(0.0, 1, 2, cs) == 0.0

    def test_g_constructed_against_direct_sum(self):
        # lam_f = lam_g = 2 everywhere: G = 8 sum p^{-1/2-1/log x_j}
        # * log(x_j/p)/log x_j over the window, summed directly here
        params, cs = desk_system(lam=2.0)
        for j in (1, 2):
            lx = params.log_x(j)
            lo, hi = 1.0, params.x(1)
            oracle = math.fsum(
                8.0
                * p ** (-0.5 - 1.0 / lx)
                * (lx - math.log(p))
                / lx
                for p in cs.primes.tolist()
                if lo < p <= hi
            )
            assert prime_dirichlet_poly(2.0, 1, j, cs) == pytest.approx(oracle, rel=1e-13)

    def test_g_monte_carlo_variance_law(self):
        # model law: G_(1,I) has mean 0 and second moment sum u^2/p over the
        # window; the mean-of-squares estimator of N = 10^6 samples must land
        # within three standard errors (fourth-moment formula for the s.e.)
        params, cs = desk_system(lam=2.0)
        fam = sample_family(cs.p_limit, 1_000_000, seed=20260816)
        weights = np.where(
            cs.window_mask(1), cs.u[params.I - 1] * cs.inv_sqrt_primes, 0.0
        )
        g_vals = np.asarray(fam.values, dtype=np.float64) @ weights
        c_sq = float(np.sum((weights) ** 2))
        c_4 = float(np.sum(weights**4))
        second_moment = float(np.mean(g_vals**2))
        # Var(G^2) = E G^4 - (E G^2)^2 = 2 (sum c^2)^2 - sum c^4
        sem = math.sqrt(max(2.0 * c_sq**2 - c_4, 0.0) / len(g_vals))
        assert abs(second_moment - c_sq) <= 3.0 * sem

    def test_g_validation(self):
        params, cs = desk_system()
        with pytest.raises(ValueError):
            prime_dirichlet_poly(0.0, 2, 1, cs)  # i > j
        with pytest.raises(ValueError):
            prime_dirichlet_poly(0.0, 1, 3, cs)  # j > I
        with pytest.raises(ValueError):
            prime_dirichlet_poly(0.0, 2, 2, cs)  # window 2 not covered

    def test_p_zero_input_forced_value(self):
        # lam_g = 0 forces lam_g(p^2) = -1, so P_m = -sum w/p on the window
        params, cs = desk_system()
        for m in (1, 2, 3):
            mask = (cs.primes > 2**m) & (cs.primes <= 2 ** (m + 1))
            direct = -math.fsum(
                (cs.w[params.I - 1][mask] / cs.primes[mask]).tolist()
            )
            assert square_dirichlet_poly(0.0, m, cs) == pytest.approx(direct, abs=1e-18)

    def test_p_sato_tate_mean_and_bound(self):
        # E[lam(p)^2 - 1] = 0 under the model, and Var(lam^2-1) = 1, so the
        # family mean of P_m is 0 +- 3 sqrt(sum (w/p)^2 / N); Deligne range
        # gives the hard bound |P_m| <= 3 sum w/p
        params, cs = desk_system(lam=2.0)
        fam = sample_family(cs.p_limit, 200_000, seed=7)
        vals = np.asarray(fam.values, dtype=np.float64)
        for m in (1, 2, 4):
            mask = (cs.primes > 2**m) & (cs.primes <= 2 ** (m + 1))
            wv = np.where(mask, cs.w[params.I - 1] / cs.primes, 0.0)
            p_vals = (vals * vals - 1.0) @ wv
            sem = math.sqrt(float(np.sum(wv**2)) / len(p_vals))
            assert abs(float(np.mean(p_vals))) <= 3.0 * sem
            hard = 3.0 * float(np.sum(np.abs(wv)))
            assert float(np.max(np.abs(p_vals))) <= hard + 1e-15

    def test_p_validation(self):
        params, cs = desk_system()
        with pytest.raises(ValueError):
            square_dirichlet_poly(0.0, -1, cs)
        with pytest.raises(ValueError):
            square_dirichlet_poly(0.0, 7, cs)  # 2^8 = 256 > p_limit = 111

    def test_source_kinds_agree(self):
        # dict, callable, array, and eigenform sources must give one answer
        params, cs = desk_system()
        delta = hecke_eigenforms(12, n_terms=130)[0]
        arr = np.array([delta.lam(int(p)) for p in cs.primes])
        as_dict = {int(p): arr[i] for i, p in enumerate(cs.primes)}
        as_call = lambda p: as_dict[p]  # noqa: E731
        vals = {
            "arr": prime_dirichlet_poly(arr, 1, 2, cs),
            "dict": prime_dirichlet_poly(as_dict, 1, 2, cs),
            "call": prime_dirichlet_poly(as_call, 1, 2, cs),
            "form": prime_dirichlet_poly(delta, 1, 2, cs),
        }
        assert len({round(v, 13) for v in vals.values()}) == 1


# ------------------------------------------------------------- classification


class TestClassifyFamily:
    def test_all_zero_family_all_good(self):
        params, cs = desk_system()
        rep = classify_family(np.zeros((9, len(cs.primes))), params, cs)
        assert rep.n_forms == 9
        assert np.all(rep.e_class == -1)
        assert np.all(rep.in_top_window_good)
        assert rep.counts()["good"] == 9
        assert rep.partition_ok()

    def test_forced_exceptional_zero(self):
        # a single form aligned with the weights: G_(1,I) far above the
        # cutoff beta_1^{-3/4}, so the first row fails
        params, cs = desk_system(lam=2.0)
        rep = classify_family(2.0, params, cs)
        assert rep.n_forms == 1
        assert rep.e_class[0] == 0
        assert not rep.in_top_window_good[0]
        assert rep.partition_ok()

    def test_partition_invariants_sato_tate(self):
        params, cs = desk_system(lam=2.0)
        fam = sample_family(cs.p_limit, 20_000, seed=3)
        rep = classify_family(fam, params, cs)
        assert rep.partition_ok()
        counts = rep.counts()
        assert counts["good"] + sum(counts["exceptional"].values()) == rep.n_forms
        assert sum(counts["dyadic"].values()) == rep.n_forms
        assert set(np.unique(rep.e_class)).issubset({-1, *range(rep.rows_evaluated)})
        assert set(np.unique(rep.p_class)).issubset({0, *rep.m_values})
        assert rep.rows_evaluated == 1 and not rep.complete

    def test_exceptional_measure_decreases_with_threshold(self):
        # qualitative shape of the measure bound: raising the cutoffs can
        # only shrink the exceptional classes
        params, cs = desk_system(lam=2.0)
        fam = sample_family(cs.p_limit, 200_000, seed=13)
        fractions = []
        for scale in (0.5, 1.0, 2.0, 4.0):
            rep = classify_family(fam, params, cs, threshold_scale=scale)
            exc = sum(rep.counts()["exceptional"].values())
            fractions.append(exc / rep.n_forms)
        assert all(a >= b for a, b in zip(fractions, fractions[1:]))
        assert fractions[0] > fractions[-1]

    def test_thresholds_match_definitions(self):
        params, cs = desk_system()
        rep = classify_family(np.zeros((1, len(cs.primes))), params, cs)
        for (i, _l), thr in zip(rep.pairs, rep.g_thresholds):
            assert thr == pytest.approx(params.beta[i] ** -0.75, rel=1e-15)
        for m, thr in zip(rep.m_values, rep.p_thresholds):
            assert thr == pytest.approx(2.0 ** (-m / 10.0), rel=1e-15)
        # dyadic windows stop at the prime table: 2^{m+1} <= 111
        assert rep.m_values == (1, 2, 3, 4, 5)

    def test_json_round_trip(self):
        params, cs = desk_system()
        fam = sample_family(cs.p_limit, 64, seed=2)
        rep = classify_family(fam, params, cs)
        doc = json.loads(json.dumps(rep.to_json_dict()))
        assert doc["n_forms"] == 64
        assert doc["partition_ok"] is True
        full = rep.to_json_dict(include_forms=True)
        assert len(full["forms"]) == 64
        assert set(full["forms"][0]) == {
            "e_class",
            "in_top_window_good",
            "p_class",
            "g_values",
            "p_values",
        }

    def test_validation(self):
        params, cs = desk_system()
        with pytest.raises(ValueError):
            classify_family(np.zeros((2, 5)), params, cs)
        with pytest.raises(ValueError):
            classify_family(np.zeros((2, len(cs.primes))), params, cs, 0.0)
        other = partition_params(200.0, 2.0)
        with pytest.raises(ValueError):
            classify_family(np.zeros((2, len(cs.primes))), other, cs)
        small = sample_family(50, 4, seed=1)
        with pytest.raises(ValueError):
            classify_family(small, params, cs)


# ------------------------------------------------------------ explicit bound


class TestLogLUpperBound:
    def test_zero_input_terms(self):
        # lam = 0 kills the linear sum; the square sum keeps its constant
        # factors (4)(-2)/2 = -4 per prime, summed directly here; the
        # conductor term is exactly 6 log k / log x
        x, k = 1000.0, 12.0
        out = log_l_upper_bound(0.0, 0.0, x, k)
        assert out["linear_term"] == 0.0
        lx = math.log(x)
        oracle = math.fsum(
            -4.0 * p ** (-1.0 - 2.0 / lx) * (lx - 2.0 * math.log(p)) / lx
            for p in primes_up_to(int(math.isqrt(1000)))
        )
        assert out["square_term"] == pytest.approx(oracle, rel=1e-13)
        assert out["conductor_term"] == pytest.approx(6.0 * math.log(k) / lx, abs=0.0)
        assert out["value"] == pytest.approx(
            out["linear_term"] + out["square_term"] + out["conductor_term"], abs=0.0
        )

    def test_conductor_term_at_sixth_power(self):
        out = log_l_upper_bound(0.0, 0.0, 12.0**6, 12.0)
        assert out["conductor_term"] == pytest.approx(1.0, abs=4e-16)

    def test_direct_sum_oracle_random(self):
        rng = np.random.default_rng(99)
        x, k = 500.0, 16.0
        primes = primes_up_to(500)
        lf = rng.uniform(-2, 2, size=len(primes))
        lg = rng.uniform(-2, 2, size=len(primes))
        out = log_l_upper_bound(lf, lg, x, k)
        lx = math.log(x)
        lin = math.fsum(
            a * a * b * p ** (-0.5 - 1.0 / lx) * (lx - math.log(p)) / lx
            for a, b, p in zip(lf, lg, primes)
        )
        sq = math.fsum(
            (a**4 - 4 * a * a + 4)
            * ((b * b - 1) - 1)
            / (2 * p ** (1 + 2.0 / lx))
            * (lx - 2 * math.log(p))
            / lx
            for a, b, p in zip(lf, lg, primes)
            if p * p <= x
        )
        assert out["linear_term"] == pytest.approx(lin, rel=1e-12)
        assert out["square_term"] == pytest.approx(sq, rel=1e-12)

    def test_o1_surfaced_not_folded(self):
        out = log_l_upper_bound(0.0, 0.0, 100.0, 12.0)
        assert "O(1)" in out["o1_constant"]
        assert out["value"] == out["linear_term"] + out["square_term"] + out[
            "conductor_term"
        ]

    def test_margin_rows_finite(self):
        delta = hecke_eigenforms(12, n_terms=1200)[0]
        g24 = hecke_eigenforms(24, n_terms=1200)
        rows = log_l_margin_rows(delta, g24, [144.0, 1000.0], 12.0)
        assert len(rows) == 4
        for row in rows:
            assert math.isfinite(row["margin"])
            assert row["margin"] == row["bound"] - row["log_l_value"]

    def test_validation(self):
        with pytest.raises(ValueError):
            log_l_upper_bound(0.0, 0.0, 1.5, 12.0)
        with pytest.raises(ValueError):
            log_l_upper_bound(0.0, 0.0, 100.0)
        with pytest.raises(ValueError):
            log_l_upper_bound(0.0, 0.0, 100.0, 12.0, log_k=5.0)


# ------------------------------------------------------ truncated exponential


class TestTruncatedExponential:
    def test_order_zero_and_zero_point(self):
        for x in (-5.0, -1.0, 0.0, 2.5):
            assert truncated_exp(0, x) == 1.0
        for ell in (0, 2, 10, 20):
            assert truncated_exp(ell, 0.0) == 1.0

    def test_instance_above_exponential(self):
        assert truncated_exp(10, -3.0) > math.exp(-3.0)

    def test_matches_exact_rational(self):
        for ell in (2, 8, 14):
            for x in (-7.5, -0.3, 1.25, 4.0):
                exact = float(truncated_exp_exact(ell, Fraction(x).limit_denominator(10**6)))
                # same argument for the float path
                xf = float(Fraction(x).limit_denominator(10**6))
                assert truncated_exp(ell, xf) == pytest.approx(exact, rel=1e-14)

    def test_odd_or_negative_order_rejected(self):
        for bad in (3, -2, 1, True):
            with pytest.raises(ValueError):
                truncated_exp(bad, 1.0)
            with pytest.raises(ValueError):
                truncated_exp_exact(bad, 1)

    def test_domination_certificates(self):
        for ell in range(2, 22, 2):
            for x in (0, -1, Fraction(-7, 2), -50):
                assert truncated_exp_dominates(ell, x)

    def test_domination_domain(self):
        with pytest.raises(ValueError):
            truncated_exp_dominates(4, 1)

    def test_exact_is_rational(self):
        val = truncated_exp_exact(4, Fraction(-1, 3))
        assert isinstance(val, Fraction)
        # 1 - 1/3 + 1/(2 9) - 1/(6 27) + 1/(24 81)
        assert val == 1 - Fraction(1, 3) + Fraction(1, 18) - Fraction(
            1, 162
        ) + Fraction(1, 1944)


# ----------------------------------------------------------- model prediction


class TestGaussianHeuristic:
    def test_algebraic_identity_random(self):
        rng = np.random.default_rng(42)
        primes = primes_up_to(500)
        for _ in range(20):
            lam = rng.uniform(-2, 2, size=len(primes))
            out = gaussian_heuristic_prediction(lam, 500.0)
            ident = 2.0 * math.fsum(
                (l * l - 1.0) / p for l, p in zip(lam, primes)
            )
            assert abs(out["mu"] + out["sigma2"] / 2.0 - ident) < 1e-12
            assert out["prediction"] == pytest.approx(out["simplified"], rel=1e-12)

    def test_zero_eigenvalues(self):
        primes = primes_up_to(1000)
        out = gaussian_heuristic_prediction(0.0, 1000.0)
        assert out["sigma2"] == 0.0
        assert out["mu"] == pytest.approx(
            -2.0 * math.fsum(1.0 / p for p in primes), rel=1e-15
        )

    def test_discriminant_form_order_of_magnitude(self):
        delta = hecke_eigenforms(12, n_terms=1200)[0]
        out = gaussian_heuristic_prediction(delta, 10_000.0)
        target = sym_square_L1(delta) ** 2
        assert target / 3.0 < out["prediction"] < target * 3.0


# ------------------------------------------------------------ chain validator


class TestChainValidator:
    def test_step_algebra(self):
        # t_j <= -4/beta_j is algebraically equivalent to
        # log(beta_{j+1}) <= -800 C; confirm on the desk ladder
        params = desk_params()
        report = chain_validator(params)
        for row in report["rows"]:
            lhs = row["log_term"] <= row["target"]
            rhs = math.log(row["beta_next"]) <= -800.0 * CHAIN_CONSTANT
            assert lhs == rhs == row["passes"]
            expect_t = 6.0 / row["beta_j"] + math.log(row["beta_next"]) / (
                80.0 * CHAIN_CONSTANT * row["beta_j"]
            )
            assert row["log_term"] == pytest.approx(expect_t, rel=1e-15)

    def test_desk_ladder_fails(self):
        report = chain_validator(desk_params())
        assert len(report["rows"]) == desk_params().I - 1
        assert not report["all_rows_pass"]

    def test_minimal_exponent_value(self):
        report = chain_validator(desk_params())
        expect = 800.0 * 2.0**5 * 10.0 / math.e
        assert report["minimal_exponent"] == pytest.approx(expect, rel=1e-15)
        assert abs(report["minimal_exponent"] - 9.4e4) / 9.4e4 < 0.01
        assert report["minimal_exponent_guaranteed"] == pytest.approx(
            expect + math.log(20.0), rel=1e-15
        )

    def test_minimal_exponent_bisection_oracle(self):
        # independent check: bisect the symbolic pass condition for the top
        # rung (worst case beta_I = 20 e^{-T}) and compare
        def passes(T):
            return math.log(20.0) - T <= -800.0 * CHAIN_CONSTANT

        lo, hi = 1.0, 1e6
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if passes(mid):
                hi = mid
            else:
                lo = mid
        report = chain_validator(desk_params())
        assert hi == pytest.approx(report["minimal_exponent_guaranteed"], rel=1e-9)

    def test_reference_exponents(self):
        report = chain_validator(desk_params())
        checks = report["exponent_checks"]
        assert checks[10**5]["passes"] is True
        assert checks[10**4]["passes"] is False

    def test_geometric_sum_finite(self):
        report = chain_validator(desk_params())
        assert math.isfinite(report["log_geometric_sum"])
        assert report["log_geometric_sum"] < 0.0
        direct = math.log(
            math.fsum(
                math.exp(-4.0 / b) for b in desk_params().beta[1 : desk_params().I]
            )
        )
        assert report["log_geometric_sum"] == pytest.approx(direct, rel=1e-12)

    def test_table_rows_schema(self):
        rows = chain_table_rows(chain_validator(desk_params()))
        assert rows
        assert set(rows[0]) == {"j", "beta_j", "term", "log_term", "pass"}

    def test_validation(self):
        with pytest.raises(ValueError):
            chain_validator(desk_params(), C_const=0.0)


# -------------------------------------------------------------- moment bound


class TestMarkovMomentBound:
    def test_regime_instance(self):
        # loglog k = 10 exactly, V on the regime edge
        log_k = math.exp(10.0)
        V = 1e31
        bound = markov_moment_bound(V, log_k)
        assert bound <= -3.0 * V

    def test_doubling_deepens(self):
        log_k = math.exp(10.0)
        for V in (1e31, 5e31):
            b1 = markov_moment_bound(V, log_k)
            b2 = markov_moment_bound(2.0 * V, log_k)
            assert b2 <= 2.0 * b1

    def test_formula_direct(self):
        V, log_k = 400.0, 1000.0
        n = math.floor(V / 20.0)
        llk = math.log(log_k)
        expect = n * (
            8.0 * math.log(2.0)
            + math.log(n)
            + math.log(llk)
            - 2.0 * math.log(V)
            - 1.0
        )
        assert markov_moment_bound(V, log_k) == pytest.approx(expect, rel=1e-15)

    def test_report_only_below_regime(self):
        # below the regime: value returned, no guarantee enforced
        assert math.isfinite(markov_moment_bound(40.0, 100.0))

    def test_certificate(self):
        cert = markov_regime_certificate()
        assert cert["ok"]
        direct = math.log(2.0**8 / (20.0 * 1e30 * math.e))
        assert cert["log_ratio"] == pytest.approx(direct, rel=1e-12)
        assert cert["log_ratio"] <= -60.0

    def test_validation(self):
        with pytest.raises(ValueError):
            markov_moment_bound(10.0, 100.0)
        with pytest.raises(ValueError):
            markov_moment_bound(100.0, 1.0)


# -------------------------------------------------------------- report helpers


class TestReportHelpers:
    def test_exceptional_measure_corrected_power(self):
        # at log_k = 1e9: L = 3, and the corrected L-th power meets the
        # claimed decay while the literal unpowered product does not —
        # the power is what makes the bound work
        params = partition_params(1e9, 2.0)
        rep = exceptional_measure_report(params)
        assert rep["L"] == 3
        assert rep["meets_claim"]
        assert rep["log_bound"] <= rep["log_claimed"]
        assert rep["log_bound_unpowered"] > rep["log_claimed"]

    def test_exceptional_measure_degenerate_power(self):
        # small ladders give L = 0: the bound degrades to the class count
        params = partition_params(500.0, 2.0)
        rep = exceptional_measure_report(params)
        assert rep["L"] == 0
        assert rep["log_bound"] == pytest.approx(math.log(params.I), abs=0.0)

    def test_exceptional_measure_base_near_design_point(self):
        # with s1 = 16 loglog k and L ~ 1/(C beta_1) the base approaches
        # 2^5/(C e) = 1/10 as the ladder grows
        params = partition_params(1e300, 2.0)
        rep = exceptional_measure_report(params)
        assert rep["base"] == pytest.approx(0.1, rel=0.05)

    def test_fourth_power_product_finite_and_reproducible(self):
        delta = hecke_eigenforms(12, n_terms=1200)[0]
        params = desk_params()
        a = fourth_power_product_report(delta, params.x(1))
        b = fourth_power_product_report(delta, params.x(1))
        assert a == b
        assert 0.0 < a["product"] < math.inf
        assert a["log_product"] == pytest.approx(
            a["log_factor_one"] + a["log_factor_two"], abs=0.0
        )
        with pytest.raises(ValueError):
            fourth_power_product_report(delta, 1.0)

    def test_sym_ratio_report_fields(self):
        delta = hecke_eigenforms(12, n_terms=1200)[0]
        rep = sym_ratio_report(delta, 10_000.0)
        assert rep["l_value"] == pytest.approx(sym_square_L1(delta), rel=1e-12)
        assert rep["l_inverse"] == pytest.approx(1.0 / rep["l_value"], rel=1e-15)
        primes = primes_up_to(100)
        expect = math.exp(
            2.0 * math.fsum((delta.lam(p) ** 2 - 1.0) / p for p in primes)
        )
        assert rep["exp_factor"] == pytest.approx(expect, rel=1e-12)
        assert rep["ratio_over_l_squared"] == pytest.approx(
            rep["exp_factor"] / rep["l_value"] ** 2, rel=1e-15
        )
        with pytest.raises(ValueError):
            sym_ratio_report(delta, 3.0)
