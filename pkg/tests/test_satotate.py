"""Oracle tests for the Sato-Tate family model."""

import math

import mpmath
import numpy as np
import pytest

from momentlab.hecke import PrimeFactorization, catalan, lambda_moment, lambda_square_moment
from momentlab.satotate import (
    FamilySample,
    block_rng,
    exp_moment_exact,
    load_family,
    mixed_moment,
    model_expectation_product,
    sample_family,
    sample_lambda,
    sample_lambda_block,
    st_moment_exact,
)


def test_moment_quadrature_matches_catalan():
    for power in range(0, 25):
        value = st_moment_exact(power)
        if power % 2 == 0:
            assert abs(value - catalan(power // 2)) < 1e-12 * max(1, catalan(power // 2))
        else:
            assert abs(value) < 1e-12 * 2.0**power


def test_moment_examples():
    assert abs(st_moment_exact(0) - 1.0) < 1e-12
    assert abs(st_moment_exact(6) - 5.0) < 1e-11
    assert abs(st_moment_exact(7)) < 1e-10


def test_moment_power_cap():
    with pytest.raises(ValueError):
        st_moment_exact(41)


def test_exp_moment_against_bessel_oracle():
    # E[e^{a lambda}] = I_1(2a)/a; mpmath supplies the independent value.
    for a in (0.5, 2.0, 10.0, 50.0, -3.0, -50.0):
        expected = float(mpmath.besseli(1, 2 * a) / a)
        got = exp_moment_exact(a)
        assert abs(got - expected) <= 1e-10 * abs(expected)


def test_exp_moment_small_a_taylor():
    a = 1e-3
    got = exp_moment_exact(a)
    assert abs(got - (1 + a * a / 2)) < 1e-9
    assert abs(exp_moment_exact(0.0) - 1.0) < 1e-12


def test_exp_moment_convexity_floor():
    for a in np.linspace(-6, 6, 13):
        assert exp_moment_exact(float(a)) >= 1.0 - 1e-12


def test_exp_moment_domain():
    with pytest.raises(ValueError):
        exp_moment_exact(50.5)


def test_sampler_determinism_and_range():
    fam1 = sample_family(10, 2, seed=7)
    fam2 = sample_family(10, 2, seed=7)
    assert fam1.primes == (2, 3, 5, 7)
    assert np.array_equal(fam1.values, fam2.values)
    fam3 = sample_family(10, 2, seed=8)
    assert not np.array_equal(fam1.values, fam3.values)
    big = sample_family(100, 5000, seed=11)
    assert big.values.min() >= -2.0 and big.values.max() <= 2.0


def test_sampler_block_splitting_is_stable():
    # Rows only depend on their own block, so a longer family extends a
    # shorter one without disturbing shared rows.
    small = sample_family(30, 100, seed=3)
    large = sample_family(30, 5000, seed=3)
    assert np.array_equal(small.values, large.values[:100])


def test_single_draw_matches_stream():
    rng = block_rng(5, 0)
    first = sample_lambda(rng)
    rng2 = block_rng(5, 0)
    assert first == sample_lambda_block(rng2, 4)[0]


def test_empirical_moments_one_seed():
    draws = sample_lambda_block(block_rng(20240811, 0), 10**6)
    n = draws.size
    for power, exact in ((1, 0.0), (2, 1.0), (4, 2.0)):
        vals = draws**power
        err = vals.std(ddof=1) / math.sqrt(n)
        assert abs(vals.mean() - exact) < 3 * err


def test_family_column_means_one_seed():
    fam = sample_family(100, 10**6, seed=424242)
    n = fam.n_forms
    means = fam.values.mean(axis=0)
    stderr = fam.values.std(axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(means) < 3 * stderr)
    centered = fam.values**2 - 1.0
    means2 = centered.mean(axis=0)
    stderr2 = centered.std(axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(means2) < 3 * stderr2)


def test_family_domain_errors():
    with pytest.raises(ValueError):
        sample_family(1.5, 3, seed=0)
    with pytest.raises(ValueError):
        sample_family(10, 0, seed=0)


def test_family_csv_roundtrip(tmp_path):
    fam = sample_family(20, 7, seed=99)
    path = tmp_path / "family.csv"
    fam.write(path)
    back = load_family(path)
    assert back.primes == fam.primes
    assert back.seed == fam.seed
    assert back.sampler_id == fam.sampler_id
    assert np.array_equal(back.values, fam.values)


def test_family_value_validation():
    with pytest.raises(ValueError):
        FamilySample(primes=(2,), values=np.array([[2.5]]), seed=0)


def test_mixed_moment_unit_cases():
    assert abs(model_expectation_product([]) - 1.0) < 1e-15
    assert abs(model_expectation_product([(0, 0)]) - 1.0) < 1e-12
    assert abs(model_expectation_product([(2, 0)]) - 1.0) < 1e-12
    assert abs(model_expectation_product([(0, 1)])) < 1e-12


def test_model_equals_moment_functions_on_monomials():
    # E[prod lambda(p_i)^{a_i} (lambda(q_j)^2-1)^{b_j}] with distinct primes
    # equals lambda_moment(prod p^a) * lambda_square_moment(prod q^b).
    rng = np.random.default_rng(31415)
    for _ in range(40):
        a_powers = [int(x) for x in rng.integers(0, 7, size=2)]
        b_powers = [int(x) for x in rng.integers(0, 4, size=2)]
        model = model_expectation_product(
            [(a, 0) for a in a_powers] + [(0, b) for b in b_powers]
        )
        pf_a = tuple((p, a) for p, a in zip((2, 3), a_powers) if a > 0)
        pf_b = tuple((p, b) for p, b in zip((5, 7), b_powers) if b > 0)
        exact = lambda_moment(PrimeFactorization(pf_a)) * lambda_square_moment(
            PrimeFactorization(pf_b)
        )
        assert abs(model - exact) < 1e-9 * max(1.0, abs(exact))


def test_mixed_moment_handles_joint_powers():
    # E[lambda^2 (lambda^2-1)] = E[lambda^4] - E[lambda^2] = 2 - 1.
    assert abs(mixed_moment(2, 1) - 1.0) < 1e-12


def test_variance_law_exact_model():
    # Var[sum u(p) lambda(p)/sqrt(p)] = sum u(p)^2/p in the independent model.
    primes = (2, 3, 5, 7, 11)
    u = {2: 1.3, 3: -0.4, 5: 2.0, 7: 0.9, 11: -1.7}
    second = 0.0
    for p in primes:
        coeff = u[p] / math.sqrt(p)
        second += coeff**2 * mixed_moment(2, 0)
    expected = sum(u[p] ** 2 / p for p in primes)
    assert abs(second - expected) < 1e-12
