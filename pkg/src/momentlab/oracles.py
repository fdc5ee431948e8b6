"""Brute-force evaluators for the prime-tuple moment inequalities.

The family average of a product of Dirichlet polynomials over primes reduces
to weighted tuple sums against the moment functions lambda_moment (supported
on squares) and lambda_square_moment (supported on squarefull numbers).  This
module evaluates those sums two independent ways:

  direct     raw loop over all n-tuples of primes in the window;
  partition  regroup tuples by their multiset of distinct primes and count
             them with multinomial coefficients.

Both run in exact rational arithmetic: every weight is converted exactly to a
Fraction (floats are dyadic rationals), and surviving tuples have square or
squarefull products, so no irrational square roots appear.  The stated upper
bounds are evaluated the same way, which makes every <= verdict an exact
integer comparison rather than a float one.
"""

import itertools
import math
from fractions import Fraction
from math import comb, factorial

from .hecke import catalan, single_prime_square_moment
from .primes import primes_in
from .satotate import mixed_moment

__all__ = [
    "DIRECT_TUPLE_CAP",
    "prime_tuple_sum",
    "prime_tuple_bound",
    "square_tuple_sum",
    "square_tuple_bound",
    "mixed_moment_bound",
    "model_power_expectation",
    "verify_lemma_instance",
]

# Hard enumeration ceiling for direct mode; auto mode switches to partition
# mode far earlier because exact-rational tuple loops are the slow path.
DIRECT_TUPLE_CAP = 10**8
_AUTO_DIRECT_CAP = 200_000


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x)  # exact for floats: they are dyadic rationals


def _weights(primes, u):
    getter = u if callable(u) else u.__getitem__
    return {p: _frac(getter(p)) for p in primes}


def _window_primes(window):
    lo, hi = window
    return primes_in(lo, hi)


def _compositions(total, parts, minimum, parity_even):
    """Ordered compositions of `total` into `parts` parts >= minimum."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    start = minimum
    for first in range(start, total - minimum * (parts - 1) + 1):
        if parity_even and first % 2:
            continue
        for rest in _compositions(total - first, parts - 1, minimum, parity_even):
            yield (first,) + rest


def _multinomial(total, parts):
    out = factorial(total)
    for a in parts:
        out //= factorial(a)
    return out


def _h1_exponents(exponents):
    out = 1
    for a in exponents:
        if a % 2:
            return 0
        out *= catalan(a // 2)
    return out


def _h2_exponents(exponents):
    out = 1
    for b in exponents:
        out *= single_prime_square_moment(b)
        if out == 0:
            return 0
    return out


def _tuple_sum(primes, weights, length, moment_of_exponents, prime_power):
    # direct mode: raw loop over all tuples, exact arithmetic
    total = Fraction(0)
    for tup in itertools.product(primes, repeat=length):
        exps = {}
        for p in tup:
            exps[p] = exps.get(p, 0) + 1
        m = moment_of_exponents(exps.values())
        if m == 0:
            continue
        term = Fraction(m)
        for p, a in exps.items():
            term *= weights[p] ** a / Fraction(p) ** prime_power(a)
        total += term
    return total


def _partition_sum(primes, weights, length, moment_of_exponents, prime_power, min_part, parity_even):
    # partition mode: distinct primes q_1 < ... < q_r with multiplicities
    total = Fraction(0)
    max_parts = length // min_part
    for r in range(1, min(max_parts, len(primes)) + 1):
        comps = list(_compositions(length, r, min_part, parity_even))
        if not comps:
            continue
        for qs in itertools.combinations(primes, r):
            for alphas in comps:
                m = moment_of_exponents(alphas)
                if m == 0:
                    continue
                term = Fraction(m * _multinomial(length, alphas))
                for q, a in zip(qs, alphas):
                    term *= weights[q] ** a / Fraction(q) ** prime_power(a)
                total += term
    return total


def _choose_strategy(strategy, n_primes, length):
    if strategy == "auto":
        return "direct" if n_primes**length <= _AUTO_DIRECT_CAP else "partition"
    if strategy == "direct" and n_primes**length > DIRECT_TUPLE_CAP:
        raise ValueError("direct enumeration above the tuple cap; use partition mode")
    return strategy


def prime_tuple_sum(window, u, n, strategy="auto"):
    """Exact sum over n-tuples from the window of u(p_1)...u(p_n)/sqrt(p_1...p_n)
    times the lambda-product moment of p_1...p_n.  Returns a Fraction.

    Only tuples with square product survive, so the square root is exact.
    """
    primes = _window_primes(window)
    if not primes or n == 0:
        return Fraction(1) if n == 0 else Fraction(0)
    weights = _weights(primes, u)
    mode = _choose_strategy(strategy, len(primes), n)
    half = lambda a: Fraction(a, 2)
    if mode == "direct":
        return _tuple_sum(primes, weights, n, _h1_exponents, half)
    return _partition_sum(primes, weights, n, _h1_exponents, half, 2, True)


def prime_tuple_bound(window, u, n):
    """n!/(2^{n/2}(n/2)!) (sum u(p)^2/p)^{n/2}, exact; defined for even n."""
    if n % 2:
        raise ValueError("bound stated only for even tuple lengths")
    primes = _window_primes(window)
    weights = _weights(primes, u)
    base = sum((weights[p] ** 2 / p for p in primes), Fraction(0))
    return Fraction(factorial(n), 2 ** (n // 2) * factorial(n // 2)) * base ** (n // 2)


def square_tuple_sum(m, w, M, strategy="auto"):
    """Exact sum over 2M-tuples from (2^m, 2^{m+1}] of w(p_1)...w(p_2M)/(p_1...p_2M)
    times the lambda-square-product moment.  Returns a Fraction."""
    primes = _window_primes((2**m, 2 ** (m + 1)))
    if not primes or M == 0:
        return Fraction(1) if M == 0 else Fraction(0)
    weights = _weights(primes, w)
    length = 2 * M
    mode = _choose_strategy(strategy, len(primes), length)
    linear = lambda a: Fraction(a)
    if mode == "direct":
        return _tuple_sum(primes, weights, length, _h2_exponents, linear)
    return _partition_sum(primes, weights, length, _h2_exponents, linear, 2, False)


def square_tuple_bound(m, C, M):
    """(2M)!/M! (72 C^2/2^m)^M, exact in C."""
    C = _frac(C)
    return Fraction(factorial(2 * M), factorial(M)) * (72 * C**2 / 2**m) ** M


def mixed_moment_bound(windows, squared_window=None):
    """Product bound for a mixed family moment.

    `windows` is a list of (window, u, n_i); any odd n_i makes the bound 0.
    `squared_window` is (m, C, M) or None.
    """
    out = Fraction(1)
    for window, u, n in windows:
        if n % 2:
            return Fraction(0)
        if n:
            out *= prime_tuple_bound(window, u, n)
    if squared_window is not None:
        m, C, M = squared_window
        if M:
            out *= square_tuple_bound(m, C, M)
    return out


def model_power_expectation(window, u, n):
    """E[(sum_p u(p) lambda(p)/sqrt(p))^n] in the independent model.

    Same partition enumeration as prime_tuple_sum but with quadrature moments
    in place of the exact Catalan factors, so agreement between the two is the
    model-equivalence statement.  Returns a float.
    """
    primes = _window_primes(window)
    if n == 0:
        return 1.0
    if not primes:
        return 0.0
    getter = u if callable(u) else u.__getitem__
    total = 0.0
    for r in range(1, min(n, len(primes)) + 1):
        comps = [c for c in _compositions(n, r, 1, False)]
        for qs in itertools.combinations(primes, r):
            for alphas in comps:
                moment = 1.0
                for a in alphas:
                    moment *= mixed_moment(a, 0)
                    if moment == 0.0:
                        break
                if moment == 0.0:
                    continue
                term = moment * _multinomial(n, alphas)
                for q, a in zip(qs, alphas):
                    term *= float(getter(q)) ** a / q ** (a / 2)
                total += term
    return total


def verify_lemma_instance(lemma_id, config):
    """Evaluate one inequality instance exactly and report it.

    lemma ids: 'combinato' (prime tuples), 'combinato2' (prime-square tuples),
    'gaussian' (mixed product).  The verdict compares |lhs| <= bound in exact
    rational arithmetic; lhs/bound/slack are also reported as floats plus
    exact numerator/denominator strings.
    """
    if lemma_id == "combinato":
        window, u, n = config["window"], config["u"], config["n"]
        lhs = prime_tuple_sum(window, u, n, strategy=config.get("strategy", "auto"))
        bound = prime_tuple_bound(window, u, n) if n % 2 == 0 else Fraction(0)
    elif lemma_id == "combinato2":
        m, w, M = config["m"], config["w"], config["M"]
        lhs = square_tuple_sum(m, w, M, strategy=config.get("strategy", "auto"))
        cap = config.get("C")
        if cap is None:
            primes = _window_primes((2**m, 2 ** (m + 1)))
            weights = _weights(primes, w)
            cap = max((abs(v) for v in weights.values()), default=Fraction(0))
        bound = square_tuple_bound(m, cap, M)
    elif lemma_id == "gaussian":
        windows = config["windows"]
        squared = config.get("squared")
        lhs = Fraction(1)
        for window, u, n in windows:
            lhs *= prime_tuple_sum(window, u, n)
        if squared is not None:
            m, w, M = squared["m"], squared["w"], squared["M"]
            lhs *= square_tuple_sum(m, w, M)
            cap = squared.get("C")
            if cap is None:
                primes = _window_primes((2**m, 2 ** (m + 1)))
                weights = _weights(primes, w)
                cap = max((abs(v) for v in weights.values()), default=Fraction(0))
            squared_bound_args = (m, cap, M)
        else:
            squared_bound_args = None
        bound = mixed_moment_bound(windows, squared_bound_args)
    else:
        raise ValueError(f"unknown lemma id: {lemma_id!r}")

    slack = bound - abs(lhs)
    return {
        "lemma": lemma_id,
        "config": _describe_config(config),
        "lhs": float(lhs),
        "bound": float(bound),
        "slack": float(slack),
        "ratio": float(abs(lhs) / bound) if bound else (0.0 if lhs == 0 else math.inf),
        "pass": abs(lhs) <= bound,
        "lhs_exact": f"{lhs.numerator}/{lhs.denominator}",
        "bound_exact": f"{bound.numerator}/{bound.denominator}",
    }


def _describe_config(config):
    # JSON-friendly echo of the instance configuration
    def clean(value):
        if isinstance(value, Fraction):
            return f"{value.numerator}/{value.denominator}"
        if isinstance(value, dict):
            return {str(k): clean(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [clean(v) for v in value]
        if callable(value):
            return getattr(value, "__name__", "callable")
        return value

    return clean(config)
