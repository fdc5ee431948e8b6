"""Exact combinatorics of Hecke eigenvalue powers and family moment functions.

Normalized eigenvalues at a prime p satisfy lambda(p) = 2cos(theta_p) and
lambda(p^m) = sin((m+1)theta_p)/sin(theta_p), so any power lambda(p)^alpha is an
integer combination of the lambda(p^m).  This module computes those integer
coefficients, and the two multiplicative moment functions they induce on the
family average:

  lambda_moment(n)        the average of prod lambda(p_i)^{alpha_i}, which is
                          prod alpha_i!/((alpha_i/2)!^2 (alpha_i/2+1)) on squares
                          (a product of Catalan numbers) and 0 otherwise;
  lambda_square_moment(n) the average of prod lambda(p_i^2)^{beta_i}, via
                          lambda(p^2) = lambda(p)^2 - 1 and the binomial theorem.

Everything is exact big-integer arithmetic; the only floats near this module
live in its oracle tests.
"""

from dataclasses import dataclass
from math import comb, factorial

from .primes import factorize, is_prime

__all__ = [
    "POWER_CAP",
    "PrimeFactorization",
    "HeckeExpansion",
    "catalan",
    "lambda_moment",
    "lambda_square_moment",
    "single_prime_square_moment",
    "expand_lambda_power",
    "expand_lambda_square_power",
]

# Coefficients grow factorially; nothing downstream needs powers beyond this.
POWER_CAP = 64


@dataclass(frozen=True)
class PrimeFactorization:
    """A positive integer as ((p1, a1), (p2, a2), ...) with p1 < p2 < ...."""

    factors: tuple

    def __post_init__(self):
        prev = 1
        for p, a in self.factors:
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")
            if p <= prev:
                raise ValueError("primes must be strictly increasing")
            if a < 1:
                raise ValueError("exponents must be >= 1")
            prev = p

    @classmethod
    def from_int(cls, n):
        return cls(tuple(factorize(n)))

    @classmethod
    def parse(cls, text):
        """Parse '2^4*3^2', '2*5', or a plain integer like '360'."""
        text = text.strip()
        if "^" not in text and "*" not in text:
            return cls.from_int(int(text))
        factors = []
        for part in text.split("*"):
            if "^" in part:
                base, _, exp = part.partition("^")
                factors.append((int(base), int(exp)))
            else:
                factors.append((int(part), 1))
        factors.sort()
        return cls(tuple(factors))

    @property
    def value(self):
        n = 1
        for p, a in self.factors:
            n *= p**a
        return n

    def __str__(self):
        if not self.factors:
            return "1"
        return "*".join(f"{p}^{a}" if a > 1 else str(p) for p, a in self.factors)


def catalan(m):
    """(2m)!/(m!(m+1)!), the m-th Catalan number, exact."""
    if m < 0 or m > POWER_CAP:
        raise ValueError(f"need 0 <= m <= {POWER_CAP}")
    return comb(2 * m, m) // (m + 1)


def lambda_moment(n):
    """Family average of prod lambda(p_i)^{alpha_i} for n = prod p_i^{alpha_i}.

    Vanishes unless every exponent is even; on squares it is the product of
    alpha_i!/((alpha_i/2)!^2 (alpha_i/2+1)) = catalan(alpha_i/2) over i.
    """
    if not isinstance(n, PrimeFactorization):
        n = PrimeFactorization(tuple(n))
    out = 1
    for _, a in n.factors:
        if a % 2:
            return 0
        out *= factorial(a) // (factorial(a // 2) ** 2 * (a // 2 + 1))
    return out


def single_prime_square_moment(beta):
    """beta-th family moment of lambda(p)^2 - 1 at a single prime, exact.

    Equals sum_k binom(beta,k) (-1)^k (2(beta-k))!/((beta-k)!(beta-k+1)!);
    zero at beta = 1.
    """
    total = 0
    for k in range(beta + 1):
        j = beta - k
        total += (-1) ** k * comb(beta, k) * (factorial(2 * j) // (factorial(j) * factorial(j + 1)))
    return total


def lambda_square_moment(n):
    """Family average of prod lambda(p_i^2)^{beta_i} for n = prod p_i^{beta_i}.

    Multiplicative; the single-prime factor is the beta-th moment of
    lambda(p)^2 - 1, so it vanishes whenever some beta_i = 1 and is bounded
    by 3^{beta_i} in absolute value.
    """
    if not isinstance(n, PrimeFactorization):
        n = PrimeFactorization(tuple(n))
    out = 1
    for _, b in n.factors:
        out *= single_prime_square_moment(b)
        if out == 0:
            return 0
    return out


@dataclass(frozen=True)
class HeckeExpansion:
    """Exact integer coefficients of lambda(p)^alpha over the lambda(p^m).

    For even alpha:  lambda^alpha = A + sum_{l=1}^{alpha/2} C(l) lambda(p^{2l})
    and even_part = (A, (C(1), ..., C(alpha/2))).
    For odd alpha:   lambda^alpha = B lambda(p) + sum_{l=1}^{(alpha-1)/2} D(l) lambda(p^{2l+1})
    and odd_part = (B, (D(1), ..., D((alpha-1)/2))).
    Exactly one part is populated.
    """

    alpha: int
    even_part: tuple = None
    odd_part: tuple = None

    def __post_init__(self):
        if (self.even_part is None) == (self.odd_part is None):
            raise ValueError("exactly one of even_part/odd_part must be set")
        if (self.alpha % 2 == 0) != (self.even_part is not None):
            raise ValueError("populated part must match the parity of alpha")

    def coefficients(self):
        """Mapping m -> integer coefficient of lambda(p^m), zeros omitted."""
        if self.even_part is not None:
            head, tail = self.even_part
            out = {0: head}
            out.update({2 * l: c for l, c in enumerate(tail, start=1)})
        else:
            head, tail = self.odd_part
            out = {1: head}
            out.update({2 * l + 1: c for l, c in enumerate(tail, start=1)})
        return out

    def evaluate(self, lambda_of_power):
        """Substitute numeric values lambda(p^m) = lambda_of_power(m)."""
        return sum(c * lambda_of_power(m) for m, c in self.coefficients().items())

    def degenerate_value(self):
        """Substitution lambda(p^m) -> m+1 (theta=0); must equal 2^alpha."""
        return sum(c * (m + 1) for m, c in self.coefficients().items())


def expand_lambda_power(alpha):
    """Exact expansion of lambda(p)^alpha in the lambda(p^m) basis.

    Coefficients follow the factorial closed forms
      A = a!/((a/2)!^2 (a/2+1)),        C(l) = a!(2l+1)/((a/2-l)!(a/2+l+1)!),
      B = 2a!/(((a-1)/2)!((a+3)/2)!),   D(l) = a!(2l+2)/(((a-1)/2-l)!((a+3)/2+l)!),
    all nonnegative integers.
    """
    if alpha < 1 or alpha > POWER_CAP:
        raise ValueError(f"need 1 <= alpha <= {POWER_CAP}")
    a = alpha
    fa = factorial(a)
    if a % 2 == 0:
        half = a // 2
        head = fa // (factorial(half) ** 2 * (half + 1))
        tail = tuple(
            fa * (2 * l + 1) // (factorial(half - l) * factorial(half + l + 1))
            for l in range(1, half + 1)
        )
        return HeckeExpansion(alpha=a, even_part=(head, tail))
    half = (a - 1) // 2
    head = 2 * fa // (factorial(half) * factorial(half + 2))
    tail = tuple(
        fa * (2 * l + 2) // (factorial(half - l) * factorial(half + l + 2))
        for l in range(1, half + 1)
    )
    return HeckeExpansion(alpha=a, odd_part=(head, tail))


def expand_lambda_square_power(beta):
    """Binomial expansion of (lambda(p)^2 - 1)^beta.

    Returns [(sign, coefficient, power)] with sign in {+1,-1}, coefficient a
    positive integer, and power the (even) exponent on lambda(p), ordered by
    descending power.  Evaluating each term's lambda-power moment and summing
    reproduces lambda_square_moment(p^beta).
    """
    if beta < 1 or beta > POWER_CAP:
        raise ValueError(f"need 1 <= beta <= {POWER_CAP}")
    return [((-1) ** k, comb(beta, k), 2 * (beta - k)) for k in range(beta + 1)]
