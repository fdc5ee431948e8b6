"""Prime-number plumbing shared across the package.

Everything here is exact integer arithmetic: a numpy sieve for bulk
enumeration, a deterministic Miller-Rabin test for spot checks, and
trial-division factorization for the small integers that index moment
functions.
"""

import numpy as np

__all__ = [
    "sieve",
    "primes_up_to",
    "primes_in",
    "is_prime",
    "factorize",
]

# Witnesses proving primality for every n < 3.3e24 (Sorenson-Webster).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def sieve(limit):
    """Boolean array s of length limit+1 with s[n] true iff n is prime."""
    if limit < 0:
        raise ValueError("limit must be nonnegative")
    s = np.ones(limit + 1, dtype=bool)
    s[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if s[p]:
            s[p * p :: p] = False
    return s


def primes_up_to(limit):
    """All primes <= limit as a Python list of ints."""
    if limit < 2:
        return []
    return [int(p) for p in np.nonzero(sieve(int(limit)))[0]]


def primes_in(lo, hi):
    """Primes in the half-open window (lo, hi]."""
    if hi <= lo:
        return []
    return [p for p in primes_up_to(int(np.floor(hi))) if p > lo]


def is_prime(n):
    """Deterministic Miller-Rabin, exact for all n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n):
    """Trial-division factorization of n >= 1 as a list of (prime, exponent)."""
    n = int(n)
    if n < 1:
        raise ValueError("can only factor positive integers")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out
