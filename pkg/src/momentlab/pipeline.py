"""Window partitions, threshold classification, and inequality-chain audits.

This module turns the bounded-fourth-moment argument's bookkeeping into
executable arithmetic.  A nominal weight is represented throughout by its
logarithm ``log_k`` (a plain real), so every computation here runs equally
well at weights far beyond any computable eigenform — the point is to audit
the *arithmetic* of the argument, not to recompute modular forms.

The pieces, in the order they appear:

  partition_params        geometric ladder of window exponents beta_1..beta_I
                          with fixed ratio 20, cut off at a threshold;
  coefficient_system      smoothed prime weights u (linear windows) and
                          w (squared-prime windows) for a fixed source form;
  prime_dirichlet_poly / square_dirichlet_poly         the two Dirichlet-polynomial statistics of a form
                          against those weights;
  classify_family         exact threshold comparisons splitting a family into
                          the well-behaved class and exceptional classes, with
                          partition invariants checked from the definitions;
  log_l_upper_bound             the explicit conditional upper bound for a central
                          L-value proxy, with its unspecified O(1) surfaced
                          as a caveat instead of folded into the number;
  truncated_exp (+ exact kin)   truncated exponential series, including an exact
                          rational check that even truncations dominate e^x
                          on the negative axis;
  gaussian_heuristic_prediction
                          the lognormal main-term prediction e^{mu+sigma^2/2}
                          and its simplified per-prime form;
  chain_validator         the step inequalities of the final summation chain,
                          evaluated in log-space, with the minimal passing
                          threshold exponent derived rather than assumed;
  markov_moment_bound     the tail moment bound (2^8 n loglog k / (V^2 e))^n
                          in log-space, with its regime guarantee asserted;
  report helpers          finite-size instantiations of the measure bound for
                          the worst exceptional class, the two-factor
                          technical product, and the symmetric-square ratio,
                          all reported rather than asserted.
"""

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .primes import primes_up_to
from .forms.eigen import EigenformData
from .forms.petersson import prime_lambda_values, sym_square_L1, watson_L_value
from .satotate import FamilySample

__all__ = [
    "DEFAULT_THRESHOLD_EXPONENT",
    "CHAIN_CONSTANT",
    "PartitionParams",
    "partition_params",
    "CoefficientSystem",
    "coefficient_system",
    "prime_dirichlet_poly",
    "square_dirichlet_poly",
    "ClassificationReport",
    "classify_family",
    "log_l_upper_bound",
    "log_l_margin_rows",
    "truncated_exp",
    "truncated_exp_exact",
    "truncated_exp_dominates",
    "gaussian_heuristic_prediction",
    "chain_validator",
    "chain_table_rows",
    "markov_moment_bound",
    "markov_regime_certificate",
    "exceptional_measure_report",
    "fourth_power_product_report",
    "sym_ratio_report",
]

# Desk-scale default: small enough that several windows fit below the cutoff
# at computable sizes, so the multi-window machinery actually runs.
DEFAULT_THRESHOLD_EXPONENT = 2.0

# The constant driving the final summation chain: 2^5 * 10 / e.
CHAIN_CONSTANT = 2.0**5 * 10.0 / math.e

# Largest top window materialized automatically when no prime cap is given.
_AUTO_PRIME_CAP = 5_000_000

_LOG_20 = math.log(20.0)
_DELIGNE_SLACK = 1e-9


# --------------------------------------------------------------- partitions


@dataclass(frozen=True)
class PartitionParams:
    """Geometric ladder of window exponents for a nominal weight.

    ``beta`` holds (beta_0, beta_1, ..., beta_I) with beta_0 = 0,
    beta_1 = 1/(loglog k)^2 and fixed ratio beta_{i+1}/beta_i = 20.  The top
    index I is the first rung strictly above exp(-threshold_exponent); when
    already the first rung exceeds the cutoff, I = 1 (empty-set convention).
    The i-th window in prime space is (x_{i-1}, x_i] with x_i = k^{beta_i},
    handled in log-space as log x_i = beta_i * log k.
    """

    log_k: float
    threshold_exponent: float
    beta: tuple

    @property
    def I(self):
        return len(self.beta) - 1

    @property
    def loglog_k(self):
        return math.log(self.log_k)

    @property
    def threshold(self):
        return math.exp(-self.threshold_exponent)

    def log_x(self, j):
        """log x_j = beta_j * log k (log x_0 = 0, i.e. x_0 = 1)."""
        if not 0 <= j <= self.I:
            raise ValueError(f"window index {j} outside 0..{self.I}")
        return self.beta[j] * self.log_k

    def x(self, j):
        """x_j = k^{beta_j}; overflows for windows beyond float range."""
        return math.exp(self.log_x(j))


def partition_params(log_k, threshold_exponent=DEFAULT_THRESHOLD_EXPONENT):
    """Build the window ladder for a nominal weight given by log_k.

    Requires log_k > e so that loglog k > 1.  The ladder starts at
    1/(loglog k)^2 and multiplies by exactly 20; it stops at the first rung
    strictly above exp(-threshold_exponent), which becomes beta_I.
    """
    if not isinstance(log_k, numbers.Real) or not log_k > math.e:
        raise ValueError("log_k must be a real number exceeding e")
    llk = math.log(log_k)
    cutoff = math.exp(-float(threshold_exponent))
    betas = [0.0, 1.0 / (llk * llk)]
    while betas[-1] <= cutoff:
        betas.append(betas[-1] * 20.0)
    return PartitionParams(
        log_k=float(log_k),
        threshold_exponent=float(threshold_exponent),
        beta=tuple(betas),
    )


# ------------------------------------------------------- coefficient system


def _lambda_vector(source, primes):
    """Normalize a prime-eigenvalue source to a float64 array over `primes`.

    Accepts an eigenform record, a scalar (constant value at every prime),
    a dict {p: value} (missing primes read as 0), a callable p -> value, or
    an array/sequence already aligned with `primes`.
    """
    if isinstance(source, EigenformData):
        table_primes, lams = prime_lambda_values(source, int(primes[-1]))
        arr = np.asarray(lams, dtype=np.float64)
        if len(table_primes) != len(primes) or not np.array_equal(
            np.asarray(table_primes, dtype=np.int64), primes
        ):
            raise ValueError("eigenvalue table does not align with the prime grid")
        return arr
    if isinstance(source, numbers.Real):
        return np.full(len(primes), float(source))
    if isinstance(source, dict):
        return np.array([float(source.get(int(p), 0.0)) for p in primes])
    if callable(source):
        return np.array([float(source(int(p))) for p in primes])
    arr = np.asarray(source, dtype=np.float64)
    if arr.ndim != 1 or len(arr) != len(primes):
        raise ValueError(
            f"eigenvalue array has length {arr.shape}, expected {len(primes)}"
        )
    return arr


@dataclass(frozen=True, eq=False)
class CoefficientSystem:
    """Smoothed prime weights of a fixed source form on a window ladder.

    For each window index j = 1..I the arrays hold, per prime p in `primes`:

      u[j-1][p] = lam(p)^2 * p^{-1/log x_j} * log(x_j/p)/log x_j   (p <= x_j)
      w[j-1][p] = (lam(p)^2-2)^2 / (2 p^{2/log x_j})
                  * log(x_j/p^2)/log x_j                           (p^2 <= x_j)

    and 0 beyond the stated support.  `rows_covered` is the largest window
    index i whose full prime range (x_{i-1}, x_i] lies inside the table; at
    desk scale the upper windows are astronomically large, so statistics
    touching them can only be evaluated on the covered rows.
    """

    params: PartitionParams
    p_limit: int
    primes: np.ndarray
    log_primes: np.ndarray
    inv_sqrt_primes: np.ndarray
    lam: np.ndarray
    u: tuple
    w: tuple
    rows_covered: int

    def window_mask(self, i):
        """Boolean mask of primes in the i-th window (x_{i-1}, x_i]."""
        if not 1 <= i <= self.params.I:
            raise ValueError(f"window index {i} outside 1..{self.params.I}")
        return (self.log_primes > self.params.log_x(i - 1)) & (
            self.log_primes <= self.params.log_x(i)
        )

    def dyadic_mask(self, m):
        """Boolean mask of primes in the dyadic window (2^m, 2^{m+1}]."""
        if m < 0:
            raise ValueError("dyadic window index must be >= 0")
        return (self.primes > 2**m) & (self.primes <= 2 ** (m + 1))


def _window_covered(params, i, p_cap):
    """True when every prime of window i is <= p_cap (so the table has it)."""
    log_xi = params.log_x(i)
    if log_xi > math.log(p_cap) + 1.0:
        return False
    return math.floor(math.exp(log_xi)) <= p_cap


def coefficient_system(params, lam_f, p_limit=None):
    """Materialize the u/w weight arrays of a source form on a prime table.

    `lam_f` is any eigenvalue source accepted by the module (eigenform
    record, scalar, dict, callable, aligned array); values must respect the
    two-sided bound |lam| <= 2.  When `p_limit` is omitted, the table runs to
    x_I provided that stays under five million; otherwise an explicit cap is
    required, and windows beyond it simply stay uncovered.
    """
    log_xI = params.log_x(params.I)
    if p_limit is None:
        if log_xI > math.log(_AUTO_PRIME_CAP):
            raise ValueError(
                "top window exceeds the automatic prime cap; pass p_limit"
            )
        p_cap = math.floor(math.exp(log_xI))
    else:
        p_cap = int(p_limit)
        if log_xI <= math.log(p_cap):
            p_cap = min(p_cap, math.floor(math.exp(log_xI)))
    if p_cap < 2:
        raise ValueError("prime table is empty; raise p_limit")

    primes = np.asarray(primes_up_to(p_cap), dtype=np.int64)
    lam = _lambda_vector(lam_f, primes)
    if np.any(np.abs(lam) > 2.0 + _DELIGNE_SLACK):
        raise ValueError("eigenvalue source violates the two-sided bound |lam| <= 2")

    logs = np.log(primes.astype(np.float64))
    u_arrays = []
    w_arrays = []
    lam_sq = lam * lam
    w_base = (lam_sq - 2.0) ** 2 / 2.0
    for j in range(1, params.I + 1):
        lx = params.log_x(j)
        u_j = np.where(
            logs <= lx, lam_sq * np.exp(-logs / lx) * (lx - logs) / lx, 0.0
        )
        w_j = np.where(
            2.0 * logs <= lx,
            w_base * np.exp(-2.0 * logs / lx) * (lx - 2.0 * logs) / lx,
            0.0,
        )
        u_arrays.append(u_j)
        w_arrays.append(w_j)

    rows = 0
    while rows < params.I and _window_covered(params, rows + 1, p_cap):
        rows += 1

    return CoefficientSystem(
        params=params,
        p_limit=p_cap,
        primes=primes,
        log_primes=logs,
        inv_sqrt_primes=1.0 / np.sqrt(primes.astype(np.float64)),
        lam=lam,
        u=tuple(u_arrays),
        w=tuple(w_arrays),
        rows_covered=rows,
    )


# ------------------------------------------------------ Dirichlet statistics


def prime_dirichlet_poly(g, i, j, coeffs):
    """Linear-window statistic of g: sum over x_{i-1} < p <= x_i of
    u_j(p) * lam_g(p) / sqrt(p), for window indices 1 <= i <= j <= I."""
    params = coeffs.params
    if not 1 <= i <= j <= params.I:
        raise ValueError(f"need 1 <= i <= j <= {params.I}, got i={i}, j={j}")
    if i > coeffs.rows_covered:
        raise ValueError(
            f"window {i} is not covered by the prime table "
            f"(covered rows: {coeffs.rows_covered})"
        )
    mask = coeffs.window_mask(i)
    lam_g = _lambda_vector(g, coeffs.primes)
    terms = coeffs.u[j - 1][mask] * lam_g[mask] * coeffs.inv_sqrt_primes[mask]
    return float(math.fsum(terms))


def square_dirichlet_poly(g, m, coeffs):
    """Dyadic squared-prime statistic of g: sum over 2^m < p <= 2^{m+1} of
    w_I(p) * (lam_g(p)^2 - 1) / p, using the top-window weights."""
    params = coeffs.params
    if m < 0:
        raise ValueError("dyadic window index must be >= 0")
    if (m + 1) * math.log(2.0) > params.log_x(params.I):
        raise ValueError("dyadic window extends beyond the top window")
    if 2 ** (m + 1) > coeffs.p_limit:
        raise ValueError(
            f"dyadic window (2^{m}, 2^{m + 1}] is not covered by the prime table"
        )
    mask = coeffs.dyadic_mask(m)
    lam_g = _lambda_vector(g, coeffs.primes)
    sym_sq = lam_g * lam_g - 1.0
    terms = coeffs.w[params.I - 1][mask] * sym_sq[mask] / coeffs.primes[mask]
    return float(math.fsum(terms))


# ------------------------------------------------------------ classification


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    """Exact threshold classification of a family against a weight system.

    Linear-window part (only windows 1..rows_evaluated are decidable at the
    given prime table):

      pairs           evaluated index pairs (i, l), i <= l <= I
      g_values        realized statistics, shape (n_forms, len(pairs))
      g_thresholds    per-pair cutoff  scale * beta_i^{-3/4}
      e_class         -1 when every evaluated pair passes ("good" class),
                      else j >= 0 when rows 1..j pass and row j+1 fails
      in_top_window_good
                      passes restricted to the pairs with l = I, the
                      literal good-class condition (these flags can overlap
                      the exceptional classes; the partition above is by
                      first failing row)

    Dyadic part (independent split):

      m_values        evaluated dyadic indices m >= 1
      p_values        realized statistics, shape (n_forms, len(m_values))
      p_thresholds    per-index cutoff  scale * 2^{-m/10}
      p_class         largest failing m, or 0 when every index passes
    """

    params: PartitionParams
    threshold_scale: float
    n_forms: int
    rows_evaluated: int
    complete: bool
    pairs: tuple
    g_values: np.ndarray
    g_thresholds: np.ndarray
    e_class: np.ndarray
    in_top_window_good: np.ndarray
    m_values: tuple
    p_values: np.ndarray
    p_thresholds: np.ndarray
    p_class: np.ndarray

    def counts(self):
        """Class populations: good / exceptional-by-row and dyadic-by-index."""
        good = int(np.count_nonzero(self.e_class == -1))
        e_counts = {
            int(j): int(np.count_nonzero(self.e_class == j))
            for j in range(self.rows_evaluated)
        }
        p_counts = {
            int(m): int(np.count_nonzero(self.p_class == m))
            for m in (0, *self.m_values)
        }
        return {
            "good": good,
            "exceptional": e_counts,
            "top_window_good": int(np.count_nonzero(self.in_top_window_good)),
            "dyadic": p_counts,
        }

    def partition_ok(self):
        """Recompute membership flags from the definitions and confirm that
        each split labels every form exactly once."""
        fails = np.abs(self.g_values) > self.g_thresholds[np.newaxis, :]
        rows = np.array([pair[0] for pair in self.pairs])
        flags = []
        none_fail = ~fails.any(axis=1)
        flags.append(none_fail)
        for j in range(self.rows_evaluated):
            clean_before = ~fails[:, rows <= j].any(axis=1)
            fail_next = fails[:, rows == j + 1].any(axis=1)
            flags.append(clean_before & fail_next)
        linear_ok = bool((np.sum(np.stack(flags), axis=0) == 1).all())

        p_fails = np.abs(self.p_values) > self.p_thresholds[np.newaxis, :]
        m_arr = np.array(self.m_values)
        p_flags = [~p_fails.any(axis=1)]
        for idx, m in enumerate(m_arr):
            later = p_fails[:, m_arr > m].any(axis=1)
            p_flags.append(p_fails[:, idx] & ~later)
        dyadic_ok = bool((np.sum(np.stack(p_flags), axis=0) == 1).all())
        return linear_ok and dyadic_ok

    def to_json_dict(self, include_forms=False):
        out = {
            "log_k": self.params.log_k,
            "threshold_exponent": self.params.threshold_exponent,
            "beta": list(self.params.beta),
            "threshold_scale": self.threshold_scale,
            "n_forms": self.n_forms,
            "rows_evaluated": self.rows_evaluated,
            "complete": self.complete,
            "pairs": [list(pair) for pair in self.pairs],
            "g_thresholds": list(map(float, self.g_thresholds)),
            "m_values": list(self.m_values),
            "p_thresholds": list(map(float, self.p_thresholds)),
            "counts": self.counts(),
            "partition_ok": self.partition_ok(),
        }
        if include_forms:
            out["forms"] = [
                {
                    "e_class": int(self.e_class[n]),
                    "in_top_window_good": bool(self.in_top_window_good[n]),
                    "p_class": int(self.p_class[n]),
                    "g_values": list(map(float, self.g_values[n])),
                    "p_values": list(map(float, self.p_values[n])),
                }
                for n in range(self.n_forms)
            ]
        return out


def _family_matrix(family, coeffs):
    """Normalize a family input to a (n_forms, n_primes) eigenvalue matrix."""
    n = len(coeffs.primes)
    if isinstance(family, FamilySample):
        fam_primes = np.asarray(family.primes, dtype=np.int64)
        if len(fam_primes) < n or not np.array_equal(fam_primes[:n], coeffs.primes):
            raise ValueError(
                "family sample does not cover the coefficient system's primes"
            )
        return np.asarray(family.values, dtype=np.float64)[:, :n]
    if (
        isinstance(family, (EigenformData, dict))
        or isinstance(family, numbers.Real)
        or callable(family)
    ):
        return _lambda_vector(family, coeffs.primes)[np.newaxis, :]
    arr = np.asarray(family, dtype=np.float64)
    if arr.ndim == 1:
        return _lambda_vector(arr, coeffs.primes)[np.newaxis, :]
    if arr.ndim == 2 and arr.shape[1] == n:
        return arr
    raise ValueError(
        f"family matrix has shape {arr.shape}, expected (n_forms, {n})"
    )


def classify_family(family, params, coeffs, threshold_scale=1.0):
    """Split a family by exact threshold comparisons of its statistics.

    Linear windows: a form is "good" when |G_(i,l)| <= scale * beta_i^{-3/4}
    for every evaluated pair; otherwise it lands in the exceptional class of
    its first failing row.  Dyadic windows: a form is labeled by the largest
    m with |P_m| > scale * 2^{-m/10}, or 0 when all pass.  Both splits are
    exact partitions by construction, and `partition_ok()` re-derives them
    from the raw values as an independent check.
    """
    if coeffs.params != params:
        raise ValueError("coefficient system was built for other parameters")
    if coeffs.rows_covered < 1:
        raise ValueError("no window is covered; classification needs row 1")
    values = _family_matrix(family, coeffs)
    n_forms = values.shape[0]
    I = params.I
    R = coeffs.rows_covered
    scale = float(threshold_scale)
    if scale <= 0.0:
        raise ValueError("threshold_scale must be positive")

    pairs = [(i, l) for i in range(1, R + 1) for l in range(i, I + 1)]
    weight_cols = np.empty((len(coeffs.primes), len(pairs)))
    g_thresholds = np.empty(len(pairs))
    for idx, (i, l) in enumerate(pairs):
        mask = coeffs.window_mask(i)
        weight_cols[:, idx] = np.where(
            mask, coeffs.u[l - 1] * coeffs.inv_sqrt_primes, 0.0
        )
        g_thresholds[idx] = scale * params.beta[i] ** -0.75
    g_values = values @ weight_cols

    fails = np.abs(g_values) > g_thresholds[np.newaxis, :]
    rows = np.array([pair[0] for pair in pairs])
    e_class = np.full(n_forms, -1, dtype=np.int64)
    assigned = ~fails.any(axis=1)
    for j in range(R):
        fail_here = fails[:, rows == j + 1].any(axis=1) & ~assigned
        e_class[fail_here] = j
        assigned |= fail_here
    top_mask = np.array([pair[1] == I for pair in pairs])
    in_top_window_good = ~fails[:, top_mask].any(axis=1)

    log2 = math.log(2.0)
    m_cap_top = int(math.floor(params.log_x(I) / log2)) - 1
    m_cap_table = coeffs.p_limit.bit_length() - 2
    m_cap_weight = int(math.floor(params.log_k / log2))
    m_max = min(m_cap_top, m_cap_table, m_cap_weight)
    m_values = tuple(range(1, m_max + 1))
    p_cols = np.empty((len(coeffs.primes), len(m_values)))
    p_thresholds = np.empty(len(m_values))
    inv_p = 1.0 / coeffs.primes.astype(np.float64)
    for idx, m in enumerate(m_values):
        p_cols[:, idx] = np.where(
            coeffs.dyadic_mask(m), coeffs.w[I - 1] * inv_p, 0.0
        )
        p_thresholds[idx] = scale * 2.0 ** (-m / 10.0)
    p_values = (values * values - 1.0) @ p_cols

    p_fails = np.abs(p_values) > p_thresholds[np.newaxis, :]
    p_class = np.zeros(n_forms, dtype=np.int64)
    for idx, m in enumerate(m_values):
        p_class[p_fails[:, idx]] = m

    return ClassificationReport(
        params=params,
        threshold_scale=scale,
        n_forms=n_forms,
        rows_evaluated=R,
        complete=(R == I),
        pairs=tuple(pairs),
        g_values=g_values,
        g_thresholds=g_thresholds,
        e_class=e_class,
        in_top_window_good=in_top_window_good,
        m_values=m_values,
        p_values=p_values,
        p_thresholds=p_thresholds,
        p_class=p_class,
    )


# ------------------------------------------------------- explicit upper bound


def log_l_upper_bound(f, g, x, k=None, *, log_k=None):
    """Explicit conditional upper bound for the log of the central value
    proxy attached to the pair (f, g), at a free parameter x >= 2:

        sum_{p <= x}      lam_f(p)^2 lam_g(p) p^{-1/2 - 1/log x}
                          * log(x/p)/log x
      + sum_{p^2 <= x}    (lam_f(p)^4 - 4 lam_f(p)^2 + 4)(lam_g(p^2) - 1)
                          / (2 p^{1 + 2/log x}) * log(x/p^2)/log x
      + 6 log k / log x

    with lam_g(p^2) = lam_g(p)^2 - 1.  The bound carries an additive O(1)
    that is genuinely unspecified; it is surfaced in the `o1_constant` field
    and never folded into `value`.  Exactly one of `k` / `log_k` must be
    given; the returned dict separates the three terms.
    """
    if x < 2.0:
        raise ValueError("the free parameter x must be at least 2")
    if (k is None) == (log_k is None):
        raise ValueError("pass exactly one of k or log_k")
    lk = math.log(k) if log_k is None else float(log_k)
    log_x = math.log(x)

    primes = np.asarray(primes_up_to(math.floor(x)), dtype=np.int64)
    lam_f = _lambda_vector(f, primes)
    lam_g = _lambda_vector(g, primes)
    logs = np.log(primes.astype(np.float64))

    smooth = (log_x - logs) / log_x
    linear_terms = (
        lam_f**2 * lam_g * np.exp(-(0.5 + 1.0 / log_x) * logs) * smooth
    )
    linear = float(math.fsum(linear_terms))

    sq_mask = 2.0 * logs <= log_x
    coef_f = lam_f**4 - 4.0 * lam_f**2 + 4.0
    sym_sq_g = lam_g * lam_g - 1.0
    square_terms = np.where(
        sq_mask,
        coef_f
        * (sym_sq_g - 1.0)
        / (2.0 * np.exp((1.0 + 2.0 / log_x) * logs))
        * (log_x - 2.0 * logs)
        / log_x,
        0.0,
    )
    square = float(math.fsum(square_terms))

    conductor = 6.0 * lk / log_x
    return {
        "value": linear + square + conductor,
        "linear_term": linear,
        "square_term": square,
        "conductor_term": conductor,
        "x": float(x),
        "log_k": lk,
        "o1_constant": "unspecified additive O(1), not included in value",
    }


def log_l_margin_rows(f, g_forms, x_values, k):
    """Margin table rows comparing the explicit upper bound against the log
    of the actual central values (recovered through the triple-product
    identity): margin = bound - log L.  The sign of the margin is NOT
    meaningful on its own — the bound carries an unspecified O(1)."""
    rows = []
    for g_index, g in enumerate(g_forms):
        l_value = watson_L_value(f, g)
        log_l = math.log(l_value) if l_value > 0 else -math.inf
        for x in x_values:
            bound = log_l_upper_bound(f, g, x, k)
            rows.append(
                {
                    "g_index": g_index,
                    "x": float(x),
                    "bound": bound["value"],
                    "log_l_value": log_l,
                    "margin": bound["value"] - log_l,
                }
            )
    return rows


# ------------------------------------------------------ truncated exponential


def _check_even_order(ell):
    if isinstance(ell, bool) or not isinstance(ell, numbers.Integral):
        raise ValueError("truncation order must be an even integer >= 0")
    if ell < 0 or ell % 2 != 0:
        raise ValueError("truncation order must be an even integer >= 0")


def truncated_exp(ell, x):
    """Truncated exponential sum_{j <= ell} x^j / j! for even ell >= 0,
    accumulated with compensated summation."""
    _check_even_order(ell)
    terms = [1.0]
    t = 1.0
    for j in range(1, ell + 1):
        t *= x / j
        terms.append(t)
    return math.fsum(terms)


def truncated_exp_exact(ell, x):
    """Truncated exponential as an exact rational (x may be int, Fraction,
    or float — floats are taken at their exact binary value)."""
    _check_even_order(ell)
    xq = Fraction(x)
    total = Fraction(1)
    t = Fraction(1)
    for j in range(1, ell + 1):
        t = t * xq / j
        total += t
    return total


def truncated_exp_dominates(ell, x, max_terms=4000):
    """Exact outward-rounded check that the even truncation dominates the
    exponential at a nonpositive point: E_ell(x) >= e^x for x <= 0.

    Uses only rational arithmetic: with y = -x >= 0 and the partial sum
    L_J(y) <= e^y (all terms nonnegative), E_ell(x) * L_J(y) >= 1 implies
    E_ell(x) >= 1/L_J(y) >= e^x.  The lower bound is tightened until the
    product clears 1; a False return therefore means "not certified", which
    for true instances only happens past `max_terms`.
    """
    _check_even_order(ell)
    xq = Fraction(x)
    if xq > 0:
        raise ValueError("the domination claim is for x <= 0 only")
    e_val = truncated_exp_exact(ell, xq)
    if e_val <= 0:
        return False
    y = -xq
    lower = Fraction(1)
    t = Fraction(1)
    j = 0
    while j < max_terms:
        if e_val * lower >= 1:
            return True
        j += 1
        t = t * y / j
        lower += t
    return bool(e_val * lower >= 1)


# ---------------------------------------------------------- model prediction


def gaussian_heuristic_prediction(f, x):
    """Lognormal main-term prediction for the central-value proxy.

    Over primes p <= x:  mu = -sum (lam^4 - 4 lam^2 + 4)/(2p),
    sigma2 = sum lam^4 / p, prediction = e^{mu + sigma2/2}; `simplified` is
    the per-prime rewriting exp(2 sum (lam^2 - 1)/p), equal by the identity
    -(a^4 - 4a^2 + 4)/2 + a^4/2 = 2(a^2 - 1).
    """
    primes = np.asarray(primes_up_to(math.floor(x)), dtype=np.int64)
    lam = _lambda_vector(f, primes)
    inv_p = 1.0 / primes.astype(np.float64)
    lam2 = lam * lam
    lam4 = lam2 * lam2
    mu = -float(math.fsum((lam4 - 4.0 * lam2 + 4.0) / 2.0 * inv_p))
    sigma2 = float(math.fsum(lam4 * inv_p))
    simplified = math.exp(2.0 * float(math.fsum((lam2 - 1.0) * inv_p)))
    return {
        "mu": mu,
        "sigma2": sigma2,
        "prediction": math.exp(mu + sigma2 / 2.0),
        "simplified": simplified,
    }


# ------------------------------------------------------------ chain validator


def _logsumexp(values):
    finite = [v for v in values if v != -math.inf]
    if not finite:
        return -math.inf
    m = max(finite)
    return m + math.log(math.fsum(math.exp(v - m) for v in finite))


def chain_validator(params, C_const=CHAIN_CONSTANT, check_exponents=(10**4, 10**5)):
    """Audit the step inequalities of the final summation chain in log-space.

    For each window step j = 1..I-1 the chain needs

        t_j = 6/beta_j + log(beta_{j+1}) / (80 C beta_j)  <=  -4/beta_j,

    which rearranges exactly to log beta_{j+1} <= -800 C.  The validator
    evaluates every step numerically for the given ladder, derives the
    minimal threshold exponent that makes all steps pass for ANY ladder
    (-log beta_I >= 800C; with the top rung's factor-20 slack the guaranteed
    version is 800C + log 20), checks the requested exponents symbolically,
    and reports the geometric tail sum of the step targets.
    """
    C = float(C_const)
    if C <= 0:
        raise ValueError("chain constant must be positive")
    requirement = -800.0 * C
    rows = []
    for j in range(1, params.I):
        beta_j = params.beta[j]
        beta_next = params.beta[j + 1]
        t = 6.0 / beta_j + math.log(beta_next) / (80.0 * C * beta_j)
        target = -4.0 / beta_j
        rows.append(
            {
                "j": j,
                "beta_j": beta_j,
                "beta_next": beta_next,
                "log_term": t,
                "term": math.exp(t) if t < 709.0 else math.inf,
                "target": target,
                "passes": t <= target,
            }
        )
    log_targets = [-4.0 / params.beta[j] for j in range(1, params.I)]
    log_geo = _logsumexp(log_targets)

    checks = {}
    for expo in check_exponents:
        worst_log_beta = _LOG_20 - float(expo)
        checks[int(expo)] = {
            "exponent": float(expo),
            "worst_log_beta_top": worst_log_beta,
            "requirement": requirement,
            "passes": worst_log_beta <= requirement,
        }

    return {
        "C": C,
        "log_k": params.log_k,
        "threshold_exponent": params.threshold_exponent,
        "rows": rows,
        "all_rows_pass": all(r["passes"] for r in rows),
        "minimal_exponent": 800.0 * C,
        "minimal_exponent_guaranteed": 800.0 * C + _LOG_20,
        "exponent_checks": checks,
        "log_geometric_sum": log_geo,
        "geometric_sum": math.exp(log_geo) if log_geo > -709.0 else 0.0,
    }


def chain_table_rows(report):
    """Flatten a chain report into CSV-ready rows
    (columns: j, beta_j, term, log_term, pass)."""
    return [
        {
            "j": row["j"],
            "beta_j": row["beta_j"],
            "term": row["term"],
            "log_term": row["log_term"],
            "pass": row["passes"],
        }
        for row in report["rows"]
    ]


# ----------------------------------------------------------- tail moment bound


def markov_moment_bound(V, log_k):
    """Log of the tail moment bound (2^8 n loglog k / (V^2 e))^n at
    n = floor(V/20).

    In the regime V >= 10^30 loglog k the bound is guaranteed <= -3V and
    that guarantee is asserted; below the regime the value is returned
    as-is (report-only).
    """
    if not log_k > math.e:
        raise ValueError("log_k must exceed e")
    V = float(V)
    if V < 20.0:
        raise ValueError("tail height V must be at least 20 (so n >= 1)")
    llk = math.log(log_k)
    n = math.floor(V / 20.0)
    log_bound = n * (
        8.0 * math.log(2.0) + math.log(n) + math.log(llk) - 2.0 * math.log(V) - 1.0
    )
    if V >= 1e30 * llk and not log_bound <= -3.0 * V:
        raise ArithmeticError(
            "regime guarantee violated: tail bound exceeded -3V "
            f"(log bound {log_bound}, V {V})"
        )
    return log_bound


def markov_regime_certificate():
    """The one-line comparison behind the regime guarantee: per unit n the
    log factor is at most log(2^8/(20 * 10^30 * e)), which must be <= -60
    (= -3 * 20, three times the per-n height)."""
    log_ratio = 8.0 * math.log(2.0) - math.log(20.0) - 30.0 * math.log(10.0) - 1.0
    return {
        "log_ratio": log_ratio,
        "requirement": -60.0,
        "ok": log_ratio <= -60.0,
    }


# ------------------------------------------------------------- report helpers


def exceptional_measure_report(params, s1=None, C_const=CHAIN_CONSTANT):
    """Finite-size instantiation of the measure bound for the worst
    exceptional class:  I * (beta_1^{3/2} * 2L/e * S1)^L with
    L = floor(1/(C beta_1)), compared against the claimed decay
    exp(-(loglog k)^2 / C).

    The source display shows the product WITHOUT its L-th power once (the
    next line has it); the corrected power is what makes the bound meet the
    claim, so that is what `log_bound` uses.  `log_bound_unpowered` keeps
    the literal unpowered product for comparison.  Report-only: nothing is
    asserted, finite-size ladders may or may not meet the asymptotic claim.
    """
    C = float(C_const)
    llk = params.loglog_k
    beta1 = params.beta[1]
    L = math.floor(1.0 / (C * beta1))
    s1_val = 16.0 * llk if s1 is None else float(s1)
    base = beta1**1.5 * (2.0 * L / math.e) * s1_val
    log_I = math.log(params.I)
    log_base = math.log(base) if base > 0 else -math.inf
    log_bound = log_I + (L * log_base if L > 0 else 0.0)
    log_claim = -(llk * llk) / C
    return {
        "L": L,
        "s1": s1_val,
        "base": base,
        "log_bound": log_bound,
        "log_bound_unpowered": log_I + log_base,
        "log_claimed": log_claim,
        "meets_claim": log_bound <= log_claim,
    }


def fourth_power_product_report(f, x):
    """The two-factor product whose boundedness the argument needs:

      exp( (1/2) sum_{p <= x}      lam^4 p^{-1-2/log x} log^2(x/p)/log^2 x )
    * exp( -(1/2) sum_{p <= sqrt x} lam^4 p^{-1-2/log x} log(x/p^2)/log x )

    evaluated at a concrete window top x.  Report-only (the claim is
    asymptotic); the log of each factor and of the product are returned.
    """
    if x < 2.0:
        raise ValueError("window top x must be at least 2")
    log_x = math.log(x)
    primes = np.asarray(primes_up_to(math.floor(x)), dtype=np.int64)
    lam = _lambda_vector(f, primes)
    logs = np.log(primes.astype(np.float64))
    lam4 = lam**4
    damp = np.exp(-(1.0 + 2.0 / log_x) * logs)
    first = 0.5 * float(
        math.fsum(lam4 * damp * ((log_x - logs) / log_x) ** 2)
    )
    sq_mask = 2.0 * logs <= log_x
    second_terms = np.where(
        sq_mask, lam4 * damp * (log_x - 2.0 * logs) / log_x, 0.0
    )
    second = -0.5 * float(math.fsum(second_terms))
    return {
        "x": float(x),
        "log_factor_one": first,
        "log_factor_two": second,
        "log_product": first + second,
        "product": math.exp(first + second),
    }


def sym_ratio_report(f, x):
    """Side-by-side report of the symmetric-square normalization and its
    prime-sum proxy exp( sum_{p <= sqrt x} (2 lam^2 - 2)/p ).

    `ratio_times_l` multiplies the proxy by L itself; `ratio_over_l_squared`
    divides the proxy by L^2 (the two normalizations in circulation).
    Report-only: the comparison is conditional and asymptotic.
    """
    if x < 4.0:
        raise ValueError("need x >= 4 so that sqrt(x) reaches the first prime")
    l_value = sym_square_L1(f)
    primes = np.asarray(primes_up_to(math.floor(math.sqrt(x))), dtype=np.int64)
    lam = _lambda_vector(f, primes)
    exp_factor = math.exp(
        2.0 * float(math.fsum((lam * lam - 1.0) / primes.astype(np.float64)))
    )
    return {
        "x": float(x),
        "l_value": l_value,
        "l_inverse": 1.0 / l_value,
        "exp_factor": exp_factor,
        "ratio_times_l": exp_factor * l_value,
        "ratio_over_l_squared": exp_factor / (l_value * l_value),
    }
