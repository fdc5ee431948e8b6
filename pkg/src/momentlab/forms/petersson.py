"""Petersson inner products by quadrature, and the trace-formula stack.

The inner product of two equal-weight cusp forms is integrated over the
standard fundamental domain (|x| <= 1/2, |z| >= 1), split into the curved
strip between the unit arc and y = 1 plus geometric panels up to a truncation
height, with tensor Gauss-Legendre rules per tile.  Real Fourier coefficients
give f(-x+iy) = conj(f(x+iy)), so only x >= 0 is integrated and doubled.

Three error sources are tracked separately and summed into est_error:
refinement difference between consecutive tile depths, the Fourier-cutoff
tail (bounded analytically from the computed coefficient growth), and the
y > Y tail beyond its leading-term correction.

On top of the inner product sit the symmetric-square L-value at 1 (two
independent routes), exact Kloosterman sums, high-precision Bessel J of
large integer order, the full Petersson-formula diagonal, the harmonic
eigenform average that must reproduce it, fourth moments, and central
triple-product L-values via the Watson inversion.
"""

import math
from dataclasses import dataclass
from math import gcd

import mpmath
import numpy as np

from ..primes import primes_up_to
from .eigen import EigenformData, hecke_eigenforms, prime_eigenvalue_table
from .qexp import QExpansion

__all__ = [
    "PeterssonResult",
    "PrecisionError",
    "petersson_inner",
    "sym_square_L1",
    "sym_square_L1_report",
    "prime_lambda_values",
    "kloosterman_sum",
    "bessel_j_int_order",
    "petersson_full_diagonal",
    "harmonic_sum_check",
    "triple_overlap",
    "fourth_moment",
    "watson_L_value",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_BASE_X_TILES = 4
_BASE_Y_PANELS = 5
_DEFAULT_MAX_DEPTH = 4
_MIN_Y = math.sqrt(3.0) / 2.0

_TILE_CACHE = {}
_NORM_CACHE = {}
_L1_CACHE = {}
_FSQ_CACHE = {}
_FSQ_NORM_CACHE = {}
_TRIPLE_CACHE = {}


class PrecisionError(ArithmeticError):
    """Requested tolerance unreachable; carries the best value and its error."""

    def __init__(self, message, value=None, est_error=None):
        super().__init__(message)
        self.value = value
        self.est_error = est_error


@dataclass(frozen=True)
class PeterssonResult:
    value: float
    est_error: float
    quad_depth: int
    truncation_y: float
    fourier_cutoff: int

    def __post_init__(self):
        if self.est_error < 0:
            raise ValueError("error estimate must be nonnegative")


def _coefficient_floats(form):
    """(weight, float64 array a(0..N)) for a QExpansion or EigenformData."""
    if isinstance(form, QExpansion):
        weight, coeffs = form.weight, form.coeffs
    elif isinstance(form, EigenformData):
        weight, coeffs = form.weight, form.coeffs
    else:
        raise TypeError("expected a QExpansion or EigenformData")
    arr = np.array([float(c) for c in coeffs], dtype=np.float64)
    if arr[0] != 0.0:
        raise ValueError("inner products are defined here for cusp forms only")
    return weight, arr


def _tiles(depth, y_cut):
    """Flattened quadrature nodes/weights for the half fundamental domain."""
    key = (depth, y_cut)
    if key in _TILE_CACHE:
        return _TILE_CACHE[key]
    nx = _BASE_X_TILES * 2 ** (depth - 1)
    n_panels = _BASE_Y_PANELS * 2 ** (depth - 1)
    xs, ys, ws = [], [], []

    # curved strip: sqrt(1-x^2) <= y <= 1, 0 <= x <= 1/2
    edges = np.linspace(0.0, 0.5, nx + 1)
    for x0, x1 in zip(edges[:-1], edges[1:]):
        half_w = 0.5 * (x1 - x0)
        x_nodes = 0.5 * (x0 + x1) + half_w * _GL_NODES
        arc = np.sqrt(1.0 - x_nodes**2)
        for xi, wxi, lo in zip(x_nodes, _GL_WEIGHTS * half_w, arc):
            half_h = 0.5 * (1.0 - lo)
            y_nodes = 0.5 * (1.0 + lo) + half_h * _GL_NODES
            xs.append(np.full_like(y_nodes, xi))
            ys.append(y_nodes)
            ws.append(_GL_WEIGHTS * half_h * wxi)

    # rectangular panels: 1 <= y <= y_cut, geometric in y
    y_edges = np.geomspace(1.0, y_cut, n_panels + 1)
    for x0, x1 in zip(edges[:-1], edges[1:]):
        half_w = 0.5 * (x1 - x0)
        x_nodes = 0.5 * (x0 + x1) + half_w * _GL_NODES
        wx = _GL_WEIGHTS * half_w
        for y0, y1 in zip(y_edges[:-1], y_edges[1:]):
            half_h = 0.5 * (y1 - y0)
            y_nodes = 0.5 * (y0 + y1) + half_h * _GL_NODES
            wy = _GL_WEIGHTS * half_h
            xg, yg = np.meshgrid(x_nodes, y_nodes, indexing="ij")
            wg = np.outer(wx, wy)
            xs.append(xg.ravel())
            ys.append(yg.ravel())
            ws.append(wg.ravel())

    tiles = (np.concatenate(xs), np.concatenate(ys), np.concatenate(ws))
    _TILE_CACHE[key] = tiles
    return tiles


def _evaluate_sum(coeffs, z_power_base, n_cutoff):
    """sum_{n=1}^{N} a(n) Z^n with Z = exp(2 pi i x - 2 pi y), vectorized."""
    total = np.zeros_like(z_power_base)
    power = np.ones_like(z_power_base)
    for n in range(1, n_cutoff + 1):
        power = power * z_power_base
        a = coeffs[n]
        if a:
            total += a * power
    return total


def _quad_pass(af, ag, weight, depth, y_cut, n_cutoff, same):
    """(integral, rounding floor) over the half domain at one tile depth."""
    x, y, w = _tiles(depth, y_cut)
    z = np.exp((2j * math.pi) * x - (2.0 * math.pi) * y)
    f_vals = _evaluate_sum(af, z, n_cutoff)
    g_vals = f_vals if same else _evaluate_sum(ag, z, n_cutoff)
    integrand = w * ((f_vals * np.conjugate(g_vals)).real * y ** (weight - 2))
    # doubled: the x < 0 half contributes the complex conjugate
    value = 2.0 * float(np.sum(integrand))
    round_floor = 1e-15 * 2.0 * float(np.sum(np.abs(integrand)))
    return value, round_floor


def _growth_model(coeffs):
    """(A, s) with |a(n)| <= A n^s plausible from the computed tail."""
    n_max = len(coeffs) - 1
    s = 0.0
    a_scale = 0.0
    for n in range(max(1, n_max - 9), n_max + 1):
        mag = abs(coeffs[n])
        if mag:
            s = max(s, math.log(mag) / math.log(n) if n > 1 else 0.0)
            a_scale = max(a_scale, mag / n**s if n > 1 else mag)
    return 2.0 * max(a_scale, 1e-300), s + 0.5


def _fourier_tail_error(af, ag, weight, n_cutoff, y_cut):
    """Bound on the quadrature-region contribution of coefficients beyond the
    cutoff, via |a(n)| <= A n^s fitted outward from the computed coefficients."""
    y0 = _MIN_Y
    out = 0.0
    for tail_c, other_c in ((af, ag), (ag, af)):
        a_fit, s_fit = _growth_model(tail_c)
        rho = math.exp(-2.0 * math.pi * y0) * (1.0 + 1.0 / (n_cutoff + 1)) ** s_fit
        if rho >= 0.9:
            return math.inf
        # peak of sum |b(n)| e^{-2 pi n y0} over the other form
        other_peak = math.fsum(
            abs(other_c[n]) * math.exp(-2.0 * math.pi * n * y0) for n in range(1, len(other_c))
        )
        with mpmath.workdps(30):
            lead = (
                mpmath.mpf(a_fit)
                * mpmath.mpf(n_cutoff + 1) ** s_fit
                / (1.0 - rho)
                * other_peak
                * mpmath.exp(2.0 * math.pi * y0)
            )
            decay = mpmath.gammainc(
                weight - 1, 2.0 * math.pi * (n_cutoff + 2) * y0
            ) / mpmath.mpf(2.0 * math.pi * (n_cutoff + 2)) ** (weight - 1)
            out += float(2.0 * lead * decay)
    return out


def _high_tail(af, ag, weight, y_cut, n_terms):
    """(leading correction, error bound) for the region y > y_cut: the x
    integral collapses to sum_n a(n)b(n) Gamma(w-1, 4 pi n Y)/(4 pi n)^{w-1}."""
    with mpmath.workdps(40):
        def term(n):
            scale = 4.0 * math.pi * n
            return mpmath.gammainc(weight - 1, scale * y_cut) / mpmath.mpf(scale) ** (
                weight - 1
            )

        lead = float(af[1] * ag[1] * term(1))
        err = 0.0
        for n in range(2, min(8, n_terms) + 1):
            err += float(abs(af[n] * ag[n]) * term(n))
        err *= 2.0  # headroom for everything past the computed few
    return lead, err


def petersson_inner(
    f,
    g,
    tolerance=None,
    max_depth=_DEFAULT_MAX_DEPTH,
    y_cut=10.0,
    n_cutoff=None,
):
    """Petersson inner product of two equal-weight cusp forms.

    With tolerance=None runs to convergence of the refinement estimate (best
    effort); with a numeric tolerance raises PrecisionError (carrying the best
    value and estimate) if the combined error estimate cannot be brought
    under it by the configured depth.
    """
    wf, af = _coefficient_floats(f)
    wg, ag = _coefficient_floats(g)
    if wf != wg:
        raise ValueError("inner product requires equal weights")
    same = f is g
    limit = min(len(af), len(ag)) - 1
    if n_cutoff is None:
        n_cutoff = limit
    n_cutoff = min(n_cutoff, limit)
    if n_cutoff < 1:
        raise ValueError("need at least the q^1 coefficient")

    fourier_err = _fourier_tail_error(af, ag, wf, n_cutoff, y_cut)
    tail_lead, tail_err = _high_tail(af, ag, wf, y_cut, n_cutoff)

    previous = None
    best = None
    for depth in range(1, max_depth + 1):
        value, round_floor = _quad_pass(af, ag, wf, depth, y_cut, n_cutoff, same)
        if previous is not None:
            diff = abs(value - previous)
            est = diff + round_floor + fourier_err + tail_err
            best = PeterssonResult(
                value=value + tail_lead,
                est_error=est,
                quad_depth=depth,
                truncation_y=y_cut,
                fourier_cutoff=n_cutoff,
            )
            converged = diff <= max(1e-14 * abs(value), round_floor)
            if tolerance is None:
                if converged or depth == max_depth:
                    return best
            elif est < tolerance:
                return best
        previous = value
    if tolerance is None:
        return best
    raise PrecisionError(
        f"error estimate {best.est_error:.3e} above tolerance {tolerance:.3e}",
        value=best.value,
        est_error=best.est_error,
    )


# --------------------------------------------------------- symmetric square L


def _norm_result(g, tolerance=None):
    if isinstance(g, EigenformData):
        key = (g.weight, g.index, g.n_terms)
        if key not in _NORM_CACHE:
            _NORM_CACHE[key] = petersson_inner(g, g, tolerance)
        return _NORM_CACHE[key]
    return petersson_inner(g, g, tolerance)


def sym_square_L1(form, tolerance=None):
    """L(1, sym^2) from the Petersson norm.

    In the normalization where the form has first coefficient 1, the norm
    determines the symmetric-square value at 1 through
    L = 2 pi^2 (4 pi)^(k-1) <f,f> / Gamma(k); equivalently the analytically
    normalized form satisfies |a(1)|^2 Gamma(k) L = 2 pi^2.
    """
    if isinstance(form, EigenformData):
        key = (form.weight, form.index)
        if key in _L1_CACHE:
            return _L1_CACHE[key]
    weight = form.weight
    inner = _norm_result(form, tolerance)
    scale = 2.0 * math.pi**2 * (4.0 * math.pi) ** (weight - 1) / math.gamma(weight)
    value = scale * inner.value
    if value <= 0:
        raise ArithmeticError("symmetric-square value must be positive")
    if isinstance(form, EigenformData):
        _L1_CACHE[(form.weight, form.index)] = value
    return value


def prime_lambda_values(form, p_limit):
    """(primes, lambda(p) list) for p <= p_limit, from the form itself when
    its expansion reaches far enough, else from the bulk eigenvalue tables."""
    primes = primes_up_to(p_limit)
    if isinstance(form, EigenformData) and form.n_terms < p_limit:
        table = prime_eigenvalue_table(form.weight, p_limit)
        return primes, list(table["lambdas"][form.index])
    return primes, [form.lam(p) for p in primes]


def sym_square_euler_product(form, p_limit=10_000):
    """Partial Euler product for L(1, sym^2): over p <= p_limit the local
    factor is [(1 - (lam(p)^2-2)/p + 1/p^2)(1 - 1/p)]^(-1)."""
    primes, lams = prime_lambda_values(form, p_limit)
    log_total = -math.fsum(
        math.log((1.0 - (lam * lam - 2.0) / p + 1.0 / (p * p)) * (1.0 - 1.0 / p))
        for p, lam in zip(primes, lams)
    )
    return math.exp(log_total)


def sym_square_L1_report(form, p_limit=10_000, tolerance=None):
    """Both routes to L(1, sym^2) side by side, with their discrepancy."""
    norm_route = sym_square_L1(form, tolerance)
    euler_route = sym_square_euler_product(form, p_limit)
    return {
        "weight": form.weight,
        "index": getattr(form, "index", 0),
        "norm_route": norm_route,
        "euler_route": euler_route,
        "rel_discrepancy": abs(norm_route - euler_route) / norm_route,
        "p_limit": p_limit,
    }


# ------------------------------------------------------- trace-formula pieces


def kloosterman_sum(m, n, c, tolerance=1e-6):
    """S(m, n; c) = sum over units d mod c of e((m d + n d-bar)/c).

    The sum is accumulated exactly as integer counts of each exponent residue
    before a single cosine evaluation, so the only rounding is the final one.
    Returns an int when the value lies within `tolerance` of an integer
    (always the case when the sum is rational), else the real value.
    """
    if c < 1:
        raise ValueError("modulus must be positive")
    counts = [0] * c
    for d in range(1, c + 1):
        if gcd(d, c) == 1:
            dbar = pow(d, -1, c)
            counts[(m * d + n * dbar) % c] += 1
    value = math.fsum(
        count * math.cos(2.0 * math.pi * a / c) for a, count in enumerate(counts) if count
    )
    nearest = round(value)
    if abs(value - nearest) < tolerance:
        return int(nearest)
    return value


def bessel_j_int_order(order, x, rel_tol=1e-15):
    """J_order(x) for integer order >= 0, to rel_tol.

    Ascending series with enough guard digits to absorb the alternating
    cancellation; for x beyond the order the backward-recurrence route takes
    over (the series regime of interest here is order >> x).
    """
    if order < 0:
        raise ValueError("order must be a nonnegative integer")
    if x < 0:
        value = bessel_j_int_order(order, -x, rel_tol)
        return -value if order % 2 else value
    if x == 0:
        return 1.0 if order == 0 else 0.0
    if x > order and order > 0:
        return _bessel_backward(order, x)
    guard = 30 + int(math.ceil(0.9 * x))
    with mpmath.workdps(guard):
        xm = mpmath.mpf(x)
        quarter = -(xm * xm) / 4
        term = (xm / 2) ** order / mpmath.factorial(order)
        total = term
        j = 1
        while True:
            term = term * quarter / (j * (j + order))
            total += term
            if j > x and abs(term) < mpmath.mpf(rel_tol) * abs(total):
                break
            j += 1
        return float(total)


def _bessel_backward(order, x):
    """Miller's backward recurrence, normalized by J_0 + 2 sum J_{2m} = 1."""
    with mpmath.workdps(40):
        xm = mpmath.mpf(x)
        start = order + int(x) + 40
        values = [mpmath.mpf(0)] * (start + 2)
        values[start + 1] = mpmath.mpf(0)
        values[start] = mpmath.mpf("1e-40")
        for m in range(start, 0, -1):
            values[m - 1] = (2 * m / xm) * values[m] - values[m + 1]
        norm = values[0] + 2 * mpmath.fsum(values[m] for m in range(2, start + 1, 2))
        return float(values[order] / norm)


def petersson_full_diagonal(t, u, weight2k, c_max=50, tolerance=1e-9, return_details=False):
    """delta_{t=u} + 2 pi (-1)^k sum_{c<=c_max} S(t,u;c)/c J_{2k-1}(4 pi sqrt(tu)/c).

    This is the exact family average that the harmonic eigenform sum must
    reproduce.  The neglected c > c_max tail is bounded by
    J_nu(y) <= (y/2)^nu / nu! and |S| <= c; a diagnostic error is raised when
    that bound exceeds the tolerance.
    """
    if weight2k % 2 or weight2k < 4:
        raise ValueError("weight must be even and at least 4")
    k = weight2k // 2
    nu = weight2k - 1
    sqrt_tu = math.sqrt(t * u)
    x0 = 4.0 * math.pi * sqrt_tu
    correction = 0.0
    for c in range(1, c_max + 1):
        s_val = float(kloosterman_sum(t, u, c))
        if s_val:
            correction += s_val / c * bessel_j_int_order(nu, x0 / c)
    correction *= 2.0 * math.pi * (-1) ** k
    # tail: sum_{c > c_max} (x0/2c)^nu / nu!  <= (x0/2)^nu / (nu! (nu-1) c_max^(nu-1))
    log_tail = (
        nu * math.log(x0 / 2.0)
        - math.lgamma(nu + 1)
        - math.log(nu - 1)
        - (nu - 1) * math.log(c_max)
        + math.log(2.0 * math.pi)
    )
    tail_bound = math.exp(log_tail)
    if tail_bound > tolerance:
        raise PrecisionError(
            f"c_max={c_max} leaves tail bound {tail_bound:.3e}",
            value=(1.0 if t == u else 0.0) + correction,
            est_error=tail_bound,
        )
    value = (1.0 if t == u else 0.0) + correction
    if return_details:
        return {
            "value": value,
            "correction": correction,
            "tail_bound": tail_bound,
            "c_max": c_max,
        }
    return value


def harmonic_sum_check(t, u, weight2k, tolerance=None):
    """(2 pi^2/(2k-1)) sum over eigenforms of lam(t) lam(u)/L(1, sym^2),
    the harmonic family average dual to petersson_full_diagonal."""
    forms = hecke_eigenforms(weight2k)
    if not forms:
        raise ValueError(f"no cusp forms at weight {weight2k}")
    total = math.fsum(
        g.lam(t) * g.lam(u) / sym_square_L1(g, tolerance) for g in forms
    )
    return 2.0 * math.pi**2 / (weight2k - 1) * total


# -------------------------------------------------- fourth moment and Watson


def _square_qexp(f):
    """Exact q-expansion of f^2 for a rational eigenform."""
    if not isinstance(f, EigenformData):
        raise TypeError("expected an eigenform")
    if not f.is_rational:
        raise ValueError("exact squares are built for rational eigenforms only")
    key = (f.weight, f.index, f.n_terms)
    if key not in _FSQ_CACHE:
        q = QExpansion(f.weight, f.coeffs)
        _FSQ_CACHE[key] = q * q
    return _FSQ_CACHE[key]


def fourth_moment(f, tolerance=None):
    """Integral of |F|^4 over the fundamental domain for the L2-normalized
    form: <f^2, f^2>/<f,f>^2, via quadrature at weight 2k."""
    fsq = _square_qexp(f)
    key = (f.weight, f.index, f.n_terms)
    if key not in _FSQ_NORM_CACHE:
        _FSQ_NORM_CACHE[key] = petersson_inner(fsq, fsq, tolerance)
    i4 = _FSQ_NORM_CACHE[key]
    i2 = _norm_result(f, tolerance)
    return i4.value / i2.value**2


def triple_overlap(f, g, tolerance=None):
    """<F^2, G> with both forms L2-normalized: <f^2, g>/(<f,f> sqrt(<g,g>))."""
    if g.weight != 2 * f.weight:
        raise ValueError("the second form must have twice the weight of the first")
    fsq = _square_qexp(f)
    key = (f.weight, f.index, g.index)
    if key not in _TRIPLE_CACHE:
        _TRIPLE_CACHE[key] = petersson_inner(fsq, g, tolerance)
    cross = _TRIPLE_CACHE[key]
    norm_f = _norm_result(f, tolerance)
    norm_g = _norm_result(g, tolerance)
    return cross.value / (norm_f.value * math.sqrt(norm_g.value))


def watson_L_value(f, g, tolerance=None):
    """Central triple-product value L(1/2, f x f x g) by inverting the
    period identity: |<F^2, G>|^2 2(2k-1) L(1,sym^2 f)^2 L(1,sym^2 g) / pi^3.
    Nonnegative by construction."""
    overlap = triple_overlap(f, g, tolerance)
    k = f.weight
    return (
        overlap**2
        * 2.0
        * (2 * k - 1)
        * sym_square_L1(f, tolerance) ** 2
        * sym_square_L1(g, tolerance)
        / math.pi**3
    )
