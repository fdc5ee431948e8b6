"""Hecke eigenforms from the exact integer matrix of T_2.

The echelonized cusp-form basis makes T_2 an integer matrix whose (i, j)
entry is the q^i coefficient of T_2 applied to the j-th basis form.  Its
characteristic polynomial is computed exactly; integer eigenvalues are
certified by exact evaluation and their eigenvectors solved in rational
arithmetic, while irrational eigenvalues are refined in high-precision
floating point with a verified residual.  At the desk-scale weights the
non-rational eigenvalues of a given space always form a single Galois orbit
(the residual characteristic factor has degree <= 3 with no rational root,
hence is irreducible); beyond that the orbit flag is left uncertified.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from ..primes import primes_up_to
from .qexp import QExpansion, delta_qexp, dim_cusp_forms, eisenstein_series, miller_basis, _poly_mul_exact

__all__ = [
    "EigenformData",
    "hecke_matrix",
    "hecke_eigenforms",
    "prime_eigenvalue_table",
]

_EIGEN_DPS = 60
_RESIDUAL_FACTOR = 1e-20
_SEPARATION_TOL = 1e-10

_EIGENFORM_CACHE = {}


def hecke_matrix(weight, basis, p=2):
    """Exact integer matrix of T_p on an echelonized basis.

    Column j holds the basis coordinates of T_p f_j, which for an echelon
    basis are just its q^1..q^d coefficients: (T_p f)(n) = a(np) + p^(k-1) a(n/p).
    """
    d = len(basis)
    if any(f.n_terms < d * p for f in basis):
        raise ValueError(f"basis too short: need {d * p} coefficients")
    pk = p ** (weight - 1)
    matrix = []
    for i in range(1, d + 1):
        row = []
        for f in basis:
            value = f.coefficient(i * p)
            if i % p == 0:
                value += pk * f.coefficient(i // p)
            row.append(value)
        matrix.append(row)
    return matrix


def _char_poly(matrix):
    """Monic characteristic polynomial of an integer matrix, exact
    (Faddeev-LeVerrier in rational arithmetic)."""
    d = len(matrix)
    a = [[Fraction(x) for x in row] for row in matrix]
    coeffs = [Fraction(1)]
    m = None
    for step in range(1, d + 1):
        if m is None:
            m = [row[:] for row in a]
        else:
            # m <- a @ (m + c_last * I)
            shifted = [row[:] for row in m]
            for i in range(d):
                shifted[i][i] += coeffs[-1]
            m = [
                [sum(a[i][k] * shifted[k][j] for k in range(d)) for j in range(d)]
                for i in range(d)
            ]
        trace = sum(m[i][i] for i in range(d))
        coeffs.append(-trace / step)
    out = []
    for c in coeffs:
        if c.denominator != 1:
            raise ArithmeticError("characteristic polynomial must be integral")
        out.append(int(c))
    return out


def _poly_eval_exact(coeffs, x):
    value = 0
    for c in coeffs:
        value = value * x + c
    return value


def _poly_deflate_exact(coeffs, root):
    """Divide a monic integer polynomial by (x - root), exactly."""
    out = [coeffs[0]]
    for c in coeffs[1:-1]:
        out.append(c + out[-1] * root)
    remainder = coeffs[-1] + out[-1] * root
    if remainder != 0:
        raise ArithmeticError("claimed root is not a root")
    return out


def _rational_kernel_vector(matrix, eigenvalue):
    """Exact kernel vector of (M - eigenvalue*I), normalized to first entry 1."""
    d = len(matrix)
    m = [[Fraction(matrix[i][j]) - (eigenvalue if i == j else 0) for j in range(d)] for i in range(d)]
    # fraction-free-ish Gaussian elimination to row echelon
    pivot_cols = []
    row = 0
    for col in range(d):
        pivot = next((r for r in range(row, d) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = m[row][col]
        m[row] = [x / inv for x in m[row]]
        for r in range(d):
            if r != row and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[row])]
        pivot_cols.append(col)
        row += 1
    free = [c for c in range(d) if c not in pivot_cols]
    if len(free) != 1:
        raise ArithmeticError(f"eigenvalue {eigenvalue} has kernel dimension {len(free)}, want 1")
    vec = [Fraction(0)] * d
    vec[free[0]] = Fraction(1)
    for r, col in enumerate(pivot_cols):
        vec[col] = -m[r][free[0]]
    if vec[0] == 0:
        raise ArithmeticError("eigenvector has vanishing leading coefficient")
    scale = vec[0]
    return [v / scale for v in vec]


@dataclass(frozen=True)
class EigenformData:
    """One Hecke eigenform: exact or high-precision coefficients plus the
    normalized eigenvalues lambda(n) = a(n)/n^((k-1)/2)."""

    weight: int
    index: int
    t2_eigenvalue: object  # int when rational, else mpmath.mpf
    is_rational: bool
    conjugates: tuple  # indices of the other forms in the same Galois orbit
    orbit_certified: bool
    coeffs: tuple  # a(0..N); ints when rational, else mpmath.mpf
    lam_values: tuple  # float lambda(n) for n = 0..N (index 0 unused, = 0.0)

    @property
    def n_terms(self):
        return len(self.coeffs) - 1

    def lam(self, n):
        """Normalized eigenvalue lambda(n)."""
        return self.lam_values[n]

    def satake_angle(self, p):
        """theta_p in [0, pi] with lambda(p) = 2 cos(theta_p)."""
        half = self.lam_values[p] / 2.0
        if abs(half) > 1.0 + 1e-9:
            raise ValueError(f"normalized eigenvalue at {p} outside [-2, 2]")
        return math.acos(max(-1.0, min(1.0, half)))

    def to_json_dict(self):
        return {
            "weight": self.weight,
            "index": self.index,
            "t2_eigenvalue": repr(self.t2_eigenvalue) if not self.is_rational else str(self.t2_eigenvalue),
            "is_rational": self.is_rational,
            "conjugates": list(self.conjugates),
            "coefficients": [str(c) if self.is_rational else mpmath.nstr(c, 40) for c in self.coeffs],
        }


def _lam_tuple(weight, coeffs):
    lams = [0.0]
    half_power = (weight - 1) / 2.0
    for n in range(1, len(coeffs)):
        lams.append(float(coeffs[n]) / float(n) ** half_power)
    return tuple(lams)


def hecke_eigenforms(weight, n_terms=None):
    """All Hecke eigenforms of the given weight, ordered by increasing T_2
    eigenvalue, with coefficients through q^n_terms."""
    dim = dim_cusp_forms(weight)
    if dim == 0:
        return []
    if n_terms is None:
        n_terms = dim + 20
    n_terms = max(n_terms, 2 * dim, dim + 20)
    key = (weight, n_terms)
    if key in _EIGENFORM_CACHE:
        return _EIGENFORM_CACHE[key]

    basis = miller_basis(weight, n_terms)
    matrix = hecke_matrix(weight, basis, p=2)
    charpoly = _char_poly(matrix)

    # certify integer eigenvalues exactly, then deflate
    with mpmath.workdps(_EIGEN_DPS):
        roots = mpmath.polyroots([mpmath.mpf(c) for c in charpoly], maxsteps=200, extraprec=200)
    rational_roots = []
    residual = charpoly
    for r in sorted(roots, key=lambda z: mpmath.mpf(z.real)):
        if abs(mpmath.im(r)) > mpmath.mpf(10) ** (-_EIGEN_DPS + 20):
            raise ArithmeticError("T_2 eigenvalues must be real")
        candidate = int(mpmath.nint(mpmath.re(r)))
        if _poly_eval_exact(residual, candidate) == 0:
            rational_roots.append(candidate)
            residual = _poly_deflate_exact(residual, candidate)
    irrational_degree = len(residual) - 1
    orbit_certified = irrational_degree <= 3

    entries = []  # (sort key, is_rational, eigenvalue, coords)
    for root in rational_roots:
        coords = _rational_kernel_vector(matrix, root)
        entries.append((float(root), True, root, coords))
    if irrational_degree > 0:
        with mpmath.workdps(_EIGEN_DPS):
            sub_roots = mpmath.polyroots(
                [mpmath.mpf(c) for c in residual], maxsteps=200, extraprec=200
            )
            mat_mp = mpmath.matrix(matrix)
            for root in sub_roots:
                lam = mpmath.re(root)
                coords = _mp_kernel_vector(mat_mp, lam)
                entries.append((float(lam), False, lam, coords))

    entries.sort(key=lambda e: e[0])
    if dim > 1:
        gaps = [entries[i + 1][0] - entries[i][0] for i in range(len(entries) - 1)]
        if min(gaps) < _SEPARATION_TOL:
            raise ArithmeticError("eigenvalue clustering below separation tolerance")

    irrational_indices = tuple(i for i, e in enumerate(entries) if not e[1])
    forms = []
    for index, (_, is_rational, eigenvalue, coords) in enumerate(entries):
        if is_rational:
            coeffs = []
            for n in range(n_terms + 1):
                value = sum(c * f.coefficient(n) for c, f in zip(coords, basis))
                if value.denominator != 1:
                    raise ArithmeticError("rational eigenform must have integer coefficients")
                coeffs.append(int(value))
            conjugates = ()
        else:
            with mpmath.workdps(_EIGEN_DPS):
                coeffs = [
                    mpmath.fsum(c * f.coefficient(n) for c, f in zip(coords, basis))
                    for n in range(n_terms + 1)
                ]
            conjugates = tuple(i for i in irrational_indices if i != index)
        coeffs = tuple(coeffs)
        forms.append(
            EigenformData(
                weight=weight,
                index=index,
                t2_eigenvalue=eigenvalue,
                is_rational=is_rational,
                conjugates=conjugates,
                orbit_certified=orbit_certified or is_rational,
                coeffs=coeffs,
                lam_values=_lam_tuple(weight, coeffs),
            )
        )
    _EIGENFORM_CACHE[key] = forms
    return forms


def _mp_kernel_vector(mat_mp, eigenvalue):
    """Kernel vector of (M - eigenvalue*I) in working precision, first entry 1,
    with a verified residual."""
    d = mat_mp.rows
    shifted = mat_mp - eigenvalue * mpmath.eye(d)
    # solve by fixing the first coordinate to 1 and least-squares-free direct
    # elimination on the remaining columns: rows 1..d-1 of shifted, unknowns 1..d-1
    if d == 1:
        coords = [mpmath.mpf(1)]
    else:
        sub = mpmath.matrix(d - 1, d - 1)
        rhs = mpmath.matrix(d - 1, 1)
        for i in range(1, d):
            rhs[i - 1] = -shifted[i, 0]
            for j in range(1, d):
                sub[i - 1, j - 1] = shifted[i, j]
        solution = mpmath.lu_solve(sub, rhs)
        coords = [mpmath.mpf(1)] + [solution[i] for i in range(d - 1)]
    vec = mpmath.matrix(coords)
    resid = mpmath.norm(mat_mp * vec - eigenvalue * vec)
    if resid >= mpmath.mpf(_RESIDUAL_FACTOR) * mpmath.norm(vec):
        raise ArithmeticError(f"eigenvector residual {mpmath.nstr(resid)} too large")
    return coords


# ------------------------------------------------- large prime-range eigenvalues


_PRIME_TABLE_CACHE = {}


def prime_eigenvalue_table(weight, limit):
    """Normalized eigenvalues lambda_g(p) for every eigenform g of the given
    weight, at all primes p <= limit, as read-only float64 arrays.

    Supports the two weights the desk-scale experiments sum over (12 and 24),
    where the required q-expansions stay affordable even at ranges in the
    millions: the big coefficient lists are built once, combined at prime
    indices only, and freed.  The widest table per weight is kept in memory,
    so repeated calls at equal or smaller limits are free.
    Returns {"primes": int64 array, "lambdas": [array per eigenform]} with
    eigenforms ordered as in hecke_eigenforms(weight).
    """
    cached = _PRIME_TABLE_CACHE.get(weight)
    if cached is None or cached["limit"] < limit:
        table = _build_prime_table(weight, limit)
        for arr in [table["primes"], *table["lambdas"]]:
            arr.flags.writeable = False
        cached = {"limit": limit, **table}
        _PRIME_TABLE_CACHE[weight] = cached
    n = int(np.searchsorted(cached["primes"], limit, side="right"))
    return {
        "primes": cached["primes"][:n],
        "lambdas": [arr[:n] for arr in cached["lambdas"]],
    }


def _build_prime_table(weight, limit):
    primes = primes_up_to(limit)
    parr = np.array(primes, dtype=np.int64)

    if weight == 12:
        delta = delta_qexp(limit)
        lam = np.empty(len(primes), dtype=np.float64)
        for i, p in enumerate(primes):
            lam[i] = float(delta.coefficient(p)) / float(p) ** 5.5
        return {"primes": parr, "lambdas": [lam]}

    if weight != 24:
        raise ValueError("large prime tables are provided for weights 12 and 24 only")

    out_len = limit + 1
    # first echelon column: (discriminant) * E4^3, built and freed stepwise
    delta = list(delta_qexp(limit).coeffs)
    e4 = list(eisenstein_series(4, limit).coeffs)
    e4sq = _poly_mul_exact(e4, e4, out_len)
    e4cu = _poly_mul_exact(e4sq, e4, out_len)
    del e4sq, e4
    b1 = _poly_mul_exact(delta, e4cu, out_len)
    del e4cu
    b2 = _poly_mul_exact(delta, delta, out_len)
    del delta

    b1_primes = [b1[p] for p in primes]
    b1_a2 = b1[2]
    del b1
    b2_primes = [b2[p] for p in primes]
    del b2

    # eigenform g = f1 + a_g(2) f2 in echelon coordinates, where
    # f1 = b1 - b1[2] f2 and f2 = b2; so a_g(p) = b1[p] + (a_g(2) - b1[2]) b2[p].
    # The irrational a_g(2) is carried as a 64-bit-scaled integer so the whole
    # combination stays exact until the final float division.
    forms = hecke_eigenforms(24)
    lambdas = []
    shift = 64
    scale = 1 << shift
    for g in forms:
        with mpmath.workdps(_EIGEN_DPS):
            delta_coeff = mpmath.mpf(g.coeffs[2]) - b1_a2
            delta_scaled = int(mpmath.nint(delta_coeff * scale))
        lam = np.empty(len(primes), dtype=np.float64)
        for i, p in enumerate(primes):
            numerator = (b1_primes[i] << shift) + delta_scaled * b2_primes[i]
            lam[i] = float(numerator) / (float(scale) * float(p) ** 11.5)
        lambdas.append(lam)
    return {"primes": parr, "lambdas": lambdas}
