"""Exact integer q-expansions for level-one modular forms.

Coefficients are Python big integers throughout; no floats enter until a form
is evaluated numerically.  Products of long expansions go through a Kronecker
substitution: coefficients are packed into one giant integer at a fixed byte
stride wide enough that convolution digits cannot collide, multiplied with
GMP (via gmpy2), and sliced back out.  Signed coefficients are handled by
packing the signed value directly and un-biasing each digit afterwards, so a
product costs a single big-integer multiplication.
"""

from dataclasses import dataclass

import gmpy2
import numpy as np

__all__ = [
    "QExpansion",
    "dim_cusp_forms",
    "eisenstein_series",
    "delta_qexp",
    "miller_basis",
]

# pure-Python divisor-sum sieve is fine up to here; beyond it only the
# weight-4 series (third-power sums) is supported, via the numpy split sieve
_SIGMA_PYTHON_LIMIT = 50_000


# ----------------------------------------------------------- multiply engines


def _poly_mul_schoolbook(a, b, out_len):
    """Reference quadratic-time product; the oracle for the packed engine."""
    out = [0] * out_len
    for i, ai in enumerate(a):
        if ai == 0 or i >= out_len:
            continue
        jmax = min(len(b), out_len - i)
        for j in range(jmax):
            bj = b[j]
            if bj:
                out[i + j] += ai * bj
    return out


def _pack_signed(coeffs, stride):
    # sum of c_i * 2^(8*stride*i), built as (positive part) - (negative part)
    pos = bytearray(stride * len(coeffs))
    neg = bytearray(stride * len(coeffs))
    for i, c in enumerate(coeffs):
        if c > 0:
            chunk = c.to_bytes((c.bit_length() + 7) // 8, "little")
            off = i * stride
            pos[off : off + len(chunk)] = chunk
        elif c < 0:
            chunk = (-c).to_bytes(((-c).bit_length() + 7) // 8, "little")
            off = i * stride
            neg[off : off + len(chunk)] = chunk
    return int.from_bytes(bytes(pos), "little") - int.from_bytes(bytes(neg), "little")


def _poly_mul_exact(a, b, out_len):
    """Exact signed convolution of integer lists via Kronecker substitution."""
    la, lb = len(a), len(b)
    if la == 0 or lb == 0 or out_len <= 0:
        return [0] * max(out_len, 0)
    out_len = min(out_len, la + lb - 1)
    max_a = max(max(a), -min(a))
    max_b = max(max(b), -min(b))
    if max_a == 0 or max_b == 0:
        return [0] * out_len
    # every convolution digit is bounded by max_a*max_b*min(la,lb); one extra
    # bit leaves room for the sign bias below
    bound = max_a * max_b * min(la, lb)
    stride = (bound.bit_length() + 1 + 7) // 8
    width = 8 * stride
    half = 1 << (width - 1)

    prod = int(gmpy2.mpz(_pack_signed(a, stride)) * gmpy2.mpz(_pack_signed(b, stride)))
    # bias every digit of the full product so all digits become nonnegative
    # and carry-free, then slice bytes back out
    full_len = la + lb - 1
    bias = int.from_bytes(half.to_bytes(stride, "little") * full_len, "little")
    raw = (prod + bias).to_bytes(stride * full_len, "little")
    return [
        int.from_bytes(raw[i * stride : (i + 1) * stride], "little") - half
        for i in range(out_len)
    ]


# ------------------------------------------------------------- divisor sieves


def _sigma_python(power, limit):
    table = [0] * (limit + 1)
    for d in range(1, limit + 1):
        dp = d**power
        for m in range(d, limit + 1, d):
            table[m] += dp
    return table


def _sigma3_numpy(limit):
    # d^3 can exceed 64 bits near 3e6, and the accumulated sums certainly do,
    # so accumulate the low and high 32-bit halves of each cube separately:
    # the low half sums to < d(n)*2^32 and the high half to < sigma_3(n)/2^32,
    # both comfortably inside uint64
    lo = np.zeros(limit + 1, dtype=np.uint64)
    hi = np.zeros(limit + 1, dtype=np.uint64)
    mask = (1 << 32) - 1
    for d in range(1, limit + 1):
        cube = d * d * d
        lo[d::d] += np.uint64(cube & mask)
        hi[d::d] += np.uint64(cube >> 32)
    lo_list = lo.tolist()
    hi_list = hi.tolist()
    return [(h << 32) + l for h, l in zip(hi_list, lo_list)]


def _sigma_table(power, limit):
    """[0, sigma_power(1), ..., sigma_power(limit)] as exact integers."""
    if limit <= _SIGMA_PYTHON_LIMIT:
        return _sigma_python(power, limit)
    if power == 3:
        return _sigma3_numpy(limit)
    raise ValueError("truncations this deep are supported only for the weight-4 series")


# ------------------------------------------------------------------ the types


@dataclass(frozen=True)
class QExpansion:
    """A modular form of the given even weight as exact coefficients a(0..N).

    Binary operations truncate to the shorter operand: the product of two
    truncations is valid exactly through min(N_left, N_right).
    """

    weight: int
    coeffs: tuple

    def __post_init__(self):
        if self.weight % 2 or self.weight < 4:
            raise ValueError("weight must be an even integer >= 4")
        if not self.coeffs:
            raise ValueError("need at least the constant coefficient")

    @property
    def n_terms(self):
        """Largest n with a(n) stored."""
        return len(self.coeffs) - 1

    @property
    def is_cuspidal(self):
        return self.coeffs[0] == 0

    def coefficient(self, n):
        return self.coeffs[n]

    def truncate(self, n_max):
        if n_max >= self.n_terms:
            return self
        return QExpansion(self.weight, self.coeffs[: n_max + 1])

    def __add__(self, other):
        self._check_weight(other)
        n = min(self.n_terms, other.n_terms)
        return QExpansion(
            self.weight, tuple(x + y for x, y in zip(self.coeffs, other.coeffs))[: n + 1]
        )

    def __sub__(self, other):
        self._check_weight(other)
        n = min(self.n_terms, other.n_terms)
        return QExpansion(
            self.weight, tuple(x - y for x, y in zip(self.coeffs, other.coeffs))[: n + 1]
        )

    def scale(self, c):
        return QExpansion(self.weight, tuple(c * x for x in self.coeffs))

    def sub_scaled(self, other, c):
        """self - c*other in one pass."""
        self._check_weight(other)
        n = min(self.n_terms, other.n_terms)
        return QExpansion(
            self.weight,
            tuple(x - c * y for x, y in zip(self.coeffs[: n + 1], other.coeffs[: n + 1])),
        )

    def __mul__(self, other):
        if not isinstance(other, QExpansion):
            return NotImplemented
        n = min(self.n_terms, other.n_terms)
        prod = _poly_mul_exact(list(self.coeffs), list(other.coeffs), n + 1)
        return QExpansion(self.weight + other.weight, tuple(prod))

    def divide_exact(self, divisor):
        """Divide every coefficient by an integer, requiring exactness."""
        out = []
        for c in self.coeffs:
            q, r = divmod(c, divisor)
            if r:
                raise ValueError(f"coefficient {c} not divisible by {divisor}")
            out.append(q)
        return QExpansion(self.weight, tuple(out))

    def _check_weight(self, other):
        if self.weight != other.weight:
            raise ValueError("weights differ")

    def to_json_dict(self):
        return {
            "weight": self.weight,
            "coefficients": [str(c) for c in self.coeffs],
        }

    @classmethod
    def from_json_dict(cls, data):
        return cls(int(data["weight"]), tuple(int(c) for c in data["coefficients"]))


# -------------------------------------------------------------- the generators


def eisenstein_series(weight, n_terms):
    """E4 = 1 + 240 sum sigma_3(n) q^n or E6 = 1 - 504 sum sigma_5(n) q^n."""
    if n_terms < 1:
        raise ValueError("need at least one power of q")
    if weight == 4:
        sig = _sigma_table(3, n_terms)
        return QExpansion(4, tuple([1] + [240 * s for s in sig[1:]]))
    if weight == 6:
        sig = _sigma_table(5, n_terms)
        return QExpansion(6, tuple([1] + [-504 * s for s in sig[1:]]))
    raise ValueError("only the weight-4 and weight-6 generators exist")


def _eta_power_24(n_terms):
    """Coefficients of prod (1-q^n)^24 up to q^n_terms, via the pentagonal
    sparse expansion of prod (1-q^n) and four squarings."""
    base = [0] * (n_terms + 1)
    j = 0
    while True:
        hit = False
        sign = -1 if j % 2 else 1
        for jj in (j, -j) if j else (0,):
            e = jj * (3 * jj - 1) // 2
            if e <= n_terms:
                base[e] += sign
                hit = True
        if not hit:
            break
        j += 1
    out = n_terms + 1
    p2 = _poly_mul_exact(base, base, out)
    p4 = _poly_mul_exact(p2, p2, out)
    p8 = _poly_mul_exact(p4, p4, out)
    p16 = _poly_mul_exact(p8, p8, out)
    return _poly_mul_exact(p16, p8, out)


def delta_qexp(n_terms):
    """The weight-12 cusp form q prod (1-q^n)^24, exact to q^n_terms."""
    if n_terms < 1:
        raise ValueError("need at least one power of q")
    tail = _eta_power_24(n_terms - 1)
    return QExpansion(12, tuple([0] + tail))


def dim_cusp_forms(weight):
    """Dimension of the space of level-one cusp forms of the given weight."""
    if weight % 2 or weight < 4:
        return 0
    if weight % 12 == 2:
        return weight // 12 - 1
    return weight // 12


def miller_basis(weight, n_terms):
    """Echelonized integral basis f_1..f_d of the weight-k cusp forms:
    a(j)(f_i) = delta_ij for 1 <= i, j <= d, all coefficients exact integers.

    Built from the monomials D^c E4^a E6^b (D the weight-12 cusp generator)
    with leading term q^c, then reduced by exact integer elimination.
    """
    if weight % 2:
        raise ValueError("odd weights carry no forms at level one")
    dim = dim_cusp_forms(weight)
    if dim == 0:
        return []
    if n_terms < dim + 20:
        raise ValueError(f"need at least {dim + 20} coefficients at weight {weight}")

    e4 = eisenstein_series(4, n_terms)
    delta = delta_qexp(n_terms)
    monomials = []
    delta_pow = delta
    for c in range(1, dim + 1):
        rest = weight - 12 * c
        b = 1 if rest % 4 == 2 else 0
        a = (rest - 6 * b) // 4
        form = delta_pow
        for _ in range(a):
            form = form * e4
        if b:
            form = form * eisenstein_series(6, n_terms)
        monomials.append(form)
        if c < dim:
            delta_pow = delta_pow * delta

    # each monomial starts q^c + ...; clear columns 1..dim from the bottom up
    basis = list(monomials)
    for i in range(dim - 1, -1, -1):
        f = basis[i]
        for j in range(i + 1, dim):
            f = f.sub_scaled(basis[j], f.coefficient(j + 1))
        basis[i] = f
    return basis
