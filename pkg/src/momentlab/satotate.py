"""Probabilistic model of eigenvalue families at primes.

Satake angles theta are drawn from the measure (2/pi) sin^2(theta) dtheta on
[0, pi] and eigenvalues modeled as lambda = 2cos(theta), independently across
primes and forms.  Even moments of lambda are Catalan numbers, so the exact
moments computed here by quadrature are the same quantities the combinatorial
moment functions produce, which is what the model-equivalence tests pin down.

Sampling is vectorized rejection (propose theta uniform, accept with
probability sin^2 theta, acceptance rate 1/2) on top of counter-based Philox
streams: the form axis is split into fixed blocks of 4096 rows and block b of
seed s reads the stream keyed (s, b), so any block can be produced
independently of the others and the full matrix is reproducible bit for bit.
"""

import csv
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .primes import primes_up_to

__all__ = [
    "SAMPLER_ID",
    "FORM_BLOCK",
    "FamilySample",
    "sample_lambda",
    "sample_lambda_block",
    "sample_family",
    "load_family",
    "st_moment_exact",
    "exp_moment_exact",
    "mixed_moment",
    "model_expectation_product",
    "adaptive_gauss_legendre",
]

SAMPLER_ID = "philox-2x64key-block4096-sin2rejection-v1"
FORM_BLOCK = 4096
MOMENT_POWER_CAP = 40

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def block_rng(seed, block_index):
    """Philox generator for one block of forms; key = (seed, block index)."""
    key = np.array([np.uint64(seed), np.uint64(block_index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_lambda_block(rng, size):
    """Draw `size` model eigenvalues from one stream, in stream order."""
    out = np.empty(size, dtype=np.float64)
    filled = 0
    while filled < size:
        remaining = size - filled
        batch = max(1024, int(2.2 * remaining))
        theta = rng.uniform(0.0, math.pi, size=batch)
        accept = rng.uniform(0.0, 1.0, size=batch) < np.sin(theta) ** 2
        got = theta[accept][:remaining]
        out[filled : filled + got.size] = got
        filled += got.size
    return 2.0 * np.cos(out)


def sample_lambda(rng):
    """One model eigenvalue in [-2, 2] from an already-seeded generator."""
    return float(sample_lambda_block(rng, 1)[0])


@dataclass(frozen=True)
class FamilySample:
    """Synthetic family: values[i, j] models lambda_{g_i}(primes[j])."""

    primes: tuple
    values: np.ndarray
    seed: int
    sampler_id: str = SAMPLER_ID

    def __post_init__(self):
        if self.values.shape != (self.values.shape[0], len(self.primes)):
            raise ValueError("values must be n_forms x n_primes")
        if self.values.size and (
            self.values.min() < -2.0 or self.values.max() > 2.0
        ):
            raise ValueError("model eigenvalues must lie in [-2, 2]")

    @property
    def n_forms(self):
        return self.values.shape[0]

    def write(self, csv_path):
        """CSV with a prime header row plus a JSON metadata sidecar."""
        csv_path = Path(csv_path)
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([str(p) for p in self.primes])
            for row in self.values:
                writer.writerow([format(v, ".17g") for v in row])
        sidecar = csv_path.with_suffix(csv_path.suffix + ".meta.json")
        meta = {
            "seed": self.seed,
            "X": max(self.primes) if self.primes else 0,
            "n_forms": self.n_forms,
            "sampler_id": self.sampler_id,
        }
        with open(sidecar, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return sidecar


def load_family(csv_path):
    csv_path = Path(csv_path)
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        primes = tuple(int(p) for p in next(reader))
        values = np.array([[float(v) for v in row] for row in reader])
    sidecar = csv_path.with_suffix(csv_path.suffix + ".meta.json")
    meta = json.loads(sidecar.read_text())
    return FamilySample(
        primes=primes,
        values=values,
        seed=meta["seed"],
        sampler_id=meta["sampler_id"],
    )


def sample_family(X, n_forms, seed):
    """Independent model eigenvalues at all primes <= X for n_forms forms."""
    if X < 2:
        raise ValueError("need X >= 2 so the family sees at least one prime")
    if n_forms < 1:
        raise ValueError("need n_forms >= 1")
    primes = tuple(primes_up_to(X))
    n_primes = len(primes)
    values = np.empty((n_forms, n_primes), dtype=np.float64)
    for block_start in range(0, n_forms, FORM_BLOCK):
        block_index = block_start // FORM_BLOCK
        rows = min(FORM_BLOCK, n_forms - block_start)
        rng = block_rng(seed, block_index)
        # Always draw the full block so row contents depend only on
        # (seed, block index, primes), never on the requested family size.
        flat = sample_lambda_block(rng, FORM_BLOCK * n_primes)
        block = flat.reshape(FORM_BLOCK, n_primes)
        values[block_start : block_start + rows] = block[:rows]
    return FamilySample(primes=primes, values=values, seed=int(seed))


def adaptive_gauss_legendre(f, a, b, tol=1e-12, max_depth=40):
    """Adaptive panel-splitting Gauss-Legendre quadrature of a vectorized f.

    Each panel is accepted when its 24-point value agrees with the sum of its
    two half-panel values within the panel's share of tol.
    """

    def panel(lo, hi):
        mid = 0.5 * (lo + hi)
        rad = 0.5 * (hi - lo)
        return rad * float(np.dot(_GL_WEIGHTS, f(mid + rad * _GL_NODES)))

    def recurse(lo, hi, whole, tol_here, depth):
        mid = 0.5 * (lo + hi)
        left = panel(lo, mid)
        right = panel(mid, hi)
        if abs(left + right - whole) <= tol_here or depth >= max_depth:
            return left + right
        return recurse(lo, mid, left, 0.5 * tol_here, depth + 1) + recurse(
            mid, hi, right, 0.5 * tol_here, depth + 1
        )

    return recurse(a, b, panel(a, b), tol, 0)


def st_moment_exact(power):
    """Moment E[lambda^power] by quadrature: Catalan(power/2) or 0."""
    if power < 0 or power > MOMENT_POWER_CAP:
        raise ValueError(f"need 0 <= power <= {MOMENT_POWER_CAP}")
    scale = 2.0**power

    def f(theta):
        return (2.0 * np.cos(theta)) ** power * (2.0 / math.pi) * np.sin(theta) ** 2

    return adaptive_gauss_legendre(f, 0.0, math.pi, tol=1e-12 * max(1.0, scale))


def exp_moment_exact(a):
    """E[exp(a lambda)] by quadrature, relative error <= 1e-10."""
    if abs(a) > 50:
        raise ValueError("need |a| <= 50")

    def f(theta):
        return np.exp(2.0 * a * np.cos(theta)) * (2.0 / math.pi) * np.sin(theta) ** 2

    # The value is >= exp(a E[lambda]) = 1 and <= e^{2|a|}; scale the absolute
    # tolerance to the integrand's peak so the relative target holds.
    return adaptive_gauss_legendre(f, 0.0, math.pi, tol=1e-13 * math.exp(2 * abs(a)))


@lru_cache(maxsize=4096)
def mixed_moment(a, b):
    """E[lambda^a (lambda^2-1)^b] under the model, by quadrature."""
    if a < 0 or b < 0 or a > MOMENT_POWER_CAP or b > MOMENT_POWER_CAP:
        raise ValueError(f"need powers in 0..{MOMENT_POWER_CAP}")

    def f(theta):
        lam = 2.0 * np.cos(theta)
        return lam**a * (lam**2 - 1.0) ** b * (2.0 / math.pi) * np.sin(theta) ** 2

    scale = 2.0**a * 3.0**b
    return adaptive_gauss_legendre(f, 0.0, math.pi, tol=1e-13 * max(1.0, scale))


def model_expectation_product(powers):
    """Product over independent primes of mixed moments.

    `powers` lists one (a, b) pair per prime: a is the power on lambda(p),
    b the power on lambda(p^2) = lambda(p)^2 - 1.
    """
    out = 1.0
    for a, b in powers:
        out *= mixed_moment(int(a), int(b))
        if out == 0.0:
            return 0.0
    return out
