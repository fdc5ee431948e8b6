"""Acceptance battery: one independent pass/fail record per criterion.

Each criterion function measures what it needs, returns a record
``{"criterion": n, "name": ..., "passed": bool, "details": {...}}``,
and writes any table it is required to emit into the output directory.
``run_battery`` executes all of them, attaches wall-clock runtimes for
console display, and writes ``acceptance_report.json``; runtimes are
deliberately excluded from that artifact so that two runs with the same
seeds produce byte-identical files (the final criterion compares two
full battery runs byte for byte via :func:`compare_artifact_trees`).

Seeds are fixed constants.  The Monte Carlo criterion asserts a 3-sigma
agreement in at least 99 of 100 configurations; at a random seed that
has a few-percent chance of failing by design, so the seed was chosen
once, checked, and frozen.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from time import perf_counter

import numpy as np

from .forms import (
    PrecisionError,
    delta_qexp,
    dim_cusp_forms,
    eisenstein_series,
    fourth_moment,
    harmonic_sum_check,
    hecke_eigenforms,
    petersson_full_diagonal,
    sym_square_L1,
    triple_overlap,
    watson_L_value,
)
from .hecke import (
    POWER_CAP,
    PrimeFactorization,
    catalan,
    expand_lambda_power,
    lambda_moment,
    single_prime_square_moment,
)
from .oracles import verify_lemma_instance
from .pipeline import (
    chain_table_rows,
    chain_validator,
    truncated_exp_dominates,
    truncated_exp_exact,
    partition_params,
    log_l_margin_rows,
)
from .primes import primes_in, primes_up_to
from .report_io import write_csv, write_json
from .satotate import model_expectation_product, sample_family

__all__ = [
    "CRITERIA",
    "compare_artifact_trees",
    "run_battery",
    "write_battery_report",
]

# Frozen seeds (see module docstring).
_SYSTEM_SEED = 20260703
_MODEL_SEED = 20260816
_MC_CONFIG_SEED = 101


def _pool_map(fn, items, threads):
    """Map ``fn`` over ``items`` with a worker pool, preserving order.

    ``executor.map`` yields results in input order, so the merge is
    deterministic regardless of completion order or pool size.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _record(num, name, passed, details):
    return {
        "criterion": num,
        "name": name,
        "passed": bool(passed),
        "details": details,
    }


# --------------------------------------------------- 1: moment identities


def _prime_power(exponent):
    return PrimeFactorization(((2, exponent),) if exponent else ())


def _c1_moment_identities(outdir, threads):
    failures = []
    for m in range(21):
        if lambda_moment(_prime_power(2 * m)) != catalan(m):
            failures.append(f"even moment at exponent {2 * m}")
    for m in range(10):
        if lambda_moment(_prime_power(2 * m + 1)) != 0:
            failures.append(f"odd moment at exponent {2 * m + 1}")
    square_small = [single_prime_square_moment(b) for b in (1, 2, 3)]
    if square_small != [0, 1, 1]:
        failures.append(f"square moments at exponents 1..3: {square_small}")
    max_ratio = 0.0
    for beta in range(1, 21):
        value = single_prime_square_moment(beta)
        if not isinstance(value, int) or abs(value) > 3**beta:
            failures.append(f"square moment bound at exponent {beta}")
        else:
            max_ratio = max(max_ratio, abs(value) / 3.0**beta)
    return _record(
        1,
        "moment-identities",
        not failures,
        {
            "even_exponents_checked": 21,
            "odd_exponents_checked": 10,
            "square_exponents_checked": 20,
            "max_square_to_bound_ratio": max_ratio,
            "failures": failures,
        },
    )


# ------------------------------------------- 2: power-expansion oracle


def _c2_power_expansion(outdir, threads):
    failures = []
    worst = 0.0
    n_grid = 200
    thetas = [(t + 0.5) * math.pi / n_grid for t in range(n_grid)]
    for alpha in range(1, 13):
        expansion = expand_lambda_power(alpha)
        for theta in thetas:
            sin_t = math.sin(theta)
            value = expansion.evaluate(
                lambda m, s=sin_t, t=theta: math.sin((m + 1) * t) / s
            )
            target = (2.0 * math.cos(theta)) ** alpha
            err = abs(value - target) / max(1.0, abs(target))
            worst = max(worst, err)
    if worst > 1e-10:
        failures.append(f"substitution error {worst:.3e} > 1e-10")
    for alpha in range(1, POWER_CAP + 1):
        expansion = expand_lambda_power(alpha)
        coeffs = expansion.coefficients()
        total = sum(c * (m + 1) for m, c in coeffs.items())
        if expansion.degenerate_value() != 2**alpha or total != 2**alpha:
            failures.append(f"degenerate value at power {alpha}")
        if any(c < 0 or c > 2**alpha for c in coeffs.values()):
            failures.append(f"coefficient bound at power {alpha}")
        if any(not isinstance(c, int) for c in coeffs.values()):
            failures.append(f"non-integer coefficient at power {alpha}")
    return _record(
        2,
        "power-expansion-oracle",
        not failures,
        {
            "grid_points": n_grid,
            "max_power_checked_exact": POWER_CAP,
            "max_substitution_error": worst,
            "failures": failures,
        },
    )


# ------------------------------------------------ 3: window-sum bounds


def _c3_one_system(args):
    index, primes_pool = args
    rng = np.random.default_rng([_SYSTEM_SEED, index])
    length = int(rng.integers(3, 26))
    start = int(rng.integers(0, len(primes_pool) - length))
    window_primes = primes_pool[start : start + length]
    window = (window_primes[0] - 1, window_primes[-1])
    u = {
        p: Fraction(int(rng.integers(-32, 33)), 16) for p in window_primes
    }

    out = {
        "instances": 0,
        "failures": [],
        "min_slack": math.inf,
        "odd_zero": 0,
        "dual": 0,
        "max_dual_diff": 0.0,
        "n_seen": set(),
    }

    # Even tuple length, shrunk until the multiset enumeration stays small.
    n = int(rng.choice([2, 4, 6]))
    while n > 2 and math.comb(length + n - 1, n) > 60000:
        n -= 2
    out["n_seen"].add(n)
    rec = verify_lemma_instance(
        "combinato", {"window": window, "u": u, "n": n, "strategy": "auto"}
    )
    out["instances"] += 1
    out["min_slack"] = min(out["min_slack"], rec["slack"])
    if not rec["pass"]:
        out["failures"].append(f"system {index}: |sum| > bound at length {n}")
    if length**n <= 50000:
        direct = verify_lemma_instance(
            "combinato", {"window": window, "u": u, "n": n, "strategy": "direct"}
        )
        part = verify_lemma_instance(
            "combinato",
            {"window": window, "u": u, "n": n, "strategy": "partition"},
        )
        out["dual"] += 1
        out["max_dual_diff"] = max(
            out["max_dual_diff"], abs(direct["lhs"] - part["lhs"])
        )
        if direct["lhs_exact"] != part["lhs_exact"]:
            out["failures"].append(
                f"system {index}: strategies disagree at length {n}"
            )

    # Odd tuple lengths must vanish identically (bound is 0, so "pass"
    # is exact vanishing).
    odd_lengths = (3, 5) if length <= 12 else (3,)
    for n_odd in odd_lengths:
        rec = verify_lemma_instance(
            "combinato",
            {"window": window, "u": u, "n": n_odd, "strategy": "auto"},
        )
        out["instances"] += 1
        if rec["pass"] and rec["lhs"] == 0.0:
            out["odd_zero"] += 1
        else:
            out["failures"].append(
                f"system {index}: odd length {n_odd} sum not exactly zero"
            )

    # Squared-coefficient window: dyadic index, half-length M.
    m_dyadic = int(rng.integers(3, 6))
    M = int(rng.integers(1, 4))
    sq_primes = primes_in(2**m_dyadic, 2 ** (m_dyadic + 1))
    w = {p: Fraction(int(rng.integers(-32, 33)), 16) for p in sq_primes}
    rec = verify_lemma_instance("combinato2", {"m": m_dyadic, "w": w, "M": M})
    out["instances"] += 1
    out["min_slack"] = min(out["min_slack"], rec["slack"])
    if not rec["pass"]:
        out["failures"].append(
            f"system {index}: squared window m={m_dyadic} M={M} exceeds bound"
        )
    return out


def _c3_window_sums(outdir, threads):
    primes_pool = primes_up_to(2500)
    results = _pool_map(
        _c3_one_system, [(i, primes_pool) for i in range(50)], threads
    )
    failures = []
    instances = odd_zero = dual = 0
    min_slack = math.inf
    max_dual_diff = 0.0
    n_seen = set()
    for res in results:
        failures.extend(res["failures"])
        instances += res["instances"]
        odd_zero += res["odd_zero"]
        dual += res["dual"]
        min_slack = min(min_slack, res["min_slack"])
        max_dual_diff = max(max_dual_diff, res["max_dual_diff"])
        n_seen |= res["n_seen"]
    if dual < 15:
        failures.append(f"only {dual} dual-strategy instances (need >= 15)")
    if n_seen != {2, 4, 6}:
        failures.append(f"even tuple lengths exercised: {sorted(n_seen)}")
    if max_dual_diff > 1e-12:
        failures.append(f"dual-strategy drift {max_dual_diff:.3e}")
    return _record(
        3,
        "window-sum-bounds",
        not failures,
        {
            "systems": 50,
            "instances": instances,
            "odd_vanishing_checks": odd_zero,
            "dual_strategy_instances": dual,
            "max_dual_difference": max_dual_diff,
            "min_slack": min_slack,
            "tuple_lengths": sorted(n_seen),
            "failures": failures,
        },
    )


# -------------------------------------------- 4: model equivalence


def _exact_monomial_value(powers):
    """Exact independent-model expectation of a (a, b)-monomial list where
    each prime carries a pure lambda power or a pure square power."""
    value = 1
    for a, b in powers:
        if a and b:
            raise ValueError("mixed factors have no split main term")
        if a:
            value *= catalan(a // 2) if a % 2 == 0 else 0
        if b:
            value *= single_prime_square_moment(b)
    return value


def _c4_model_equivalence(outdir, threads):
    failures = []

    def one_monomial(index):
        rng = np.random.default_rng([_MODEL_SEED, 1, index])
        n_factors = int(rng.integers(1, 7))
        powers = []
        for _ in range(n_factors):
            if rng.integers(0, 2):
                powers.append((int(rng.integers(1, 9)), 0))
            else:
                powers.append((0, int(rng.integers(1, 7))))
        exact = _exact_monomial_value(powers)
        model = model_expectation_product(powers)
        return abs(model - exact) / max(1.0, abs(exact))

    errors = _pool_map(one_monomial, range(100), threads)
    worst_err = max(errors)
    if worst_err > 1e-9:
        failures.append(f"quadrature vs exact main term drift {worst_err:.3e}")

    sample = sample_family(100, 10**6, _MODEL_SEED)
    values = sample.values
    n_forms, n_primes = values.shape

    def one_config(index):
        rng = np.random.default_rng([_MC_CONFIG_SEED, 2, index])
        n_factors = int(rng.integers(1, 4))
        cols = rng.choice(n_primes, size=n_factors, replace=False)
        stat = np.ones(n_forms)
        exact = 1
        for col in sorted(int(c) for c in cols):
            v = values[:, col]
            if rng.integers(0, 2):
                a = int(rng.integers(1, 5))
                stat = stat * v**a
                exact *= catalan(a // 2) if a % 2 == 0 else 0
            else:
                b = int(rng.integers(1, 3))
                stat = stat * (v * v - 1.0) ** b
                exact *= single_prime_square_moment(b)
        mean = float(stat.mean())
        se = float(stat.std(ddof=1)) / math.sqrt(n_forms)
        return abs(mean - exact) / se

    z_scores = _pool_map(one_config, range(100), threads)
    inside = sum(1 for z in z_scores if z <= 3.0)
    if inside < 99:
        failures.append(f"only {inside}/100 configurations within 3 sigma")
    return _record(
        4,
        "model-equivalence",
        not failures,
        {
            "monomials": 100,
            "max_main_term_error": worst_err,
            "mc_forms": n_forms,
            "mc_configs_within_3_sigma": inside,
            "mc_max_z": max(z_scores),
            "failures": failures,
        },
    )


# --------------------------------------- 5: modular-form exactness


def _c5_modular_forms(outdir, threads):
    failures = []
    n_terms = 60
    e4 = eisenstein_series(4, n_terms)
    e6 = eisenstein_series(6, n_terms)
    delta = delta_qexp(n_terms)
    built = (e4 * e4 * e4).sub_scaled(e6 * e6, 1).divide_exact(1728)
    if built.coeffs != delta.coeffs:
        failures.append("(E4^3 - E6^2)/1728 does not match the discriminant")
    if any(not isinstance(c, int) for c in built.coeffs):
        failures.append("discriminant coefficients not integral")
    if delta.coefficient(2) != -24 or delta.coefficient(3) != 252:
        failures.append("tau(2), tau(3) reference values")
    if dim_cusp_forms(24) != 2:
        failures.append(f"dim of weight-24 cusp space = {dim_cusp_forms(24)}")

    primes = primes_up_to(1000)
    max_abs = 0.0
    worst_mult = 0.0
    n_forms = 0
    coeff_len = 1010
    pairs = [
        (m, n)
        for m in range(2, 32)
        for n in range(m + 1, coeff_len // m + 1)
        if math.gcd(m, n) == 1
    ]
    for weight in range(12, 42, 2):
        for g in hecke_eigenforms(weight, n_terms=coeff_len):
            n_forms += 1
            lam = [0.0] * (coeff_len + 1)
            for n in range(1, coeff_len + 1):
                lam[n] = g.lam(n)
            for p in primes:
                max_abs = max(max_abs, abs(lam[p]))
            for m, n in pairs:
                err = abs(lam[m * n] - lam[m] * lam[n]) / max(
                    1.0, abs(lam[m] * lam[n])
                )
                worst_mult = max(worst_mult, err)
    if max_abs > 2.0 + 1e-9:
        failures.append(f"eigenvalue bound violated: {max_abs}")
    if worst_mult > 1e-10:
        failures.append(f"multiplicativity drift {worst_mult:.3e}")
    return _record(
        5,
        "modular-forms-exactness",
        not failures,
        {
            "eigenforms": n_forms,
            "primes_checked": len(primes),
            "max_abs_eigenvalue": max_abs,
            "coprime_pairs": len(pairs),
            "max_multiplicativity_error": worst_mult,
            "failures": failures,
        },
    )


# ------------------------------------- 6: trace-formula closure


def _c6_trace_formula(outdir, threads):
    failures = []
    worst = 0.0
    worst_unit = 0.0
    for weight2k in (24, 28, 32):
        for t in (1, 2, 3):
            for u in (1, 2, 3):
                h = harmonic_sum_check(t, u, weight2k)
                d = petersson_full_diagonal(t, u, weight2k)
                worst = max(worst, abs(h - d))
        worst_unit = max(worst_unit, abs(harmonic_sum_check(1, 1, weight2k) - 1.0))
    if worst >= 1e-3:
        failures.append(f"harmonic sum vs trace formula drift {worst:.3e}")
    if worst_unit >= 1e-2:
        failures.append(f"diagonal unit value off by {worst_unit:.3e}")
    return _record(
        6,
        "trace-formula-closure",
        not failures,
        {
            "weights": [24, 28, 32],
            "max_closure_error": worst,
            "max_unit_error": worst_unit,
            "failures": failures,
        },
    )


# ------------------------------------------ 7: Watson round trip


def _c7_watson_roundtrip(outdir, threads):
    failures = []
    per_weight = {}
    min_central = math.inf
    for k in (12, 16, 18, 20):
        f = hecke_eigenforms(k)[0]
        partners = hecke_eigenforms(2 * k)
        m4 = fourth_moment(f)
        parseval = math.fsum(triple_overlap(f, g) ** 2 for g in partners)
        L1f = sym_square_L1(f)
        central = [watson_L_value(f, g) for g in partners]
        min_central = min(min_central, min(central))
        reassembled = (
            math.pi**3
            / (2.0 * (2 * k - 1))
            * math.fsum(
                c / (L1f**2 * sym_square_L1(g))
                for c, g in zip(central, partners)
            )
        )
        rel_watson = abs(reassembled - m4) / m4
        rel_parseval = abs(parseval - m4) / m4
        per_weight[str(k)] = {
            "fourth_moment": m4,
            "watson_error": rel_watson,
            "parseval_error": rel_parseval,
        }
        if rel_watson > 1e-3:
            failures.append(f"weight {k}: Watson reassembly off by {rel_watson:.3e}")
        if rel_parseval > 1e-3:
            failures.append(f"weight {k}: Parseval off by {rel_parseval:.3e}")
    if min_central < 0.0:
        failures.append(f"negative central value {min_central:.3e}")
    return _record(
        7,
        "watson-roundtrip",
        not failures,
        {
            "weights": [12, 16, 18, 20],
            "per_weight": per_weight,
            "min_central_value": min_central,
            "failures": failures,
        },
    )


# ------------------------------------------------ 8: margin table


def _c8_margin_table(outdir, threads):
    failures = []
    k = 12
    f = hecke_eigenforms(k)[0]
    partners = hecke_eigenforms(2 * k)
    x_values = [k**2, k**4, k**6]
    rows = log_l_margin_rows(f, partners, x_values, k)
    rows_again = log_l_margin_rows(f, partners, x_values, k)
    max_drift = max(
        abs(a["margin"] - b["margin"]) for a, b in zip(rows, rows_again)
    )
    if max_drift > 1e-6:
        failures.append(f"margins not reproducible: drift {max_drift:.3e}")
    if not all(math.isfinite(r["margin"]) for r in rows):
        failures.append("non-finite margin")
    write_csv(
        outdir / "criterion_08_margins.csv",
        ["g_index", "x", "bound", "log_l_value", "margin"],
        rows,
    )
    return _record(
        8,
        "margin-table",
        not failures,
        {
            "rows": len(rows),
            "x_values": [float(x) for x in x_values],
            "max_recompute_drift": max_drift,
            "min_margin": min(r["margin"] for r in rows),
            "max_margin": max(r["margin"] for r in rows),
            "failures": failures,
        },
    )


# ---------------------------------------------- 9: chain validator


def _c9_chain_validator(outdir, threads):
    failures = []
    params = partition_params(10**6, 2.0)
    report = chain_validator(params, check_exponents=(10**4, 10**5))
    minimal = report["minimal_exponent"]
    rel = abs(minimal - 9.4e4) / 9.4e4
    if rel > 0.01:
        failures.append(f"minimal exponent {minimal} not within 1% of 9.4e4")
    if not report["exponent_checks"][10**5]["passes"]:
        failures.append("threshold exponent 1e5 does not pass every step")
    if report["exponent_checks"][10**4]["passes"]:
        failures.append("threshold exponent 1e4 unexpectedly passes")
    if not math.isfinite(report["log_geometric_sum"]):
        failures.append("geometric tail sum not finite in log space")
    write_csv(
        outdir / "criterion_09_chain.csv",
        ["j", "beta_j", "term", "log_term", "pass"],
        chain_table_rows(report),
    )
    return _record(
        9,
        "chain-validator",
        not failures,
        {
            "minimal_exponent": minimal,
            "relative_distance_to_9.4e4": rel,
            "exponent_1e5_passes": report["exponent_checks"][10**5]["passes"],
            "exponent_1e4_passes": report["exponent_checks"][10**4]["passes"],
            "log_geometric_sum": report["log_geometric_sum"],
            "failures": failures,
        },
    )


# --------------------------------- 10: truncated-exponential facts


def _c10_one_order(ell):
    positive = domination = 0
    failures = []
    for i in range(-100, 101):
        x = Fraction(i, 2)
        if truncated_exp_exact(ell, x) > 0:
            positive += 1
        else:
            failures.append(f"order {ell}: not positive at x={i}/2")
        if i <= 0:
            if truncated_exp_dominates(ell, x):
                domination += 1
            else:
                failures.append(f"order {ell}: no domination proof at x={i}/2")
    return {"positive": positive, "domination": domination, "failures": failures}


def _c10_truncated_exponential(outdir, threads):
    orders = list(range(2, 21, 2))
    results = _pool_map(_c10_one_order, orders, threads)
    failures = []
    positive = domination = 0
    for res in results:
        failures.extend(res["failures"])
        positive += res["positive"]
        domination += res["domination"]
    return _record(
        10,
        "truncated-exp-certificates",
        not failures,
        {
            "orders": orders,
            "grid_points": 201,
            "positivity_checks": positive,
            "domination_certificates": domination,
            "failures": failures,
        },
    )


CRITERIA = [
    (1, "moment-identities", _c1_moment_identities),
    (2, "power-expansion-oracle", _c2_power_expansion),
    (3, "window-sum-bounds", _c3_window_sums),
    (4, "model-equivalence", _c4_model_equivalence),
    (5, "modular-forms-exactness", _c5_modular_forms),
    (6, "trace-formula-closure", _c6_trace_formula),
    (7, "watson-roundtrip", _c7_watson_roundtrip),
    (8, "margin-table", _c8_margin_table),
    (9, "chain-validator", _c9_chain_validator),
    (10, "truncated-exp-certificates", _c10_truncated_exponential),
]


def write_battery_report(records, path, extra=None):
    """Write the battery summary JSON, excluding runtimes for determinism."""
    stripped = []
    for rec in records:
        rec = dict(rec)
        rec.pop("runtime_seconds", None)
        stripped.append(rec)
    doc = {
        "suite": "primary",
        "passed": all(r["passed"] for r in stripped),
        "criteria": stripped,
    }
    if extra:
        doc.update(extra)
    write_json(path, doc)


def run_battery(outdir, threads=None):
    """Run criteria 1-10 into ``outdir`` and return their records.

    Each record carries ``runtime_seconds`` for console display; the JSON
    report written alongside the artifacts omits it (byte-stable output).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if threads is None:
        threads = os.cpu_count() or 1
    records = []
    for num, name, fn in CRITERIA:
        start = perf_counter()
        try:
            rec = fn(outdir, threads)
        except PrecisionError as exc:
            rec = _record(
                num,
                name,
                False,
                {"error_kind": "precision", "message": str(exc)},
            )
            rec["error_kind"] = "precision"
        rec["runtime_seconds"] = perf_counter() - start
        records.append(rec)
    write_battery_report(records, outdir / "acceptance_report.json")
    return records


def compare_artifact_trees(first, second):
    """Byte-compare every CSV/JSON artifact under two directories."""
    first, second = Path(first), Path(second)

    def gather(root):
        return sorted(
            str(p.relative_to(root))
            for pattern in ("*.csv", "*.json")
            for p in root.rglob(pattern)
        )

    names_a, names_b = gather(first), gather(second)
    only_a = sorted(set(names_a) - set(names_b))
    only_b = sorted(set(names_b) - set(names_a))
    mismatched = []
    for name in sorted(set(names_a) & set(names_b)):
        if (first / name).read_bytes() != (second / name).read_bytes():
            mismatched.append(name)
    return {
        "match": not (only_a or only_b or mismatched),
        "files_compared": len(set(names_a) & set(names_b)),
        "mismatched": mismatched,
        "only_in_first": only_a,
        "only_in_second": only_b,
    }
