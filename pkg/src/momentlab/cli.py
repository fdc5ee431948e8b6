"""Command-line driver.

One executable, one subcommand per module: exact Hecke combinatorics
(``hecke``, ``moments``), inequality oracles (``oracle``), the
independent-model sampler (``simulate``), the modular-forms laboratory
(``mf``), the window/threshold/chain pipeline (``pipeline``), and the
full acceptance battery (``accept``).

Conventions shared by every subcommand:

* tables go to standard output as CSV with a header row; structured
  reports are emitted as JSON, one document per write;
* every float is printed with 17 significant digits, so identical
  arguments and configs reproduce byte-identical output;
* config files are flat ``key = value`` text (``#`` comments allowed);
* the default output directory for commands that write files is
  ``$MOMENTLAB_OUTDIR``, falling back to the working directory;
* exit codes: 0 success, 1 usage or config error, 2 acceptance/oracle
  failure, 3 numeric-precision failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from .acceptance import compare_artifact_trees, run_battery, write_battery_report
from .forms import (
    PrecisionError,
    dim_cusp_forms,
    fourth_moment,
    hecke_eigenforms,
    miller_basis,
    petersson_inner,
    triple_overlap,
    watson_L_value,
)
from .hecke import (
    PrimeFactorization,
    catalan,
    expand_lambda_power,
    lambda_moment,
    lambda_square_moment,
    single_prime_square_moment,
)
from .oracles import verify_lemma_instance
from .pipeline import (
    chain_validator,
    classify_family,
    coefficient_system,
    markov_moment_bound,
    markov_regime_certificate,
    partition_params,
    log_l_margin_rows,
)
from .primes import primes_in
from .report_io import ConfigError, fmt_value, json_text, read_config
from .satotate import load_family, sample_family

__all__ = ["main"]


# ------------------------------------------------------------- plumbing


def _stdout_csv(fieldnames, rows):
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([fmt_value(row[name]) for name in fieldnames])


def _outdir(args):
    root = getattr(args, "outdir", None) or os.environ.get("MOMENTLAB_OUTDIR") or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _require(cfg, key, path):
    if key not in cfg:
        raise ConfigError(f"{path}: missing required key {key!r}")
    return cfg[key]


def _cfg_int(cfg, key, path, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"{path}: missing required key {key!r}")
        return default
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{path}: key {key!r} is not an integer") from exc


def _cfg_float(cfg, key, path, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"{path}: missing required key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{path}: key {key!r} is not a number") from exc


def _cfg_fraction(text, key, path):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{path}: key {key!r} is not a rational") from exc


def _cfg_int_list(cfg, key, path):
    raw = _require(cfg, key, path)
    try:
        return [int(part.strip()) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"{path}: key {key!r} is not a comma list of integers") from exc


def _weight_table(cfg, key, primes, path):
    """Per-prime rational weights: constant under ``key``, overridable
    per prime with ``key.<p>`` entries."""
    base = (
        _cfg_fraction(cfg[key], key, path) if key in cfg else Fraction(1)
    )
    table = {p: base for p in primes}
    prefix = key + "."
    for ck, cv in cfg.items():
        if ck.startswith(prefix):
            try:
                p = int(ck[len(prefix):])
            except ValueError as exc:
                raise ConfigError(f"{path}: malformed weight key {ck!r}") from exc
            if p not in table:
                raise ConfigError(
                    f"{path}: weight key {ck!r} names a prime outside the window"
                )
            table[p] = _cfg_fraction(cv, ck, path)
    return table


# ------------------------------------------------------------ subcommands


def _cmd_hecke(args):
    expansion = expand_lambda_power(args.alpha)
    coeffs = expansion.coefficients()
    _stdout_csv(
        ["m", "coefficient"],
        [{"m": m, "coefficient": coeffs[m]} for m in sorted(coeffs)],
    )
    return 0


def _cmd_moments(args):
    n = PrimeFactorization.parse(args.n)
    value = lambda_moment(n) if args.which == "h1" else lambda_square_moment(n)
    print(value)
    return 0


def _oracle_config(lemma, cfg, path):
    if lemma == "combinato":
        lo = _cfg_int(cfg, "window_lo", path)
        hi = _cfg_int(cfg, "window_hi", path)
        window_primes = primes_in(lo, hi)
        config = {
            "window": (lo, hi),
            "u": _weight_table(cfg, "u", window_primes, path),
            "n": _cfg_int(cfg, "n", path),
        }
    elif lemma == "combinato2":
        m = _cfg_int(cfg, "m", path)
        window_primes = primes_in(2**m, 2 ** (m + 1))
        config = {
            "m": m,
            "w": _weight_table(cfg, "w", window_primes, path),
            "M": _cfg_int(cfg, "M", path),
        }
        if "C" in cfg:
            config["C"] = _cfg_fraction(cfg["C"], "C", path)
    else:  # gaussian
        count = _cfg_int(cfg, "windows", path)
        windows = []
        for i in range(1, count + 1):
            lo = _cfg_int(cfg, f"window{i}_lo", path)
            hi = _cfg_int(cfg, f"window{i}_hi", path)
            window_primes = primes_in(lo, hi)
            windows.append(
                (
                    (lo, hi),
                    _weight_table(cfg, f"u{i}", window_primes, path),
                    _cfg_int(cfg, f"n{i}", path),
                )
            )
        config = {"windows": windows}
        if "squared_m" in cfg:
            m = _cfg_int(cfg, "squared_m", path)
            window_primes = primes_in(2**m, 2 ** (m + 1))
            squared = {
                "m": m,
                "w": _weight_table(cfg, "squared_w", window_primes, path),
                "M": _cfg_int(cfg, "squared_M", path),
            }
            if "squared_C" in cfg:
                squared["C"] = _cfg_fraction(cfg["squared_C"], "squared_C", path)
            config["squared"] = squared
    if "strategy" in cfg:
        config["strategy"] = cfg["strategy"]
    return config


def _cmd_oracle(args):
    cfg = read_config(args.config)
    config = _oracle_config(args.lemma, cfg, args.config)
    record = verify_lemma_instance(args.lemma, config)
    sys.stdout.write(json_text(record))
    return 0 if record["pass"] else 2


def _cmd_simulate(args):
    sample = sample_family(args.x, args.forms, args.seed)
    outdir = _outdir(args)
    name = f"family_x{args.x}_n{args.forms}_s{args.seed}.csv"
    sample.write(outdir / name)
    print(f"wrote {name} (+ .meta.json) to {outdir}", file=sys.stderr)
    if args.report == "heuristics":
        values = sample.values
        n_total = values.size
        rows = []
        for order in (2, 4, 6, 8):
            pooled = values**order
            exact = catalan(order // 2)
            rows.append(
                {
                    "statistic": f"lambda^{order}",
                    "empirical": float(pooled.mean()),
                    "exact": float(exact),
                    "standard_error": float(pooled.std(ddof=1))
                    / math.sqrt(n_total),
                }
            )
        squares = values * values - 1.0
        for order in (1, 2, 3):
            pooled = squares**order
            exact = single_prime_square_moment(order)
            rows.append(
                {
                    "statistic": f"(lambda^2-1)^{order}",
                    "empirical": float(pooled.mean()),
                    "exact": float(exact),
                    "standard_error": float(pooled.std(ddof=1))
                    / math.sqrt(n_total),
                }
            )
        sys.stdout.write(
            json_text(
                {
                    "x": args.x,
                    "n_forms": args.forms,
                    "seed": args.seed,
                    "pooled_moments": rows,
                }
            )
        )
    return 0


def _mf_rows_basis(args):
    n_terms = args.ncoeffs if args.ncoeffs else dim_cusp_forms(args.weight) + 20
    basis = miller_basis(args.weight, n_terms)
    rows = [
        {"basis_index": i, "n": n, "coefficient": form.coefficient(n)}
        for i, form in enumerate(basis)
        for n in range(form.n_terms + 1)
    ]
    return ["basis_index", "n", "coefficient"], rows


def _mf_rows_eigen(args):
    forms = hecke_eigenforms(args.weight, n_terms=args.ncoeffs)
    rows = [
        {
            "form_index": i,
            "n": n,
            "coefficient": form.coeffs[n],
            "eigenvalue": form.lam(n),
        }
        for i, form in enumerate(forms)
        for n in range(1, form.n_terms + 1)
    ]
    return ["form_index", "n", "coefficient", "eigenvalue"], rows


def _mf_rows_petersson(args):
    forms = hecke_eigenforms(args.weight, n_terms=args.ncoeffs)
    rows = []
    for i, f in enumerate(forms):
        for j, g in enumerate(forms):
            if j < i:
                continue
            result = petersson_inner(
                f, g, tolerance=args.tol, max_depth=args.quad_depth
            )
            rows.append(
                {
                    "row": i,
                    "col": j,
                    "value": result.value,
                    "est_error": result.est_error,
                }
            )
    return ["row", "col", "value", "est_error"], rows


def _mf_rows_fourth_moment(args):
    forms = hecke_eigenforms(args.weight, n_terms=args.ncoeffs)
    rows = [
        {"form_index": i, "fourth_moment": fourth_moment(f, args.tol)}
        for i, f in enumerate(forms)
        if f.is_rational
    ]
    if not rows:
        raise ValueError(f"no rational eigenform at weight {args.weight}")
    return ["form_index", "fourth_moment"], rows


def _mf_rows_watson(args):
    forms = [f for f in hecke_eigenforms(args.weight, n_terms=args.ncoeffs) if f.is_rational]
    if not forms:
        raise ValueError(f"no rational eigenform at weight {args.weight}")
    f = forms[0]
    partners = hecke_eigenforms(2 * args.weight)
    rows = [
        {
            "g_index": j,
            "overlap": triple_overlap(f, g, args.tol),
            "central_value": watson_L_value(f, g, args.tol),
        }
        for j, g in enumerate(partners)
    ]
    return ["g_index", "overlap", "central_value"], rows


_MF_TABLES = {
    "basis": _mf_rows_basis,
    "eigen": _mf_rows_eigen,
    "petersson": _mf_rows_petersson,
    "fourth-moment": _mf_rows_fourth_moment,
    "watson": _mf_rows_watson,
}


def _cmd_mf(args):
    fieldnames, rows = _MF_TABLES[args.what](args)
    _stdout_csv(fieldnames, rows)
    return 0


def _pipeline_family(cfg, path, p_limit):
    if "family_csv" in cfg:
        return load_family(cfg["family_csv"])
    if "forms" in cfg:
        x = _cfg_int(cfg, "x", path, default=p_limit)
        return sample_family(x, _cfg_int(cfg, "forms", path), _cfg_int(cfg, "seed", path))
    if "g_lambda" in cfg:
        return _cfg_float(cfg, "g_lambda", path)
    raise ConfigError(
        f"{path}: need one of family_csv, forms (+seed), or g_lambda"
    )


def _cmd_pipeline(args):
    cfg = read_config(args.config)
    path = args.config
    if args.what == "classify":
        params = partition_params(
            _cfg_float(cfg, "log_k", path),
            _cfg_float(cfg, "threshold_exponent", path, default=2.0),
        )
        p_limit = (
            _cfg_int(cfg, "p_limit", path) if "p_limit" in cfg else None
        )
        coeffs = coefficient_system(
            params, _cfg_float(cfg, "f_lambda", path, default=2.0), p_limit
        )
        family = _pipeline_family(cfg, path, coeffs.p_limit)
        report = classify_family(
            family,
            params,
            coeffs,
            _cfg_float(cfg, "threshold_scale", path, default=1.0),
        )
        sys.stdout.write(json_text(report.to_json_dict()))
    elif args.what == "sound":
        k = _cfg_int(cfg, "k", path)
        x_values = _cfg_int_list(cfg, "x", path)
        f_index = _cfg_int(cfg, "f_index", path, default=0)
        forms = [f for f in hecke_eigenforms(k) if f.is_rational]
        if f_index >= len(forms):
            raise ConfigError(f"{path}: f_index {f_index} out of range")
        rows = log_l_margin_rows(
            forms[f_index], hecke_eigenforms(2 * k), x_values, k
        )
        _stdout_csv(["g_index", "x", "bound", "log_l_value", "margin"], rows)
    elif args.what == "chain":
        params = partition_params(
            _cfg_float(cfg, "log_k", path),
            _cfg_float(cfg, "threshold_exponent", path, default=2.0),
        )
        exponents = (
            tuple(_cfg_int_list(cfg, "exponents", path))
            if "exponents" in cfg
            else (10**4, 10**5)
        )
        kwargs = {"check_exponents": exponents}
        if "C" in cfg:
            kwargs["C_const"] = _cfg_float(cfg, "C", path)
        sys.stdout.write(json_text(chain_validator(params, **kwargs)))
    else:  # markov
        v = _cfg_float(cfg, "V", path)
        log_k = _cfg_float(cfg, "log_k", path)
        sys.stdout.write(
            json_text(
                {
                    "V": v,
                    "log_k": log_k,
                    "log_bound": markov_moment_bound(v, log_k),
                    "certificate": markov_regime_certificate(),
                }
            )
        )
    return 0


def _cmd_accept(args):
    outdir = _outdir(args)
    first, second = outdir / "run1", outdir / "run2"
    records = run_battery(first, threads=args.threads)
    for rec in records:
        status = "PASS" if rec["passed"] else "FAIL"
        print(
            f"criterion {rec['criterion']:02d} {rec['name']:<28s} "
            f"{status} ({rec['runtime_seconds']:.2f} s)"
        )
    run_battery(second, threads=args.threads)
    comparison = compare_artifact_trees(first, second)
    determinism = {
        "criterion": 11,
        "name": "determinism",
        "passed": comparison["match"],
        "details": comparison,
    }
    status = "PASS" if determinism["passed"] else "FAIL"
    print(f"criterion 11 {'determinism':<28s} {status} (two full runs compared)")
    records.append(determinism)
    write_battery_report(records, outdir / "acceptance_report.json")
    n_pass = sum(1 for r in records if r["passed"])
    print(f"acceptance: {n_pass}/{len(records)} criteria passed")
    if any(r.get("error_kind") == "precision" for r in records):
        return 3
    return 0 if n_pass == len(records) else 2


# ------------------------------------------------------------ arg parsing


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="momentlab",
        description="Desk-scale laboratory for fourth-moment bounds of cusp forms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hecke", help="exact Hecke-power expansions")
    hecke_sub = p.add_subparsers(dest="what", required=True)
    p_exp = hecke_sub.add_parser("expand", help="expand a power of lambda(p)")
    p_exp.add_argument("--alpha", type=int, required=True)
    p_exp.set_defaults(handler=_cmd_hecke)

    p = sub.add_parser("moments", help="exact family moments")
    p.add_argument("which", choices=["h1", "h2"])
    p.add_argument("--n", required=True, metavar="FACTORIZATION",
                   help="prime factorization, e.g. 2^4*3^2")
    p.set_defaults(handler=_cmd_moments)

    p = sub.add_parser("oracle", help="verify one inequality instance exactly")
    p.add_argument("--lemma", choices=["combinato", "combinato2", "gaussian"],
                   required=True)
    p.add_argument("--config", required=True)
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser("simulate", help="sample an independent-model family")
    p.add_argument("--x", type=int, required=True, help="prime limit")
    p.add_argument("--forms", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--report", choices=["heuristics"])
    p.add_argument("--outdir")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("mf", help="modular-forms tables")
    p.add_argument("what", choices=sorted(_MF_TABLES))
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--ncoeffs", type=int)
    p.add_argument("--quad-depth", type=int, default=4, dest="quad_depth")
    p.add_argument("--tol", type=float)
    p.set_defaults(handler=_cmd_mf)

    p = sub.add_parser("pipeline", help="window partitions and audits")
    p.add_argument("what", choices=["classify", "sound", "chain", "markov"])
    p.add_argument("--config", required=True)
    p.set_defaults(handler=_cmd_pipeline)

    p = sub.add_parser("accept", help="run the acceptance battery twice")
    p.add_argument("--suite", choices=["primary"], default="primary")
    p.add_argument("--threads", type=int)
    p.add_argument("--outdir")
    p.set_defaults(handler=_cmd_accept)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help; normalize to
        # the documented usage-error code.
        return 0 if exc.code == 0 else 1
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PrecisionError as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
