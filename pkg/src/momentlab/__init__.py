"""Desk-scale laboratory for fourth-moment bounds of holomorphic cusp forms.

Submodules:
  hecke           exact eigenvalue-power expansions and family moment functions
  satotate        Sato-Tate sampling, exact model moments, synthetic families
  oracles         brute-force evaluators for the prime-tuple moment inequalities
  forms.qexp      exact integer q-expansions, Eisenstein series, Miller bases
  forms.eigen     Hecke eigenforms from the integer T_2 action
  forms.petersson inner products by quadrature, trace formula, Watson inversion
  pipeline        beta-partition, Dirichlet polynomials, classification, validators
  primes          sieve, deterministic primality, integer factorization
  report_io       deterministic CSV/JSON emission and flat config parsing
  acceptance      the acceptance battery behind `momentlab accept`
  cli             command-line entry point
"""

__version__ = "0.1.0"
