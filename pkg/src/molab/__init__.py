"""Numerical laboratory for multiplicative functions whose series sum to zero."""

from .catalog import (
    CatalogEntry,
    character_over_n_alpha,
    eta_family,
    g_family,
    liouville_over_n,
    make_entry,
    mobius_over_n,
    mobius_raw,
    power_over_n,
)
from .core import (
    Envelope,
    MultiplicativeSpec,
    SpfTable,
    TailCertificate,
    build_spf_sieve,
    eval_at,
    factorize,
    sieve_values,
)
from .mo import (
    check_condition_i,
    check_condition_ii,
    distance,
    euler_factor,
    euler_factor_closed,
    is_multiplicative_bruteforce,
    mo_check,
    omega_scan,
    perturb,
    transfer_experiment,
)
from .series import PartialSumSeries, abel_weighted_sum, partial_sums
from .zeta import eta, find_zero, hardy_z, load_zero_table

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
