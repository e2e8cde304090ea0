"""Built-in multiplicative functions.

Each constructor returns a :class:`CatalogEntry` bundling the prime-power
rule with whatever is known in closed form about it (series value, Euler
factors) and the raw periodic sequence ``a(n)`` behind ``a(n) / n^alpha``
families, used by the Abel-summation and brute-force multiplicativity code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Envelope, MultiplicativeSpec, TailCertificate
from .errors import DivergenceError, DomainError, MultiplicativityError, ValidationError
from .series import (
    PeriodicSequence,
    alternating_sign,
    closed_form_eta_series,
    closed_form_gk_series,
    gk_raw,
)

CHI_MOD_3 = (0, 1, -1)
CHI_MOD_4 = (0, 1, 0, -1)
BUILTIN_CHARACTERS = {3: CHI_MOD_3, 4: CHI_MOD_4}


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    parameters: dict
    spec: MultiplicativeSpec
    provenance: str
    series_sum: Optional[Callable[[], complex]] = field(default=None, repr=False)
    euler_factor: Optional[Callable[[int], complex]] = field(default=None, repr=False)
    raw_sequence: Optional[PeriodicSequence] = field(default=None, repr=False)

    @property
    def known_closed_forms(self) -> dict:
        return {"series_sum": self.series_sum is not None, "euler_factor": self.euler_factor is not None}

    @property
    def name(self) -> str:
        return self.spec.name


def _pow_neg(p: np.ndarray, k: np.ndarray, alpha: complex) -> np.ndarray:
    """``p^(-k alpha)`` as ``exp(-k alpha ln p)``, rounded once to complex128.

    The exponent is formed in extended precision: in double precision the
    phase ``k Im(alpha) ln p`` alone carries an error of ``eps * phase``,
    which over a few hundred Euler-factor terms adds up to ~1e-12.  Where
    ``np.longdouble`` is plain double this degrades gracefully to that.
    """
    x = np.asarray(k).astype(np.longdouble) * np.log(np.asarray(p).astype(np.longdouble))
    return np.exp(-np.clongdouble(alpha) * x).astype(np.complex128)


def _pow_scalar(base: float, expo: complex) -> complex:
    """``base^expo`` with the same extended-precision exponent."""
    return complex(np.exp(np.clongdouble(expo) * np.log(np.longdouble(base))))


def _fmt(alpha: complex) -> str:
    # shortest round-tripping form, so equal parameters give equal strings
    im = repr(alpha.imag)
    return f"{alpha.real!r}{im if im.startswith('-') else '+' + im}i"


def _cm_factor(spec: MultiplicativeSpec) -> Callable[[int], complex]:
    """Euler factor ``1 / (1 - f(p))`` of a completely multiplicative spec."""

    def factor(p: int) -> complex:
        fp = spec.value(p, 1)
        if abs(fp) >= 1:
            raise DivergenceError(f"|f({p})| = {abs(fp):.6g} >= 1: geometric Euler factor diverges")
        return 1 / (1 - fp)

    return factor


def _require_positive_real_part(alpha: complex) -> complex:
    alpha = complex(alpha)
    if not alpha.real > 0:
        raise DomainError(f"Re(alpha) must be > 0, got {alpha}")
    return alpha


def mobius_over_n() -> CatalogEntry:
    spec = MultiplicativeSpec(
        "mu(n)/n",
        lambda p, k: np.where(k == 1, -1.0 / p, 0.0).astype(np.complex128),
        finite_depth=1,
        envelope=Envelope(1.0),
        prime_signature="-1/p",
    )
    return CatalogEntry(
        "mobius-over-n",
        {},
        spec,
        "mu(n)/n: the basic MO example",
        series_sum=lambda: 0j,
        euler_factor=lambda p: complex(1 - 1 / p),
    )


def mobius_raw() -> CatalogEntry:
    """The Moebius function itself; its partial sums are the Mertens function."""
    spec = MultiplicativeSpec(
        "mu(n)",
        lambda p, k: np.where(k == 1, -1.0, 0.0).astype(np.complex128),
        finite_depth=1,
        envelope=Envelope(0.0),
        prime_signature="-1",
    )
    return CatalogEntry("mobius-raw", {}, spec, "mu(n); M(x) = sum mu(n)", euler_factor=lambda p: 0j)


def liouville_over_n() -> CatalogEntry:
    spec = MultiplicativeSpec(
        "lambda(n)/n",
        lambda p, k: (np.where(k % 2 == 0, 1.0, -1.0) * np.power(p.astype(np.float64), -k.astype(np.float64))).astype(
            np.complex128
        ),
        completely_multiplicative=True,
        tail=lambda p: TailCertificate(1.0 / p),
        envelope=Envelope(1.0),
        prime_signature="-1/p",
    )
    return CatalogEntry(
        "liouville-over-n", {}, spec, "lambda(n)/n: a CMO example", series_sum=lambda: 0j, euler_factor=_cm_factor(spec)
    )


def power_over_n(alpha: complex) -> CatalogEntry:
    """``n^-alpha``; not MO, kept as an absolutely convergent comparison."""
    alpha = _require_positive_real_part(alpha)
    sigma = alpha.real
    spec = MultiplicativeSpec(
        f"n^-({_fmt(alpha)})",
        lambda p, k: _pow_neg(p, k, alpha),
        completely_multiplicative=True,
        tail=lambda p: TailCertificate(p**-sigma),
        envelope=Envelope(sigma),
        prime_signature=f"pow:{_fmt(alpha)}",
    )
    series = None
    if sigma > 1:
        from .zeta import zeta

        series = lambda: zeta(alpha)  # noqa: E731
    return CatalogEntry(
        "power", {"alpha": alpha}, spec, "n^-alpha (zeta series)", series_sum=series, euler_factor=_cm_factor(spec)
    )


def eta_family(alpha: complex) -> CatalogEntry:
    """``(-1)^(n-1) / n^alpha``: ``f(2^k) = -2^(-k alpha)``, ``f(p^k) = p^(-k alpha)`` for odd p."""
    alpha = _require_positive_real_part(alpha)
    sigma = alpha.real

    def rule(p, k):
        v = _pow_neg(p, k, alpha)
        return np.where(p == 2, -v, v)

    def euler(p: int) -> complex:
        if p == 2:
            two_a = _pow_scalar(2, alpha)
            return (two_a - 2) / (two_a - 1)
        return 1 / (1 - _pow_scalar(p, -alpha))

    spec = MultiplicativeSpec(
        f"(-1)^(n-1)/n^({_fmt(alpha)})",
        rule,
        tail=lambda p: TailCertificate(p**-sigma),
        envelope=Envelope(sigma),
        prime_signature=f"eta:{_fmt(alpha)}",
    )
    return CatalogEntry(
        "eta",
        {"alpha": alpha},
        spec,
        "(-1)^(n-1)/n^alpha: MO exactly when zeta(alpha) = 0",
        series_sum=lambda: closed_form_eta_series(alpha),
        euler_factor=euler,
        raw_sequence=alternating_sign(),
    )


def prime_power_decomposition(k: int):
    """``(p0, r)`` with ``k = p0^r``, or None when k is not a prime power."""
    if k < 2:
        return None
    p0 = next((d for d in range(2, math.isqrt(k) + 1) if k % d == 0), k)
    r, m = 0, k
    while m % p0 == 0:
        m //= p0
        r += 1
    return (p0, r) if m == 1 else None


def g_family(k: int, alpha: complex) -> CatalogEntry:
    """``g_k(n) / n^alpha`` with ``g_k(n) = 1 - k`` on multiples of k, else 1.

    Only prime powers ``k = p0^r`` give a multiplicative function.
    ``alpha = 0`` is accepted to expose the bare ``g_k`` (no tail certificate,
    no convergent Euler factors); otherwise ``Re(alpha) > 0`` is required.
    """
    k = int(k)
    dec = prime_power_decomposition(k)
    if dec is None:
        raise MultiplicativityError(f"g_{k} is multiplicative only when k is a prime power; {k} is not")
    p0, r = dec
    alpha = complex(alpha)
    bare = alpha == 0
    if not bare:
        _require_positive_real_part(alpha)
    sigma = alpha.real

    def rule(p, m):
        v = _pow_neg(p, m, alpha)
        return np.where((p == p0) & (m >= r), (1 - k) * v, v)

    def euler(p: int) -> complex:
        if bare:
            raise DivergenceError("Euler factors of g_k / n^0 diverge")
        if p == p0:
            k_a = _pow_scalar(k, alpha)
            return (k_a - k) / (k_a * (1 - _pow_scalar(p, -alpha)))
        return 1 / (1 - _pow_scalar(p, -alpha))

    def tail(p: int) -> TailCertificate:
        return TailCertificate(p**-sigma, r if p == p0 else 1)

    spec = MultiplicativeSpec(
        f"g_{k}(n)/n^({_fmt(alpha)})",
        rule,
        tail=None if bare else tail,
        envelope=None if bare else Envelope(sigma, float(max(1, k - 1))),
        prime_signature=f"gk:{k}:{_fmt(alpha)}",
    )

    def series():
        if bare:
            raise DomainError("sum of g_k(n) diverges")
        return closed_form_gk_series(k, alpha)

    return CatalogEntry(
        "gk",
        {"k": k, "alpha": alpha},
        spec,
        "g_k(n)/n^alpha: MO exactly when k is a prime power and zeta(alpha) = 0",
        series_sum=series,
        euler_factor=euler,
        raw_sequence=gk_raw(k),
    )


def validate_character_table(modulus: int, table) -> np.ndarray:
    """Check that ``table`` is a non-principal Dirichlet character mod ``modulus``.

    Raises :class:`ValidationError` naming the first property that fails.
    """
    chi = np.asarray(table, dtype=np.complex128)
    if modulus < 2 or chi.shape != (modulus,):
        raise ValidationError(f"period: table must have exactly {modulus} entries")
    for n in range(modulus):
        coprime = math.gcd(n, modulus) == 1
        if coprime and abs(chi[n]) < 1e-12:
            raise ValidationError(f"support: chi({n}) = 0 although gcd({n}, {modulus}) = 1")
        if not coprime and abs(chi[n]) > 1e-12:
            raise ValidationError(f"support: chi({n}) != 0 although gcd({n}, {modulus}) > 1")
    if abs(chi[1 % modulus] - 1) > 1e-12:
        raise ValidationError("normalisation: chi(1) must be 1")
    for m in range(modulus):
        for n in range(modulus):
            if abs(chi[(m * n) % modulus] - chi[m] * chi[n]) > 1e-12:
                raise ValidationError(f"complete multiplicativity: chi({m}*{n}) != chi({m}) chi({n}) mod {modulus}")
    if abs(chi.sum()) > 1e-9:
        raise ValidationError("non-principal: values over a period must sum to 0")
    return chi


def character_over_n_alpha(modulus: int, character_table=None, alpha: complex = 1.0) -> CatalogEntry:
    """``chi(n) / n^alpha`` for a non-principal character mod ``modulus``.

    Without an explicit table the built-in characters mod 3 and mod 4 are used.
    """
    if character_table is None:
        if modulus not in BUILTIN_CHARACTERS:
            raise ValidationError(f"no built-in character mod {modulus}; supply a table")
        character_table = BUILTIN_CHARACTERS[modulus]
    chi = validate_character_table(modulus, character_table)
    alpha = _require_positive_real_part(alpha)
    sigma = alpha.real
    spec = MultiplicativeSpec(
        f"chi_{modulus}(n)/n^({_fmt(alpha)})",
        lambda p, k: chi[p % modulus] ** k * _pow_neg(p, k, alpha),
        completely_multiplicative=True,
        tail=lambda p: TailCertificate(p**-sigma),
        envelope=Envelope(sigma),
        prime_signature=f"chi:{modulus}:{','.join(map(str, chi))}:{_fmt(alpha)}",
    )
    real = np.all(chi.imag == 0)
    raw = PeriodicSequence(
        f"chi_{modulus}", np.roll(chi.real.astype(np.int64) if real else chi, -1)
    )  # PeriodicSequence is 1-based: a(1..q) = chi(1), ..., chi(q) = chi(0)
    return CatalogEntry(
        "character",
        {"modulus": modulus, "table": tuple(complex(c) for c in chi), "alpha": alpha},
        spec,
        "chi(n)/n^alpha: a CMO example when L(alpha, chi) = 0",
        euler_factor=_cm_factor(spec),
        raw_sequence=raw,
    )


def from_prime_power_table(name: str, table: dict) -> MultiplicativeSpec:
    """Finitely supported spec: ``f(p^k) = table[(p, k)]``, zero elsewhere."""
    items = {(int(p), int(k)): complex(v) for (p, k), v in table.items()}
    if any(k < 1 for _, k in items):
        raise ValueError("exponents must be >= 1")
    keys = np.array(sorted(items), dtype=np.int64).reshape(-1, 2)
    vals = np.array([items[tuple(key)] for key in keys.tolist()], dtype=np.complex128)

    def rule(p, k):
        out = np.zeros(np.broadcast(p, k).shape, dtype=np.complex128)
        pb, kb = np.broadcast_arrays(p, k)
        for (kp, kk), v in zip(keys.tolist(), vals):
            out[(pb == kp) & (kb == kk)] = v
        return out

    depth = max((k for _, k in items), default=0)
    return MultiplicativeSpec(name, rule, finite_depth=depth)


CATALOG_IDS = ("mobius-over-n", "mobius-raw", "liouville-over-n", "eta", "gk", "character", "power")


def make_entry(
    function_id: str,
    alpha: Optional[complex] = None,
    k: Optional[int] = None,
    modulus: Optional[int] = None,
    table=None,
) -> CatalogEntry:
    """Look up a catalog family by its CLI id."""
    if function_id == "mobius-over-n":
        return mobius_over_n()
    if function_id == "mobius-raw":
        return mobius_raw()
    if function_id == "liouville-over-n":
        return liouville_over_n()
    if function_id == "eta":
        return eta_family(_need(alpha, "alpha", function_id))
    if function_id == "gk":
        return g_family(_need(k, "k", function_id), _need(alpha, "alpha", function_id))
    if function_id == "character":
        return character_over_n_alpha(_need(modulus, "modulus", function_id), table, _need(alpha, "alpha", function_id))
    if function_id == "power":
        return power_over_n(_need(alpha, "alpha", function_id))
    raise KeyError(f"unknown function id {function_id!r}; known: {', '.join(CATALOG_IDS)}")


def _need(value, what, fid):
    if value is None:
        raise ValueError(f"{fid} needs parameter {what}")
    return value
