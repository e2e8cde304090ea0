"""Dirichlet eta and Riemann zeta for Re(s) > 0, and critical-line zeros.

``eta`` uses Borwein's Chebyshev-weighted acceleration of the alternating
series.  With ``n`` terms the error is about
``(3 + sqrt 8)^-n * exp(pi |t| / 2)``, which gives the term-count rule

    n = max(32, ceil(1.31 * digits + 0.9 * |Im s|)),   digits = -log10(target)

(1.31 ~ 1 / log10(3 + sqrt 8), 0.9 ~ pi / (2 ln(3 + sqrt 8))).  The rule is
a heuristic; the test-suite checks it against brute-force summation and
mpmath.  It is valid for ``|Im s| <= 100``.

Below that truncation error sits a rounding floor: each ``k^-s`` carries a
phase error of about ``eps * |t| * ln k``, so the reachable accuracy is
roughly ``4 eps (1 + |t| ln n)`` (about 1e-13 at ``|t| = 100``).  Asking for
less than the floor raises :class:`PrecisionError`; the default target is the
larger of 1e-14 and the floor.

``zeta`` is ``eta(s) / (1 - 2^(1-s))``.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import loggamma

from .errors import (
    ConditioningError,
    DomainError,
    NotFoundError,
    ParseError,
    PoleError,
    PrecisionError,
    ValidationError,
)

MIN_ACCURACY = 1e-14
EPS = float(np.finfo(float).eps)
MAX_TERMS = 4000
LN2 = math.log(2.0)
SINGULAR_RADIUS = 1e-6
ZERO_DEPTH_SCALE = 2.0

ZERO_TABLE_ENV = "MOLAB_ZERO_TABLE"


def term_count(target_accuracy: float, t: float) -> int:
    digits = -math.log10(target_accuracy)
    return max(32, math.ceil(1.31 * digits + 0.9 * abs(t)))


@lru_cache(maxsize=64)
def _borwein_weights(n: int) -> np.ndarray:
    """Signed weights ``(-1)^k (d_n - d_k) / d_n`` for k = 0..n-1."""
    i = np.arange(n + 1)
    log_u = np.array(
        [math.lgamma(n + j) + j * math.log(4.0) - math.lgamma(n - j + 1) - math.lgamma(2 * j + 1) for j in i]
    )
    u = np.exp(log_u - log_u.max())
    # (d_n - d_k) = sum_{j > k} u_j, summed from the small end
    tail = np.cumsum(u[::-1])[::-1]
    w = tail[1:] / tail[0]
    w[1::2] *= -1.0
    w.setflags(write=False)
    return w


def rounding_floor(t: float, n: int) -> float:
    return 4 * EPS * (1 + abs(t) * math.log(n))


def eta(s: complex, target_accuracy: Optional[float] = None, terms: Optional[int] = None) -> complex:
    """Dirichlet eta ``sum (-1)^(n-1) n^-s`` for ``Re s > 0``.

    ``terms`` overrides the term-count rule (used to probe stability) and
    skips the accuracy check.
    """
    s = complex(s)
    if s.real <= 0:
        raise DomainError("eta is evaluated only for Re(s) > 0")
    if terms is not None:
        n = terms
    elif target_accuracy is None:
        n = term_count(MIN_ACCURACY, s.imag)
    else:
        if not target_accuracy >= MIN_ACCURACY:
            raise PrecisionError(f"target accuracy {target_accuracy} is below {MIN_ACCURACY}")
        n = term_count(target_accuracy, s.imag)
        floor = rounding_floor(s.imag, n)
        if target_accuracy < floor:
            raise PrecisionError(f"target {target_accuracy:.1e} below rounding floor {floor:.1e} at Im s = {s.imag}")
    if n > MAX_TERMS:
        raise PrecisionError(f"{n} acceleration terms needed; |Im s| too large")
    w = _borwein_weights(n)
    k = np.arange(1, n + 1, dtype=np.float64)
    terms_ = w * np.exp(-s * np.log(k))
    return complex(math.fsum(terms_.real), math.fsum(terms_.imag))


def _nearest_singularity(s: complex):
    m = round(s.imag * LN2 / (2 * math.pi))
    centre = complex(1.0, 2 * math.pi * m / LN2)
    return m, abs(s - centre)


def zeta(s: complex, target_accuracy: Optional[float] = None, terms: Optional[int] = None) -> complex:
    """Riemann zeta for ``Re s > 0`` through ``eta(s) / (1 - 2^(1-s))``.

    Refuses ``s = 1`` (pole) and the removable singularities
    ``1 + 2 pi i m / ln 2`` (``m != 0``) within radius 1e-6.
    """
    s = complex(s)
    if s.real <= 0:
        raise DomainError("zeta is evaluated only for Re(s) > 0")
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    m, dist = _nearest_singularity(s)
    if m != 0 and dist < SINGULAR_RADIUS:
        raise ConditioningError(f"s is within {dist:.2e} of 1 + 2*pi*i*{m}/ln 2 where 1 - 2^(1-s) = 0")
    denom = -np.expm1((1 - s) * LN2)
    return complex(eta(s, target_accuracy, terms) / denom)


def riemann_siegel_theta(t: float) -> float:
    return float(np.imag(loggamma(0.25 + 0.5j * t)) - 0.5 * t * math.log(math.pi))


def hardy_z(t: float, depth_scale: float = 1.0) -> float:
    """Real-valued ``e^(i theta(t)) zeta(1/2 + i t)``."""
    s = complex(0.5, t)
    n = max(32, math.ceil(depth_scale * term_count(MIN_ACCURACY, t)))
    z = zeta(s, terms=n)
    return (np.exp(1j * riemann_siegel_theta(t)) * z).real


@dataclass(frozen=True)
class ZetaZero:
    index: int
    rho: complex
    residual: Optional[float]  # |eta(rho)|; None when loaded without verification

    @property
    def imag(self) -> float:
        return self.rho.imag


def _sign_changes(ts: np.ndarray, zs: np.ndarray) -> list:
    out = []
    for a, b, za, zb in zip(ts[:-1], ts[1:], zs[:-1], zs[1:]):
        if za == 0:
            out.append((a, a))
        elif za * zb < 0:
            out.append((a, b))
    if zs[-1] == 0:
        out.append((ts[-1], ts[-1]))
    return out


def _count_zeros_below(t: float, step: float = 0.05) -> int:
    """Number of sign changes of Z on (0, t); reliable for t <= 100."""
    ts = np.arange(1.0, t, step)
    if ts.size < 2:
        return 0
    zs = np.array([hardy_z(x) for x in ts])
    return len(_sign_changes(ts, zs))


def find_zero(
    t_guess: float,
    tol: float = 1e-10,
    bracket: Optional[tuple] = None,
    depth_scale: float = ZERO_DEPTH_SCALE,
    step: float = 0.05,
    index: Optional[int] = None,
) -> ZetaZero:
    """Locate a zero ``1/2 + i t`` of zeta near ``t_guess``.

    Scans Hardy's Z function on ``bracket`` (default ``t_guess +- 1``) for a
    sign change, takes the one nearest ``t_guess`` and refines it with
    Brent's method.  ``depth_scale`` multiplies the acceleration term count;
    the default of 2 leaves headroom so that halving the depth (back to the
    plain term-count rule) moves the zero by far less than ``tol``.
    """
    if not 1.0 <= t_guess <= 100.0:
        raise DomainError("t_guess must lie in [1, 100]")
    if not tol >= 1e-12:
        raise PrecisionError("tol must be >= 1e-12")
    lo, hi = bracket if bracket is not None else (max(0.5, t_guess - 1.0), t_guess + 1.0)
    if not lo < hi:
        raise DomainError("empty bracket")
    ts = np.linspace(lo, hi, max(3, int(math.ceil((hi - lo) / step)) + 1))
    zfun = lambda t: hardy_z(t, depth_scale)  # noqa: E731
    zs = np.array([zfun(t) for t in ts])
    changes = _sign_changes(ts, zs)
    if not changes:
        raise NotFoundError(f"no sign change of Z(t) in [{lo}, {hi}]")
    a, b = min(changes, key=lambda ab: abs(0.5 * (ab[0] + ab[1]) - t_guess))
    t0 = a if a == b else brentq(zfun, a, b, xtol=1e-14, rtol=4 * EPS, maxiter=200)
    rho = complex(0.5, t0)
    n = max(32, math.ceil(depth_scale * term_count(MIN_ACCURACY, t0)))
    residual = abs(eta(rho, terms=n))
    if residual > tol:
        raise NotFoundError(f"refinement stalled: |eta(rho)| = {residual:.3e} > {tol:.1e}")
    if index is None:
        index = _count_zeros_below(a) + 1
    return ZetaZero(index, rho, residual)


def default_zero_table_path() -> Path:
    env = os.environ.get(ZERO_TABLE_ENV)
    if env:
        return Path(env)
    return Path(__file__).with_name("data") / "zeros.csv"


def load_zero_table(path=None, verify: bool = False, verify_tol: float = 1e-8) -> list:
    """Read a ``index,imag`` CSV of critical-line zeros.

    Indices must run 1, 2, 3, ... and imaginary parts must increase strictly.
    With ``verify`` each zero is re-checked through ``|eta(1/2 + i t)|``.
    """
    path = Path(path) if path is not None else default_zero_table_path()
    zeros = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("missing header", 1)
        if [h.strip() for h in header] != ["index", "imag"]:
            raise ParseError(f"expected header 'index,imag', got {','.join(header)!r}", 1)
        prev = -math.inf
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", lineno)
            try:
                idx = int(row[0])
                t = float(row[1])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if idx != len(zeros) + 1:
                raise ValidationError(f"row {lineno}: index {idx}, expected {len(zeros) + 1}")
            if not (math.isfinite(t) and t > 0):
                raise ValidationError(f"row {lineno}: imaginary part must be finite and positive")
            if t <= prev:
                raise ValidationError(f"row {lineno}: imag {t} not greater than previous {prev}")
            prev = t
            zeros.append((lineno, ZetaZero(idx, complex(0.5, t), None)))
    if not verify:
        return [z for _, z in zeros]
    # structure first, then the comparatively expensive residual check
    checked = []
    for lineno, z in zeros:
        residual = abs(eta(z.rho))
        if residual > verify_tol:
            raise ValidationError(f"row {lineno}: |eta(1/2 + {z.imag}i)| = {residual:.3e} > {verify_tol:.1e}")
        checked.append(ZetaZero(z.index, z.rho, residual))
    return checked
