"""Exact combinatorial identities behind the order-by-order construction,
plus numerical cross-checks between the multi-sum and trace representations.

The cubic and quadratic identities are polynomial in the 2n+1 symbols, so
exact equality at random Gaussian-rational points (repeated with fresh
draws) is a sound probabilistic certificate; all arithmetic here is done
with fractions.Fraction components, never floats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    Medium,
    SolitonSet,
    SpaceTimePoint,
    build_Bx,
    build_D,
    dispersion,
    phi,
)


@dataclass(frozen=True)
class GaussianRational:
    """Complex number with exact rational real and imaginary parts."""

    re: Fraction
    im: Fraction

    @classmethod
    def of(cls, re, im=0) -> "GaussianRational":
        return cls(Fraction(re), Fraction(im))

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re * other.re - self.im * other.im,
                                self.re * other.im + self.im * other.re)

    def __truediv__(self, other: "GaussianRational") -> "GaussianRational":
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * GaussianRational(other.re / norm, -other.im / norm)

    def __pow__(self, k: int) -> "GaussianRational":
        if k < 0:
            raise ValueError("negative powers not supported")
        out = GaussianRational.of(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))


_ZERO = GaussianRational.of(0)


def _require_odd(ks) -> int:
    """Return n for a length-(2n+1) tuple, rejecting even lengths."""
    if len(ks) % 2 == 0 or len(ks) == 0:
        raise ValueError(f"need an odd number of symbols, got {len(ks)}")
    return (len(ks) - 1) // 2


def identity_cubic(ks) -> tuple[GaussianRational, GaussianRational]:
    """Both sides of the cubic rearrangement over 2n+1 symbols.

    lhs = (sum k_j)^3 - sum k_j^3; rhs is the double sum of products of a
    contiguous prefix (through index 2l+1, 1-based), the two adjacent-pair
    factors, and the matching contiguous suffix (from index 2l+2m+3).
    """
    n = _require_odd(ks)
    total = sum(ks, _ZERO)
    lhs = total ** 3 - sum((k ** 3 for k in ks), _ZERO)
    rhs = _ZERO
    for l in range(n):
        for m in range(n - l):
            prefix = sum(ks[: 2 * l + 1], _ZERO)
            pair1 = ks[2 * l] + ks[2 * l + 1]
            pair2 = ks[2 * l + 2 * m + 1] + ks[2 * l + 2 * m + 2]
            suffix = sum(ks[2 * l + 2 * m + 2:], _ZERO)
            rhs = rhs + pair1 * pair2 * (prefix + suffix)
    three = GaussianRational.of(3)
    return lhs, three * rhs


def identity_quadratic(ks) -> tuple[GaussianRational, GaussianRational]:
    """Both sides of the quadratic rearrangement over 2n+1 symbols.

    lhs = (sum k_j)^2 minus the alternating square sum (+ at odd 1-based
    positions); rhs doubles the sum of adjacent-pair products.
    """
    n = _require_odd(ks)
    total = sum(ks, _ZERO)
    alt = _ZERO
    for j, k in enumerate(ks):          # j even <=> 1-based position odd
        sq = k ** 2
        alt = alt + (sq if j % 2 == 0 else -sq)
    lhs = total ** 2 - alt
    rhs = _ZERO
    for l in range(n):
        for m in range(n - l):
            pair1 = ks[2 * l] + ks[2 * l + 1]
            pair2 = ks[2 * l + 2 * m + 1] + ks[2 * l + 2 * m + 2]
            rhs = rhs + pair1 * pair2
    return lhs, GaussianRational.of(2) * rhs


@dataclass(frozen=True)
class IdentityReport:
    n_max: int
    trials: int
    checks: int
    failures: int
    seed: int

    @property
    def ok(self) -> bool:
        return self.failures == 0


def run_identity_suite(n_max: int = 3, trials: int = 100,
                       seed: int = 42) -> IdentityReport:
    """Check both identities with exact equality over random tuples.

    Components are random rationals with numerator and denominator drawn
    from [-9, 9] (denominators nonzero), for every n up to n_max.
    """
    if n_max < 1 or trials < 1:
        raise ValueError("n_max and trials must be positive")
    rng = np.random.default_rng(seed)

    def rand_fraction() -> Fraction:
        num = int(rng.integers(-9, 10))
        den = 0
        while den == 0:
            den = int(rng.integers(-9, 10))
        return Fraction(num, den)

    checks = failures = 0
    for n in range(1, n_max + 1):
        for _ in range(trials):
            ks = [GaussianRational(rand_fraction(), rand_fraction())
                  for _ in range(2 * n + 1)]
            for fn in (identity_cubic, identity_quadratic):
                lhs, rhs = fn(ks)
                checks += 1
                if lhs != rhs:
                    failures += 1
    return IdentityReport(n_max=n_max, trials=trials, checks=checks,
                          failures=failures, seed=seed)


# ---------------------------------------------------------------------------
# cross-checks between the multi-sum and matrix-trace representations


def psi3_crosscheck(sset: SolitonSet, medium: Medium,
                    pt: SpaceTimePoint) -> tuple[complex, complex]:
    """Third-order term computed two independent ways.

    Returns (direct, trace): the explicit triple sum over mode indices,
    and -(lam/8) tr[B_x D conj(D)] built from the assembled matrices.
    """
    n = len(sset)
    p = sset.p
    ph = np.array([phi(s, medium, pt) for s in sset.solitons], dtype=complex)
    direct = 0j
    for l1, l2, l3 in itertools.product(range(n), repeat=3):
        denom = (p[l1] + p[l2].conjugate()) * (p[l2].conjugate() + p[l3])
        direct += (ph[l1] ** 2 * ph[l2].conjugate() ** 2 * ph[l3] ** 2
                   / denom)
    direct *= -(medium.lam / 8)
    Bx = build_Bx(sset, medium, pt)
    D = build_D(sset, medium, pt)
    trace = -(medium.lam / 8) * complex(np.trace(Bx @ D @ D.conj()))
    return direct, trace


def _psi_term(sset: SolitonSet, medium: Medium, pt: SpaceTimePoint,
              n: int, dx: int = 0, dt: int = 0) -> complex:
    """Multi-sum form of the order-(2n+1) term, optionally differentiated.

    Every summand is a pure exponential, so the x- and t-derivatives just
    multiply it by its total mode rate (sum of 2*q_j) raised to dx and its
    time rate raised to dt.  Summation indices at even slot positions enter
    unconjugated, odd slots conjugated.
    """
    nsol = len(sset)
    p = sset.p
    om = np.array([dispersion(pk, medium) for pk in p], dtype=complex)
    ph = np.array([phi(s, medium, pt) for s in sset.solitons], dtype=complex)
    coeff = (-(medium.lam / 8)) ** n
    total = 0j
    for idx in itertools.product(range(nsol), repeat=2 * n + 1):
        q = [p[i] if j % 2 == 0 else p[i].conjugate()
             for j, i in enumerate(idx)]
        w = [om[i] if j % 2 == 0 else om[i].conjugate()
             for j, i in enumerate(idx)]
        denom = 1.0 + 0j
        for j in range(2 * n):
            denom *= q[j] + q[j + 1]
        numer = 1.0 + 0j
        for j, i in enumerate(idx):
            numer *= ph[i] ** 2 if j % 2 == 0 else ph[i].conjugate() ** 2
        xrate = 2 * sum(q)
        trate = -2 * sum(w)
        total += (xrate ** dx) * (trate ** dt) * numer / denom
    return coeff * total


def recursion_residual(sset: SolitonSet, medium: Medium, pt: SpaceTimePoint,
                       n: int) -> float:
    """Relative mismatch of the order-(2n+1) member of the hierarchy.

    The linear operator applied to the multi-sum term must equal the
    nonlinear double sum over lower-order terms; returns
    |lhs - rhs| / max(|lhs|, |rhs|).  Capped at n <= 2 because summand
    counts grow combinatorially.
    """
    if n not in (1, 2):
        raise ValueError("recursion check supported for n in {1, 2}")
    lhs = (1j * _psi_term(sset, medium, pt, n, dt=1)
           + medium.rho * _psi_term(sset, medium, pt, n, dx=2)
           + 1j * medium.sigma * _psi_term(sset, medium, pt, n, dx=3))
    rhs = 0j
    for l in range(n):
        for m in range(n - l):
            k = n - l - m - 1
            a = _psi_term(sset, medium, pt, l)
            b = _psi_term(sset, medium, pt, m)
            c = _psi_term(sset, medium, pt, k)
            cx = _psi_term(sset, medium, pt, k, dx=1)
            rhs += (-3j * medium.alpha * a * b.conjugate() * cx
                    - medium.delta * a * b.conjugate() * c)
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / scale
