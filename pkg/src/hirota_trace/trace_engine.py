"""Compiled determinant-ratio representation of the trace solution.

The closed field psi = tr[B_x M^{-1}], M = I + (lam/8) D conj(D), equals a
ratio of two finite exponential sums,

    psi = g / f,   f = det(M),   g = det(M) * tr[B_x M^{-1}],

whose terms are constant coefficients times exp(G x - H t) with mode-sum
growth rates G, H.  Expanding both determinants once per soliton set gives
an evaluator that is

  * exact (same analytic object as the dense solve),
  * stable everywhere after factoring out the largest exponent per point,
    while the dense solve loses all accuracy where cond(M) blows up, and
  * trivially differentiable: every term is a pure exponential, so each
    x- or t-derivative just multiplies term j by G_j or -H_j.

This module is the evaluation engine behind grid fields, analytic
derivatives, and therefore all residual checks.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import Medium, SolitonSet, dispersion
from .errors import DegeneratePointError
from .identities import GaussianRational

#: |f|/max-term below which the determinant cancels past double precision
CANCEL_TOL = 1e-12

# ---------------------------------------------------------------------------
# minimal multivariate polynomial arithmetic (dict: exponent tuple -> coeff)

_Poly = dict


def _p_add(a: _Poly, b: _Poly) -> _Poly:
    out = dict(a)
    for e, c in b.items():
        out[e] = out[e] + c if e in out else c
    return out


def _p_mul(a: _Poly, b: _Poly) -> _Poly:
    out: _Poly = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(i + j for i, j in zip(e1, e2))
            out[e] = out[e] + c1 * c2 if e in out else c1 * c2
    return out


def _p_scale(a: _Poly, s: complex) -> _Poly:
    return {e: c * s for e, c in a.items()}


def _p_det(m: list[list[_Poly]]) -> _Poly:
    """Cofactor-expansion determinant of a small polynomial matrix."""
    n = len(m)
    if n == 0:
        return {(): 1.0 + 0j}
    if n == 1:
        return m[0][0]
    out: _Poly = {}
    for j in range(n):
        if not m[0][j]:
            continue
        minor = [[m[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = _p_mul(m[0][j], _p_det(minor))
        if j % 2:
            term = {e: -c for e, c in term.items()}
        out = _p_add(out, term)
    return out


def _structural_prune(poly: _Poly, n: int, excess: int) -> _Poly:
    """Keep only the monomials the determinant identities allow.

    Legitimate terms have 0/1 exponents in each phi_k^2 / conj(phi_k)^2
    variable and carry ``excess`` more unconjugated factors than conjugated
    ones (0 for f, 1 for g).  Everything else cancels identically in the
    expansion (exactly zero under the exact-rational arithmetic upstream);
    the assertion is a safety net against a wrong expansion, since even a
    tiny spurious monomial could outgrow every real term far from origin.
    """
    kept: _Poly = {}
    max_keep = 0.0
    max_drop = 0.0
    for e, c in poly.items():
        if max(e, default=0) <= 1 and sum(e[:n]) == sum(e[n:]) + excess:
            kept[e] = c
            max_keep = max(max_keep, abs(c))
        else:
            max_drop = max(max_drop, abs(c))
    if kept and max_drop > 1e-8 * max_keep:
        raise AssertionError(
            "determinant expansion produced an unexpectedly large "
            f"out-of-pattern coefficient ({max_drop:.3g})")
    return kept


def _determinant_polys(p: np.ndarray, coupling: float) -> tuple[_Poly, _Poly]:
    """Expand f = det(M) and g = f * psi as polynomials in z_k = phi_k^2
    (variables 0..N-1) and w_k = conj(phi_k)^2 (variables N..2N-1).

    The expansion runs in exact Gaussian-rational arithmetic: interaction
    coefficients are differences of near-equal products (Cauchy-determinant
    cancellation) and can be orders of magnitude below the intermediates,
    so double-precision cofactor expansion would leave them with only a few
    correct digits.  Exact coefficients are rounded to complex at the end.
    """
    n = len(p)
    nv = 2 * n
    if n == 0:
        return {(): 1.0 + 0j}, {}

    def gr(v: complex) -> GaussianRational:
        return GaussianRational(Fraction(v.real), Fraction(v.imag))

    one_gr = gr(1)
    pg = [gr(pk) for pk in p]
    pgc = [q.conjugate() for q in pg]
    A = [[one_gr / (pg[m] + pgc[q]) for q in range(n)] for m in range(n)]
    Ab = [[A[m][q].conjugate() for q in range(n)] for m in range(n)]
    coupling = gr(complex(coupling))

    def var(i: int) -> _Poly:
        e = [0] * nv
        e[i] = 1
        return {tuple(e): one_gr}

    one: _Poly = {tuple([0] * nv): one_gr}
    z = [var(i) for i in range(n)]
    w = [var(n + i) for i in range(n)]

    # similarity frame: det(M) = det(I + c * Y), Y_mn = sum_k Ab_mk A_kn z_k w_n
    def y_entry(m: int, q: int) -> _Poly:
        out: _Poly = {}
        for k in range(n):
            out = _p_add(out,
                         _p_scale(_p_mul(z[k], w[q]), Ab[m][k] * A[k][q]))
        return out

    def to_complex(poly: _Poly) -> _Poly:
        return {e: complex(c) for e, c in poly.items()}

    fm = [[_p_add(one if m == q else {}, _p_scale(y_entry(m, q), coupling))
           for q in range(n)] for m in range(n)]
    f = _structural_prune(to_complex(_p_det(fm)), n, excess=0)

    # bordered determinant for g = det(M) * psi
    gm = [row + [None] for row in fm]
    for m in range(n):
        col: _Poly = {}
        for q in range(n):
            col = _p_add(col, _p_scale(z[q], Ab[m][q]))
        gm[m][n] = col
    last: list[_Poly] = []
    for q in range(n):
        entry: _Poly = {}
        for m in range(n):
            entry = _p_add(entry, _p_scale(_p_mul(z[m], w[q]),
                                           coupling * A[m][q]))
        last.append(entry)
    tail: _Poly = {}
    for m in range(n):
        tail = _p_add(tail, z[m])
    last.append(tail)
    gm.append(last)
    g = _structural_prune(to_complex(_p_det(gm)), n, excess=1)
    return f, g


class _ExponentialSum:
    """Finite sum  sum_j Gamma_j exp(G_j x - ... )  with scaled evaluation."""

    def __init__(self, poly: _Poly, p: np.ndarray, a0: np.ndarray,
                 om: np.ndarray) -> None:
        n = len(p)
        if not poly:
            self.empty = True
            return
        self.empty = False
        exps = np.array(sorted(poly.keys()), dtype=int)
        gamma = np.array([poly[tuple(e)] for e in exps], dtype=complex)
        a = exps[:, :n]
        b = exps[:, n:]
        self.coef = (gamma
                     * np.prod(a0[None, :] ** (2 * a), axis=1)
                     * np.prod(a0.conj()[None, :] ** (2 * b), axis=1))
        self.xrate = 2 * (a @ p + b @ p.conj())
        self.trate = -2 * (a @ om + b @ om.conj())
        self.log_coef = np.log(np.abs(self.coef))

    def scaled_jets(self, x: np.ndarray, t: np.ndarray,
                    orders: list[tuple[int, int]]) -> tuple[dict, np.ndarray]:
        """Per-point scaled derivative sums and the log scale factor s.

        Returns jets[(i, l)] = exp(-s) * d^i/dx^i d^l/dt^l of the sum.
        """
        if self.empty:
            shape = np.broadcast(x, t).shape
            return ({o: np.zeros(shape, dtype=complex) for o in orders},
                    np.full(shape, -np.inf))
        arg = (np.multiply.outer(self.xrate, x)
               + np.multiply.outer(self.trate, t))
        s = np.max(arg.real + self.log_coef.reshape(
            (-1,) + (1,) * (arg.ndim - 1)), axis=0)
        terms = self.coef.reshape((-1,) + (1,) * (arg.ndim - 1)) \
            * np.exp(arg - s)
        jets = {}
        for (i, l) in orders:
            mult = (self.xrate ** i * self.trate ** l).reshape(
                (-1,) + (1,) * (arg.ndim - 1))
            jets[(i, l)] = np.sum(mult * terms, axis=0)
        return jets, s


_ALL_ORDERS = [(0, 0), (1, 0), (2, 0), (3, 0), (0, 1)]


class CompiledSolution:
    """Per-(SolitonSet, Medium) compiled evaluator of the exact field."""

    def __init__(self, sset: SolitonSet, medium: Medium) -> None:
        self.n = len(sset)
        p = sset.p
        a0 = sset.a0
        om = np.array([dispersion(pk, medium) for pk in p], dtype=complex)
        f_poly, g_poly = _determinant_polys(p, medium.lam / 8)
        self._f = _ExponentialSum(f_poly, p, a0, om)
        self._g = _ExponentialSum(g_poly, p, a0, om)

    def psi(self, x, t, check_degenerate: bool = True) -> np.ndarray:
        """Field values on broadcastable real arrays x, t."""
        out = self.derivatives(x, t, orders=[(0, 0)],
                               check_degenerate=check_degenerate)
        return out["psi"]

    def degenerate_mask(self, x, t) -> np.ndarray:
        """True where f cancels past double precision (unreliable point)."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        fj, _ = self._f.scaled_jets(x, t, [(0, 0)])
        return np.abs(fj[(0, 0)]) < CANCEL_TOL

    def derivatives(self, x, t, orders: list[tuple[int, int]] = _ALL_ORDERS,
                    check_degenerate: bool = True) -> dict:
        """psi and its requested derivatives as arrays keyed by name.

        Keys: 'psi', 'psi_x', 'psi_xx', 'psi_xxx', 'psi_t' (as requested).
        Raises DegeneratePointError if any point cancels past precision and
        ``check_degenerate`` is set; pass False to get NaN there plus a
        'degenerate' boolean mask instead.
        """
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        shape = np.broadcast(x, t).shape
        if self.n == 0:
            out = {_name(o): np.zeros(shape, dtype=complex) for o in orders}
            out["degenerate"] = np.zeros(shape, dtype=bool)
            return out
        fj, sf = self._f.scaled_jets(x, t, orders)
        gj, sg = self._g.scaled_jets(x, t, orders)
        f0 = fj[(0, 0)]
        bad = np.abs(f0) < CANCEL_TOL
        if check_degenerate and np.any(bad):
            raise DegeneratePointError(
                "determinant cancellation beyond double precision at "
                f"{int(np.count_nonzero(bad))} point(s)")
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.exp(sg - sf)
            out = {}
            psi = r * gj[(0, 0)] / f0
            out["psi"] = psi
            # Leibniz on g = psi * f, solved for the highest derivative
            if (1, 0) in orders:
                out["psi_x"] = (r * gj[(1, 0)] - psi * fj[(1, 0)]) / f0
            if (2, 0) in orders:
                out["psi_xx"] = (r * gj[(2, 0)] - 2 * out["psi_x"] * fj[(1, 0)]
                                 - psi * fj[(2, 0)]) / f0
            if (3, 0) in orders:
                out["psi_xxx"] = (r * gj[(3, 0)] - 3 * out["psi_xx"] * fj[(1, 0)]
                                  - 3 * out["psi_x"] * fj[(2, 0)]
                                  - psi * fj[(3, 0)]) / f0
            if (0, 1) in orders:
                out["psi_t"] = (r * gj[(0, 1)] - psi * fj[(0, 1)]) / f0
        if np.any(bad):
            for key in out:
                out[key] = np.where(bad, np.nan + 0j, out[key])
        out["degenerate"] = bad
        return out


def _name(order: tuple[int, int]) -> str:
    return {(0, 0): "psi", (1, 0): "psi_x", (2, 0): "psi_xx",
            (3, 0): "psi_xxx", (0, 1): "psi_t"}[order]


@lru_cache(maxsize=64)
def compiled(sset: SolitonSet, medium: Medium) -> CompiledSolution:
    """Memoized compilation; SolitonSet and Medium are frozen and hashable."""
    return CompiledSolution(sset, medium)
