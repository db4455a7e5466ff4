"""The Z-filtration of the section ring induced by an equivariant family.

A coset ``s`` of ``H^0(X_1, O(m))`` lies in ``F^lam`` when some
representative ``P`` satisfies ``P = t^lam Q(Z, t) + H(Z, t) F(Z, t)``.
Reducing modulo ``t^lam`` and writing ``H = sum_k H_k t^k`` this says

    P + A (F0 + F1) = F0 H_0,   F0 H_k + F1 H_{k-1} = 0   (1 <= k < lam)

for some form ``A``; hence ``F^lam`` is the image in ``R_m`` of the span
``W_lam`` of ``(F0 + F1) S_{m-d}`` and the admissible ``F0 H_0``.  This
uses every representative at once, so the answer cannot depend on which
one was handed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import polyalg
from .errors import BoundExceeded
from .family import Family, cstar_weight_check
from .polyalg import HomogPoly
from .sections import CENTRAL, h0, section_basis


def scan_ceiling(fam: Family, m: int) -> int:
    """``ceil(max|w| m / w_t) + 2``: a level at which every filtration piece has died."""
    _, wt = cstar_weight_check(fam)
    wmax = max(abs(w) for w in fam.weights)
    return math.ceil(Fraction(wmax * m, wt)) + 2


def _poly_row(p: HomogPoly, monos) -> list:
    return [p.coefficient(mono) for mono in monos]


def _admissible_h0(fam: Family, m: int, lam: int) -> list[HomogPoly]:
    """Basis of ``{F0 H_0}`` over chains ``F0 H_k + F1 H_{k-1} = 0``, ``1 <= k < lam``."""
    d = fam.degree
    small = polyalg.monomials(m - d)
    n = len(small)
    if lam <= 1:
        return [fam.F0 * HomogPoly.monomial(mono) for mono in small]
    big = polyalg.monomials(m)
    index = {mono: i for i, mono in enumerate(big)}
    f0_cols = [fam.F0 * HomogPoly.monomial(mono) for mono in small]
    f1_cols = [fam.F1 * HomogPoly.monomial(mono) for mono in small]
    rows = []
    # unknowns: H_0, ..., H_{lam-1}, each a vector of length n
    for k in range(1, lam):
        block = [[polyalg.ZERO] * (n * lam) for _ in big]
        for c in range(n):
            for mono, coef in f0_cols[c].terms.items():
                block[index[mono]][k * n + c] += coef
            for mono, coef in f1_cols[c].terms.items():
                block[index[mono]][(k - 1) * n + c] += coef
        rows.extend(r for r in block if any(r))
    out = []
    for vec in polyalg.nullspace(rows, n * lam):
        h0_vec = vec[:n]
        if any(h0_vec):
            out.append(fam.F0 * polyalg.linear_combination(h0_vec, [HomogPoly.monomial(x) for x in small], m - d))
    return out


def _relations(fam: Family, m: int) -> list[HomogPoly]:
    d = fam.degree
    if m < d:
        return []
    F = fam.F0 + fam.F1
    return [F * HomogPoly.monomial(mono) for mono in polyalg.monomials(m - d)]


def _span_rows(fam: Family, m: int, lam: int) -> list[list]:
    monos = polyalg.monomials(m)
    if lam <= 0:
        return [[polyalg.ONE if i == k else polyalg.ZERO for i in range(len(monos))] for k in range(len(monos))]
    gens = _relations(fam, m)
    if m >= fam.degree:
        gens = gens + _admissible_h0(fam, m, lam)
    return [_poly_row(g, monos) for g in gens]


def filtered_dim(fam: Family, m: int, lam: int) -> int:
    """``dim F^lam R_m``."""
    rel = len(_relations(fam, m))
    rows = _span_rows(fam, m, lam)
    return (polyalg.rank(rows) if rows else 0) - rel


def _contains(fam: Family, m: int, lam: int, p: HomogPoly) -> bool:
    rows = _span_rows(fam, m, lam)
    r = polyalg.rank(rows) if rows else 0
    return polyalg.rank(rows + [_poly_row(p, polyalg.monomials(m))]) == r


def lambda_max(fam: Family, s: HomogPoly, ceiling: int | None = None) -> int:
    """Largest ``lam >= 0`` with ``s`` in ``F^lam`` (exact linear algebra)."""
    m = s.degree
    if ceiling is None:
        ceiling = scan_ceiling(fam, m)
    else:
        cstar_weight_check(fam)
    monos = polyalg.monomials(m)
    rel = [_poly_row(g, monos) for g in _relations(fam, m)]
    if polyalg.rank(rel + [_poly_row(s, monos)]) == (polyalg.rank(rel) if rel else 0):
        raise ValueError("the zero coset has no finite filtration level")
    lam = 0
    while _contains(fam, m, lam + 1, s):
        lam += 1
        if lam >= ceiling:
            raise BoundExceeded(f"{s} still in F^{lam} at the scan ceiling {ceiling}")
    return lam


@dataclass(frozen=True)
class ReesFiltration:
    m: int
    dims: dict
    lambda_max: tuple
    basis: tuple
    bounds: tuple
    central_dim: int
    ceiling: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def gr_dims(self) -> dict:
        levels = sorted(self.dims)
        out = {}
        for lam in levels:
            nxt = self.dims.get(lam + 1, 0)
            if self.dims[lam] - nxt:
                out[lam] = self.dims[lam] - nxt
        return out

    @property
    def total(self) -> int:
        return sum(self.gr_dims.values())

    def is_descending(self) -> bool:
        levels = sorted(self.dims)
        return all(self.dims[a] >= self.dims[b] for a, b in zip(levels, levels[1:]))

    def is_linearly_bounded(self) -> bool:
        c_low, c_high = self.bounds
        full = self.dims[min(self.dims)]
        return all((v == full if lam <= c_low * self.m else True) and (v == 0 if lam > c_high * self.m else True)
                   for lam, v in self.dims.items())


def rees_gr_dims(fam: Family, m: int, ceiling: int | None = None, with_lambda: bool = True) -> ReesFiltration:
    """Filtered and graded dimensions of ``R_m`` up to the vanishing level."""
    c, wt = cstar_weight_check(fam)
    if ceiling is None:
        ceiling = scan_ceiling(fam, m)
    dims = {}
    lam = 0
    while True:
        dims[lam] = filtered_dim(fam, m, lam)
        if dims[lam] == 0:
            break
        if lam >= ceiling:
            raise BoundExceeded(f"F^{lam} R_{m} is still nonzero at the scan ceiling {ceiling}")
        lam += 1
    basis = section_basis(fam, m, 1).basis
    lmax = tuple(lambda_max(fam, s, ceiling) for s in basis) if with_lambda else ()
    wmax = max(abs(w) for w in fam.weights)
    return ReesFiltration(m=m, dims=dims, lambda_max=lmax, basis=basis,
                          bounds=(Fraction(0), Fraction(wmax, wt)),
                          central_dim=h0(fam, m, CENTRAL), ceiling=ceiling)


def multiplicativity_failures(fam: Family, a: int, b: int) -> list[tuple[HomogPoly, HomogPoly]]:
    """Basis pairs ``(s, s')`` with ``lambda(s s') < lambda(s) + lambda(s')``."""
    bad = []
    left = section_basis(fam, a, 1).basis
    right = section_basis(fam, b, 1).basis
    for s in left:
        ls = lambda_max(fam, s)
        for s2 in right:
            prod = s * s2
            if ls + lambda_max(fam, s2) == 0:
                continue
            try:
                lp = lambda_max(fam, prod)
            except ValueError:
                continue  # product is zero in R_{a+b}: it lies in every piece
            if lp < ls + lambda_max(fam, s2):
                bad.append((s, s2))
    return bad
