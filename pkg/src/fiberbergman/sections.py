"""Section spaces H^0(X_t, O(m)), vanishing orders and the central filtration.

Sections are represented by degree-m polynomials modulo the fiber
polynomial.  On the central fiber ``F0 = prod g_j^{m_j}`` the order of a
section along ``Y_j = {g_j = 0}`` is the ``g_j``-adic valuation of any
representative, capped at ``m_j``; the cap makes the choice of
representative irrelevant because multiples of ``F0`` have valuation at
least ``m_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import polyalg
from .family import CENTRAL, Family, fiber_id, fiber_poly_exact
from .polyalg import GaussRational, HomogPoly

INF = math.inf


def expected_dim(degree: int, m: int) -> int:
    """``C(m+2, 2) - C(m-d+2, 2)``: dimension of degree-m forms modulo a degree-d form."""
    full = math.comb(m + 2, 2)
    return full - math.comb(m - degree + 2, 2) if m >= degree else full


@dataclass(frozen=True)
class SectionSpace:
    m: int
    t: object
    basis: tuple[HomogPoly, ...]
    fiber: HomogPoly

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def is_central(self) -> bool:
        return self.t is CENTRAL

    def reduce(self, p: HomogPoly) -> HomogPoly:
        return polyalg.normal_form(p, self.fiber)

    def coordinates(self, p: HomogPoly) -> list[GaussRational]:
        """Coordinates of the coset of ``p`` in the monomial basis."""
        nf = self.reduce(p)
        lookup = {b.leading_monomial: i for i, b in enumerate(self.basis)}
        out = [polyalg.ZERO] * self.dim
        for mono, c in nf.terms.items():
            out[lookup[mono]] = c
        return out


def _exact_t(t):
    if t is CENTRAL:
        return CENTRAL
    t = complex(t)
    return GaussRational(t)


def section_basis(fam: Family, m: int, t=CENTRAL) -> SectionSpace:
    """Monomial coset basis of ``H^0(X_t, O(m))``.

    The basis consists of degree-m monomials not divisible by the leading
    monomial of the (exact) fiber polynomial, in descending graded-lex order.
    """
    if m < 0:
        raise ValueError("twist m must be non-negative")
    t = fiber_id(t)
    f = fiber_poly_exact(fam, _exact_t(t))
    lm = f.leading_monomial
    basis = tuple(HomogPoly.monomial(mono) for mono in polyalg.monomials(m)
                  if not all(a >= b for a, b in zip(mono, lm)))
    return SectionSpace(m=m, t=t, basis=basis, fiber=f)


def h0(fam: Family, m: int, t=CENTRAL) -> int:
    return section_basis(fam, m, t).dim


# ------------------------------------------------------------------- orders
def component_orders(fam: Family, p: HomogPoly) -> tuple[float, ...]:
    """Capped orders ``ord_{Y_j}`` of the central section represented by ``p``."""
    out = []
    for comp in fam.components:
        v = polyalg.valuation(p, comp.poly)
        out.append(INF if v >= comp.multiplicity else int(v))
    return tuple(out)


def ord0_of(fam: Family, p: HomogPoly) -> Fraction | float:
    """``min_j ord_{Y_j}/m_j``; ``inf`` exactly when ``p`` vanishes on the central fiber."""
    best: Fraction | float = INF
    for o, comp in zip(component_orders(fam, p), fam.components):
        if o != INF:
            best = min(best, Fraction(o, comp.multiplicity))
    return best


@dataclass(frozen=True)
class OrderTable:
    sections: tuple[HomogPoly, ...]
    orders: tuple[tuple[float, ...], ...]
    ord0: tuple[Fraction | float, ...]


def order_table(fam: Family, space: SectionSpace) -> OrderTable:
    if not space.is_central:
        raise ValueError("order tables live on the central fiber")
    orders = tuple(component_orders(fam, s) for s in space.basis)
    ord0 = tuple(ord0_of(fam, s) for s in space.basis)
    return OrderTable(sections=space.basis, orders=orders, ord0=ord0)


# --------------------------------------------------------------- filtration
def candidate_jumps(fam: Family) -> list[Fraction]:
    return sorted({Fraction(a, c.multiplicity)
                   for c in fam.components for a in range(c.multiplicity)})


def _filtration_kernel(fam: Family, space: SectionSpace, lam: Fraction) -> list[list[GaussRational]]:
    """Coefficient vectors (in ``space.basis``) spanning ``F^lam``.

    A coset lies in ``F^lam`` iff its representative is divisible by
    ``g_j^{ceil(lam*m_j)}`` for every component; divisibility by a single
    polynomial is detected by a zero normal form, and normal forms are linear.
    """
    rows_by_monomial: dict[tuple, list[GaussRational]] = {}
    n = space.dim
    for j, comp in enumerate(fam.components):
        k = math.ceil(lam * comp.multiplicity)
        if k == 0:
            continue
        divisor = comp.poly ** k
        for col, s in enumerate(space.basis):
            nf = polyalg.normal_form(s, divisor)
            for mono, c in nf.terms.items():
                row = rows_by_monomial.setdefault((j, mono), [polyalg.ZERO] * n)
                row[col] = c
    rows = list(rows_by_monomial.values())
    return polyalg.nullspace(rows, n)


def _complement_pool(kernel, rule: str):
    if rule == "greedy":
        return kernel
    if rule == "reverse":
        return list(reversed(kernel))
    n = len(kernel)
    return [[sum((kernel[l][c] * (l - k + 1) for l in range(k, n)), polyalg.ZERO)
             for c in range(len(kernel[k]))] for k in range(n)]


def _combine(space: SectionSpace, vec: Sequence[GaussRational]) -> HomogPoly:
    return polyalg.linear_combination(vec, space.basis, space.m)


@dataclass(frozen=True)
class Filtration:
    """Jumping numbers of ``ord0`` and a graded basis for each jump."""

    space: SectionSpace
    jumps: tuple[Fraction, ...]
    graded_bases: tuple[tuple[HomogPoly, ...], ...]
    graded_coordinates: tuple[tuple[tuple[GaussRational, ...], ...], ...]
    filtered_dims: dict = field(default_factory=dict)

    @property
    def graded_dims(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.graded_bases)

    @property
    def sections(self) -> tuple[HomogPoly, ...]:
        """Graded basis flattened in jump order."""
        return tuple(s for block in self.graded_bases for s in block)

    @property
    def exponents(self) -> tuple[Fraction, ...]:
        return tuple(lam for lam, block in zip(self.jumps, self.graded_bases) for _ in block)

    @property
    def blocks(self) -> tuple[int, ...]:
        return tuple(i for i, block in enumerate(self.graded_bases) for _ in block)


def filtration(fam: Family, space: SectionSpace, complement: str = "greedy") -> Filtration:
    """Order filtration on ``H^0`` of the central fiber.

    ``F^lam`` is computed over the whole space by exact kernels, not by
    reading off basis elements.  Graded pieces ``F^{lam_i}/F^{lam_{i+1}}``
    get complements chosen greedily from the kernel basis of ``F^{lam_i}``
    (``complement="greedy"``), from the same list reversed (``"reverse"``),
    or from a unitriangular mix of it (``"mixed"``, whose representatives
    also pick up higher-filtration terms).  All are valid and must give the
    same Bergman kernel.
    """
    if not space.is_central:
        raise ValueError("the order filtration lives on the central fiber")
    if complement not in ("greedy", "reverse", "mixed"):
        raise ValueError(f"unknown complement rule {complement!r}")
    candidates = candidate_jumps(fam)
    kernels = {lam: _filtration_kernel(fam, space, lam) for lam in candidates}
    kernels[Fraction(1)] = []
    dims = {lam: len(k) for lam, k in kernels.items()}
    levels = candidates + [Fraction(1)]
    jumps = [lam for lam, nxt in zip(levels, levels[1:]) if dims[lam] > dims[nxt]]

    graded, coords = [], []
    for lam in jumps:
        # F^{next jump} equals F^c for the next candidate c > lam
        next_candidate = min((c for c in levels if c > lam), default=Fraction(1))
        span = [list(v) for v in kernels[next_candidate]]
        rank = polyalg.rank(span) if span else 0
        pool = _complement_pool(kernels[lam], complement)
        chosen = []
        for vec in pool:
            trial = span + [list(vec)]
            r = polyalg.rank(trial)
            if r > rank:
                span, rank = trial, r
                chosen.append(tuple(vec))
        graded.append(tuple(_combine(space, v) for v in chosen))
        coords.append(tuple(chosen))
    return Filtration(space=space, jumps=tuple(jumps), graded_bases=tuple(graded),
                      graded_coordinates=tuple(coords), filtered_dims=dims)


def central_filtration(fam: Family, m: int, complement: str = "greedy") -> Filtration:
    return filtration(fam, section_basis(fam, m, CENTRAL), complement=complement)
