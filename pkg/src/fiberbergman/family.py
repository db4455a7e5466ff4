"""One-parameter hypersurface families ``F0(Z) + t*F1(Z) = 0`` in P^2 x C."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import polyalg
from .errors import (
    BaseActionTrivial,
    CentralFiberRequested,
    ComponentDividesF1,
    ComponentReducible,
    FactorizationMismatch,
    NonEquivariant,
    NotHomogeneous,
    ParseError,
)
from .polyalg import GaussRational, HomogPoly, NumPoly


class _Central:
    """Identity of the (possibly non-reduced) central fiber."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "CENTRAL"

    def __reduce__(self):
        return (_Central, ())


CENTRAL = _Central()


def fiber_id(t) -> complex | _Central:
    """Validate a fiber identity; numeric zero is refused in favour of CENTRAL."""
    if t is CENTRAL:
        return CENTRAL
    if isinstance(t, str) and t.strip().lower() == "central":
        return CENTRAL
    value = complex(t)
    if value == 0:
        raise CentralFiberRequested("t = 0 must be requested as CENTRAL")
    return value


def is_central(t) -> bool:
    return t is CENTRAL


def t_label(t) -> str:
    if t is CENTRAL:
        return "central"
    t = complex(t)
    if t.imag == 0:
        return repr(t.real)
    return repr(t)


@dataclass(frozen=True)
class Component:
    poly: HomogPoly
    multiplicity: int

    def __str__(self):
        return f"({self.poly})^{self.multiplicity}"


@dataclass(frozen=True)
class Family:
    F0: HomogPoly
    F1: HomogPoly
    components: tuple[Component, ...]
    weights: tuple[int, int, int, int] | None = None
    label: str = ""

    @property
    def degree(self) -> int:
        return self.F0.degree

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(c.multiplicity for c in self.components)

    def unit_factor_parts(self, j: int) -> tuple[HomogPoly, HomogPoly]:
        """``(numerator, denominator)`` of ``v = -(prod_{k != j} g_k^{m_k}) / F1``.

        On the total space ``t = g_j^{m_j} * v``.
        """
        num = HomogPoly.constant(-1)
        for k, comp in enumerate(self.components):
            if k != j:
                num = num * comp.poly ** comp.multiplicity
        return num, self.F1

    def fiber_poly(self, t) -> NumPoly:
        return fiber_poly(self, t)


def _irreducibility_spot_check(g: HomogPoly) -> None:
    if g.degree == 0:
        raise ComponentReducible("constant component")
    if g.degree == 2:
        # a ternary quadric splits into lines iff its symmetric matrix is singular
        half = Fraction(1, 2)
        c = g.coefficient
        a = [[c((2, 0, 0)), c((1, 1, 0)) * half, c((1, 0, 1)) * half],
             [c((1, 1, 0)) * half, c((0, 2, 0)), c((0, 1, 1)) * half],
             [c((1, 0, 1)) * half, c((0, 1, 1)) * half, c((0, 0, 2))]]
        det = (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
               - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
               + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]))
        if not det:
            raise ComponentReducible(f"component {g} splits into linear factors")


def _weight_of(mono, weights) -> int:
    return mono[0] * weights[0] + mono[1] * weights[1] + mono[2] * weights[2]


def _equivariance_constant(F0: HomogPoly, F1: HomogPoly, weights) -> int:
    wx, wy, wz, wt = weights
    seen = {_weight_of(m, weights) for m in F0.terms}
    seen |= {_weight_of(m, weights) + wt for m in F1.terms}
    if len(seen) != 1:
        raise NonEquivariant(
            f"monomial weights {sorted(seen)} under weights {tuple(weights)} are not a single constant")
    return seen.pop()


def _as_poly(text, what: str) -> HomogPoly:
    if isinstance(text, HomogPoly):
        return text
    if not isinstance(text, str):
        raise ParseError(f"{what} must be polynomial text, got {text!r}")
    return polyalg.parse(text)


def load_family(config: Mapping[str, Any]) -> Family:
    """Build and validate a :class:`Family` from a config mapping.

    Keys: ``F0``, ``F1`` (polynomial text), ``components`` (list of
    ``[text, multiplicity]``), optional ``weights`` ``[wX, wY, wZ, wt]`` and
    ``label``.
    """
    try:
        F0 = _as_poly(config["F0"], "F0")
        F1 = _as_poly(config["F1"], "F1")
        raw_components = config["components"]
    except KeyError as exc:
        raise ParseError(f"family config is missing key {exc.args[0]!r}") from exc
    if F0.degree != F1.degree:
        raise NotHomogeneous(f"F0 has degree {F0.degree} but F1 has degree {F1.degree}")
    if F0.is_zero():
        raise FactorizationMismatch("F0 must be nonzero")
    if F1.is_zero():
        raise ComponentDividesF1("F1 must be nonzero")

    components = []
    for entry in raw_components:
        if isinstance(entry, Component):
            components.append(entry)
            continue
        text, mult = entry
        if int(mult) != mult or int(mult) < 1:
            raise ParseError(f"multiplicity must be a positive integer, got {mult!r}")
        components.append(Component(_as_poly(text, "component"), int(mult)))
    if not components:
        raise FactorizationMismatch("at least one central component is required")

    product = HomogPoly.constant(1)
    for comp in components:
        _irreducibility_spot_check(comp.poly)
        product = product * comp.poly ** comp.multiplicity
    if product != F0:
        raise FactorizationMismatch(f"F0 = {F0} is not the product {' * '.join(map(str, components))}")
    for comp in components:
        if polyalg.divide_exact(F1, comp.poly) is not None:
            raise ComponentDividesF1(f"component {comp.poly} divides F1 = {F1}")

    weights = config.get("weights")
    if weights is not None:
        weights = tuple(int(w) for w in weights)
        if len(weights) != 4:
            raise ParseError("weights must have four entries (wX, wY, wZ, wt)")
        _equivariance_constant(F0, F1, weights)
    return Family(F0=F0, F1=F1, components=tuple(components), weights=weights,
                  label=str(config.get("label", "")))


def read_family(path: str | Path) -> Family:
    with open(path, encoding="utf-8") as fh:
        return load_family(json.load(fh))


def builtin_family_path(name: str) -> Path:
    ref = resources.files("fiberbergman") / "families" / f"{name}.json"
    return Path(str(ref))


def builtin_families() -> list[str]:
    folder = resources.files("fiberbergman") / "families"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def builtin_family(name: str) -> Family:
    return read_family(builtin_family_path(name))


def fiber_poly(fam: Family, t) -> NumPoly:
    """``F0 + t*F1`` with complex-double coefficients."""
    t = fiber_id(t)
    if t is CENTRAL:
        raise CentralFiberRequested("the central fiber is non-reduced; use its components")
    return fam.F0.to_numeric() + fam.F1.to_numeric().scale(t)


def fiber_poly_exact(fam: Family, t) -> HomogPoly:
    """Exact ``F0 + t*F1`` for a Gaussian-rational (or exactly converted float) ``t``."""
    if t is CENTRAL:
        return fam.F0
    t = GaussRational.coerce(t)
    if not t:
        raise CentralFiberRequested("t = 0 must be requested as CENTRAL")
    return fam.F0 + fam.F1.scale(t)


def cstar_weight_check(fam: Family) -> tuple[int, int]:
    """Return ``(c, w_t)`` with ``F(l^w Z; l^wt t) = l^c F``; requires ``w_t > 0``."""
    if fam.weights is None:
        raise NonEquivariant("family declares no C*-weights")
    c = _equivariance_constant(fam.F0, fam.F1, fam.weights)
    wt = fam.weights[3]
    if wt <= 0:
        raise BaseActionTrivial(
            f"w_t = {wt}: the action does not cover the standard action on the base")
    return c, wt


def component_of_point(fam: Family, point: Sequence[complex], tol: float = 1e-9) -> list[int]:
    """Indices of central components vanishing at ``point`` (unit-normalised)."""
    p = np.asarray(point, dtype=complex)
    p = p / np.linalg.norm(p)
    return [j for j, comp in enumerate(fam.components)
            if abs(comp.poly.to_numeric().eval(p)) <= tol]
