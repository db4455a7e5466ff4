"""Gram matrices, orthonormal bases and the fiberwise Bergman kernel.

Off the central fiber sections are paired with the Fubini-Study metric and
rescaled by ``|t|^{-ord0}`` so that the Gram matrix has a limit at t = 0.
On the central fiber the pairing is the graded limit pairing, integrated
over the reduced components with multiplicity; distinct graded pieces are
orthogonal by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import polyalg
from .errors import BadBasePoint, GridComponentMismatch, NotPositiveDefinite, PointOffFiber
from .family import CENTRAL, Family, fiber_id, fiber_poly
from .fibergeom import (
    BASE_POINT_TOL,
    ON_CURVE_TOL,
    QuadratureGrid,
    _fs_density,
    _same_curve,
    build_quadrature,
    central_grids,
    fiber_grid,
    graded_values,
    local_points,
    unit,
)
from .polyalg import HomogPoly, NumPoly
from .sections import Filtration, central_filtration

PD_TOL = 1e-10
LOG_FLOOR = 1e-300
FD_STEP = 1e-4


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Pairing matrix of ``sections`` on one fiber.

    ``exponents`` are the rescaling exponents (central ``ord0`` values);
    at CENTRAL they are the graded levels fed to the limit pairing.  A
    plain curve (no family) has ``fam is None`` and zero exponents.
    """

    t: object
    m: int
    entries: np.ndarray
    exponents: tuple[Fraction, ...]
    sections: tuple[HomogPoly, ...]
    blocks: tuple[int, ...]
    fam: Family | None = None
    curve: NumPoly | None = None

    @property
    def is_central(self) -> bool:
        return self.t is CENTRAL

    @property
    def size(self) -> int:
        return len(self.sections)

    def scales(self) -> np.ndarray:
        if self.is_central or self.fam is None:
            return np.ones(self.size)
        tt = abs(complex(self.t))
        return np.array([tt ** (-float(e)) for e in self.exponents])

    def section_values(self, points, j: int | None = None) -> np.ndarray:
        """``(npoints, N)`` values of the (rescaled or graded) sections.

        At CENTRAL ``j`` names the component carrying the points and the
        values are those of the graded limit pairing.
        """
        pts = unit(np.atleast_2d(points))
        if self.is_central:
            cols = [graded_values(self.fam, s, lam, j, pts)
                    for s, lam in zip(self.sections, self.exponents)]
        else:
            cols = [s.eval(pts) for s in self.sections]
        return np.stack(cols, axis=1) * self.scales()[None, :]

    def section_derivatives(self, points, dpoints) -> np.ndarray:
        """Derivatives of the rescaled sections along ``dpoints`` (off-center only)."""
        pts = np.atleast_2d(points)
        dps = np.atleast_2d(dpoints)
        cols = []
        for s in self.sections:
            num = s.to_numeric()
            cols.append(sum(num.diff(v).eval(pts) * dps[:, v] for v in range(3)))
        return np.stack(cols, axis=1) * self.scales()[None, :]


def _pair_matrix(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``sum_nodes w v_i conj(v_k)`` with a fixed (non-BLAS) summation order."""
    n = values.shape[1]
    out = np.empty((n, n), dtype=np.complex128)
    wv = values * weights[:, None]
    conj = values.conj()
    for i in range(n):
        out[i] = np.sum(wv[:, i:i + 1] * conj, axis=0)
    return 0.5 * (out + out.conj().T)


def gram(fam: Family, basis: Filtration, t, grids: QuadratureGrid | Sequence[QuadratureGrid] | None = None,
         resolution: int = 64, rescale: bool = True) -> GramMatrix:
    """Gram matrix of the central graded basis on the fiber over ``t``.

    Off-center entries are ``|t|^{-ord0_i - ord0_k} int h(s_i, s_k)`` (the
    rescaling can be switched off for comparisons).  At CENTRAL each graded
    block is integrated with the limit pairing of its level and
    cross-block entries are exactly zero.
    """
    t = fiber_id(t)
    sections = basis.sections
    m = basis.space.m
    if t is CENTRAL:
        if grids is None:
            grids = central_grids(fam, resolution)
        if isinstance(grids, QuadratureGrid):
            grids = [grids]
        if len(grids) != len(fam.components):
            raise GridComponentMismatch(f"{len(grids)} grids for {len(fam.components)} components")
        for j, (comp, grid) in enumerate(zip(fam.components, grids)):
            if not _same_curve(grid, comp.poly):
                raise GridComponentMismatch(f"grid {j} is not built on component {comp.poly}")
        g = GramMatrix(t=t, m=m, entries=np.zeros((0, 0)), exponents=basis.exponents,
                       sections=sections, blocks=basis.blocks, fam=fam)
        n = len(sections)
        entries = np.zeros((n, n), dtype=np.complex128)
        blocks = np.array(basis.blocks)
        for j, (comp, grid) in enumerate(zip(fam.components, grids)):
            vals = g.section_values(grid.points, j)
            entries += comp.multiplicity * _pair_matrix(vals, grid.weight)
        entries[blocks[:, None] != blocks[None, :]] = 0.0
    else:
        if grids is None:
            grids = fiber_grid(fam, t, resolution)
        if not isinstance(grids, QuadratureGrid):
            (grids,) = grids
        exps = basis.exponents if rescale else tuple(Fraction(0) for _ in sections)
        g = GramMatrix(t=t, m=m, entries=np.zeros((0, 0)), exponents=exps, sections=sections,
                       blocks=basis.blocks, fam=fam, curve=fiber_poly(fam, t))
        entries = _pair_matrix(g.section_values(grids.points), grids.weight)
    out = GramMatrix(t=g.t, m=m, entries=entries, exponents=g.exponents, sections=sections,
                     blocks=g.blocks, fam=fam, curve=g.curve)
    check_positive_definite(out.entries)
    return out


def curve_gram(curve, m: int, grid: QuadratureGrid | None = None, resolution: int = 64,
               sections: Sequence[HomogPoly] | None = None) -> GramMatrix:
    """Fubini-Study Gram matrix on a plain reduced curve.

    ``sections`` default to the degree-m monomials not divisible by the
    leading monomial of the curve.
    """
    exact = curve if isinstance(curve, HomogPoly) else None
    num = curve.to_numeric() if isinstance(curve, HomogPoly) else curve
    if sections is None:
        if exact is None:
            raise ValueError("default sections need an exact curve polynomial")
        lm = exact.leading_monomial
        sections = [HomogPoly.monomial(mono) for mono in polyalg.monomials(m)
                    if not all(a >= b for a, b in zip(mono, lm))]
    if grid is None:
        grid = build_quadrature(num, resolution)
    sections = tuple(sections)
    g = GramMatrix(t=1.0, m=m, entries=np.zeros((0, 0)), exponents=tuple(Fraction(0) for _ in sections),
                   sections=sections, blocks=tuple(0 for _ in sections), curve=num)
    entries = _pair_matrix(g.section_values(grid.points), grid.weight)
    out = GramMatrix(t=1.0, m=m, entries=entries, exponents=g.exponents, sections=sections,
                     blocks=g.blocks, curve=num)
    check_positive_definite(entries)
    return out


# ------------------------------------------------------- orthonormalization
def _equilibrate(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = np.real(np.diag(G))
    if np.any(d <= 0):
        raise NotPositiveDefinite("non-positive diagonal entry in Gram matrix")
    D = 1.0 / np.sqrt(d)
    return D[:, None] * G * D[None, :], D


def check_positive_definite(G: np.ndarray) -> None:
    if not np.allclose(G, G.conj().T, atol=1e-10 * max(1.0, np.abs(G).max())):
        raise NotPositiveDefinite("Gram matrix is not Hermitian")
    Ge, _ = _equilibrate(G)
    ev = np.linalg.eigvalsh(Ge)
    if ev[0] <= PD_TOL * ev[-1]:
        raise NotPositiveDefinite(f"Gram eigenvalue ratio {ev[0] / ev[-1]:.3e} below {PD_TOL}")


def _orthonormalize_block(G: np.ndarray, method: str) -> np.ndarray:
    Ge, D = _equilibrate(G)
    if method == "eigen":
        lam, U = np.linalg.eigh(Ge)
        if lam[0] <= PD_TOL * lam[-1]:
            raise NotPositiveDefinite(f"Gram eigenvalue ratio {lam[0] / lam[-1]:.3e} below {PD_TOL}")
        # symmetric choice G^{-1/2}: unique, so degenerate spectra give a reproducible basis
        B = (U / np.sqrt(lam)[None, :]) @ U.conj().T
    elif method == "triangular":
        try:
            L = np.linalg.cholesky(Ge)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite("Cholesky factorisation failed") from exc
        B = np.linalg.solve(L, np.eye(len(G)))
    else:
        raise ValueError(f"unknown orthonormalization method {method!r}")
    return B * D[None, :]


@dataclass(frozen=True, eq=False)
class BergmanBasis:
    """``B`` with ``hat s_i = sum_k B_ik s_k`` orthonormal for ``gram``."""

    B: np.ndarray
    gram: GramMatrix
    method: str

    @property
    def t(self):
        return self.gram.t

    @property
    def m(self) -> int:
        return self.gram.m

    def values(self, points, j: int | None = None) -> np.ndarray:
        return self.gram.section_values(points, j) @ self.B.T

    def kernel(self, points, j: int | None = None) -> np.ndarray:
        """Vectorised ``rho`` without point validation."""
        v = self.values(points, j)
        return np.sum(np.abs(v) ** 2, axis=1)

    def residual(self) -> float:
        G = self.gram.entries
        return float(np.abs(self.B @ G @ self.B.conj().T - np.eye(len(G))).max())


def orthonormalize(g: GramMatrix, method: str = "eigen") -> BergmanBasis:
    """Orthonormal basis; block by block on the central fiber."""
    G = g.entries
    B = np.zeros_like(G, dtype=np.complex128)
    blocks = np.array(g.blocks) if g.is_central else np.zeros(g.size, dtype=int)
    for b in sorted(set(blocks.tolist())):
        idx = np.flatnonzero(blocks == b)
        B[np.ix_(idx, idx)] = _orthonormalize_block(G[np.ix_(idx, idx)], method)
    return BergmanBasis(B=B, gram=g, method=method)


def bergman_basis(fam: Family, m: int, t, resolution: int = 64, method: str = "eigen",
                  complement: str = "greedy", rescale: bool = True, grids=None) -> BergmanBasis:
    filt = central_filtration(fam, m, complement)
    return orthonormalize(gram(fam, filt, t, grids=grids, resolution=resolution, rescale=rescale), method)


def curve_bergman_basis(curve, m: int, resolution: int = 64, method: str = "eigen",
                        grid: QuadratureGrid | None = None) -> BergmanBasis:
    return orthonormalize(curve_gram(curve, m, grid=grid, resolution=resolution), method)


# -------------------------------------------------------------------- kernel
def _central_component(fam: Family, p: np.ndarray) -> int:
    vals = [abs(c.poly.to_numeric().eval(p)) for c in fam.components]
    on = [j for j, v in enumerate(vals) if v <= ON_CURVE_TOL]
    if not on:
        raise PointOffFiber(f"point {p} is not on the central fiber")
    if len(on) > 1 or any(v <= BASE_POINT_TOL for k, v in enumerate(vals) if k != on[0]):
        raise BadBasePoint(f"point {p} is not on the regular part of a single component")
    return on[0]


def rho(basis: BergmanBasis, x, j: int | None = None) -> float:
    """``sum_i |hat s_i(x)|^2`` at a point of the fiber of ``basis``."""
    p = unit(x)
    g = basis.gram
    if g.is_central:
        found = _central_component(g.fam, p)
        if j is not None and j != found:
            raise BadBasePoint(f"point lies on component {found}, not {j}")
        j = found
    else:
        curve = g.curve
        if abs(curve.eval(p)) > ON_CURVE_TOL:
            raise PointOffFiber(f"|F_t(x)| = {abs(curve.eval(p)):.2e} at unit norm")
    return float(basis.kernel(p, j)[0])


def kernel_on_grid(basis: BergmanBasis, grid: QuadratureGrid, j: int | None = None) -> np.ndarray:
    return basis.kernel(grid.points, j)


def total_mass(basis: BergmanBasis, grids) -> float:
    """``int rho omega`` (with multiplicity at CENTRAL); equals the dimension."""
    if basis.gram.is_central:
        fam = basis.gram.fam
        return math.fsum(c.multiplicity * g.integrate(basis.kernel(g.points, j))
                         for j, (c, g) in enumerate(zip(fam.components, grids)))
    grid = grids if isinstance(grids, QuadratureGrid) else grids[0]
    return grid.integrate(basis.kernel(grid.points))


@dataclass(frozen=True)
class ProbeRow:
    t: complex
    rho_mean: float
    rho_central: float
    gap: float


def continuity_probe(fam: Family, m: int, x0, t_grid: Sequence, resolution: int = 64,
                     method: str = "eigen") -> list[ProbeRow]:
    """Mean kernel over the tracked preimages of ``x0`` against the central value."""
    from .fibergeom import track_points

    central = rho(bergman_basis(fam, m, CENTRAL, resolution, method), x0)
    rows = []
    for t in t_grid:
        t = fiber_id(t)
        pts = track_points(fam, x0, t)
        basis = bergman_basis(fam, m, t, resolution, method)
        mean = float(np.mean([rho(basis, p) for p in pts]))
        rows.append(ProbeRow(t=complex(t), rho_mean=mean, rho_central=central, gap=abs(mean - central)))
    return rows


# ----------------------------------------------------------------------- phi
def phi_from_basis(basis: BergmanBasis, grids) -> float:
    m = basis.m
    if basis.gram.is_central:
        fam = basis.gram.fam
        parts = []
        for j, (c, g) in enumerate(zip(fam.components, grids)):
            r = np.maximum(basis.kernel(g.points, j), LOG_FLOOR)
            parts.append(c.multiplicity * g.integrate(np.abs(np.log(r))))
        return math.fsum(parts) / m
    grid = grids if isinstance(grids, QuadratureGrid) else grids[0]
    r = np.maximum(basis.kernel(grid.points), LOG_FLOOR)
    return grid.integrate(np.abs(np.log(r))) / m


def phi(fam: Family, m: int, t, resolution: int = 64, method: str = "eigen") -> float:
    """``(1/m) int |log rho_m| omega`` over the fiber (with multiplicity at CENTRAL)."""
    if m < 1:
        raise ValueError("phi needs m >= 1")
    t = fiber_id(t)
    grids = central_grids(fam, resolution) if t is CENTRAL else fiber_grid(fam, t, resolution)
    basis = bergman_basis(fam, m, t, resolution, method, grids=grids)
    return phi_from_basis(basis, grids)


# ------------------------------------------------------------ current pairing
def _second_derivative_step(grid: QuadratureGrid) -> np.ndarray:
    """``min(FD_STEP, |y'/y''|/4)`` per node, shrinking the stencil near branch points."""
    work = grid.curve.compose_linear(grid.frame)
    W = grid.working
    uvar = np.where(grid.chart == 0, 0, 2)
    yp = grid.dworking[:, 1]
    fy = work.diff(1).eval(W)
    fyy = work.diff(1).diff(1).eval(W)
    fuu = np.where(uvar == 0, work.diff(0).diff(0).eval(W), work.diff(2).diff(2).eval(W))
    fuy = np.where(uvar == 0, work.diff(0).diff(1).eval(W), work.diff(2).diff(1).eval(W))
    ypp = -(fuu + 2 * fuy * yp + fyy * yp ** 2) / fy
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.abs(yp) / np.abs(ypp) / 4
    scale = np.where(np.isfinite(scale), scale, FD_STEP)
    return np.minimum(FD_STEP, scale)


def laplacian(alpha: Callable[[np.ndarray], np.ndarray], grid: QuadratureGrid) -> np.ndarray:
    """Five-point Laplacian of ``alpha`` in each node's chart coordinate."""
    h = _second_derivative_step(grid)
    centre = np.asarray(alpha(grid.points), dtype=float)
    acc = -4.0 * centre
    for direction in (1, -1, 1j, -1j):
        acc = acc + np.asarray(alpha(local_points(grid, direction * h)), dtype=float)
    return acc / h ** 2


def ddc_weights(alpha, grid: QuadratureGrid) -> np.ndarray:
    """Node weights of ``dd^c alpha = (i/2pi) ddbar alpha`` restricted to the fiber."""
    return grid.area / np.pi * laplacian(alpha, grid) / 4.0


def fs_current_pairing(fam: Family, m: int, t, alpha, resolution: int = 64,
                       method: str = "eigen", basis: BergmanBasis | None = None,
                       grid: QuadratureGrid | None = None) -> float:
    """``-(1/m) int log rho_m dd^c alpha`` on a smooth fiber.

    ``alpha`` maps ``(n, 3)`` unit-norm points to real values and must be
    invariant under multiplying a point by a phase.
    """
    t = fiber_id(t)
    if t is CENTRAL:
        raise ValueError("the current pairing is taken on smooth fibers")
    if grid is None:
        grid = fiber_grid(fam, t, resolution)
    if basis is None:
        basis = bergman_basis(fam, m, t, resolution, method, grids=grid)
    logr = np.log(np.maximum(basis.kernel(grid.points), LOG_FLOOR))
    return -math.fsum(logr * ddc_weights(alpha, grid)) / m


def fs_pullback_weights(basis: BergmanBasis, grid: QuadratureGrid) -> np.ndarray:
    """Node weights of the pulled-back current ``omega_{FS,m}`` of the orthonormal basis."""
    Z = grid.ambient
    dZ = grid.dambient
    S = basis.gram.section_values(Z / np.linalg.norm(Z, axis=1, keepdims=True))
    # section_values normalises; undo to keep S holomorphic in u
    S = S * (np.linalg.norm(Z, axis=1) ** basis.m)[:, None]
    dS = basis.gram.section_derivatives(Z, dZ)
    S = S @ basis.B.T
    dS = dS @ basis.B.T
    return _fs_density(S, dS) * grid.area


def current_pairing_by_parts(fam: Family, m: int, t, alpha, resolution: int = 64,
                             method: str = "eigen", basis: BergmanBasis | None = None,
                             grid: QuadratureGrid | None = None) -> float:
    """``int alpha (omega - omega_{FS,m}/m)``: the pairing with derivatives moved off alpha."""
    t = fiber_id(t)
    if grid is None:
        grid = fiber_grid(fam, t, resolution)
    if basis is None:
        basis = bergman_basis(fam, m, t, resolution, method, grids=grid)
    a = np.asarray(alpha(grid.points), dtype=float)
    diff = grid.weight - fs_pullback_weights(basis, grid) / m
    return math.fsum(a * diff)


def current_total_mass(fam: Family, m: int, t, resolution: int = 64, method: str = "eigen",
                       basis: BergmanBasis | None = None, grid: QuadratureGrid | None = None) -> float:
    """``int (omega - omega_{FS,m}/m)`` over the closed fiber; zero by Stokes."""
    return current_pairing_by_parts(fam, m, t, lambda p: np.ones(len(p)), resolution, method, basis, grid)
