"""Fubini-Study data, curve quadrature, fiber tracking and the limit pairings.

The Fubini-Study form is normalised as ``omega = (i/2pi) ddbar log|Z|^2`` so
that a line has volume 1 and a degree-d curve has volume d.  The metric on
``O(m)`` is ``|s(Z)|^2 / |Z|^{2m}``; all evaluation points are kept at unit
norm so that this is just ``|s(Z)|^2``.

Quadrature projects the curve away from one coordinate point onto P^1,
covers P^1 by the two discs ``|u| <= 1`` and lifts every base sample to all
branches of the curve above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import polyalg
from .errors import (
    BadBasePoint,
    CurveDegenerate,
    DegreeMismatch,
    GridComponentMismatch,
    OrderMismatch,
    ResolutionTooLow,
    TrackingFailed,
)
from .family import CENTRAL, Family, fiber_id, fiber_poly
from .polyalg import HomogPoly, NumPoly

MIN_RESOLUTION = 8
DISCRIMINANT_SKIP = 1e-8
ON_CURVE_TOL = 1e-9
BASE_POINT_TOL = 1e-6


def unit(points) -> np.ndarray:
    p = np.asarray(points, dtype=np.complex128)
    return p / np.linalg.norm(p, axis=-1, keepdims=True)


def _numeric(p) -> NumPoly:
    return p.to_numeric() if isinstance(p, HomogPoly) else p


def fs_norm(s: HomogPoly, point, m: int) -> float:
    """``|s|^2_{FS,m}`` at ``point`` (normalised to unit length first)."""
    if s.degree != m:
        raise DegreeMismatch(f"section of degree {s.degree} used as a section of O({m})")
    p = unit(point)
    return float(abs(s.eval(p)) ** 2)


# ---------------------------------------------------------------- quadrature
@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and Fubini-Study weights realising ``int_curve (.) omega``.

    ``points`` are unit-norm ambient points; ``working``/``dworking`` hold
    the unnormalised chart lift ``W(u)`` and ``dW/du`` in the working frame
    (``ambient = frame @ working``), which the current computations need.
    """

    curve: NumPoly
    resolution: int
    frame: np.ndarray
    points: np.ndarray
    chart: np.ndarray
    coord: np.ndarray
    branch: np.ndarray
    weight: np.ndarray
    area: np.ndarray
    working: np.ndarray
    dworking: np.ndarray
    skipped: int

    def __len__(self):
        return len(self.weight)

    @property
    def nodes(self):
        return list(zip(self.points, self.coord, self.weight))

    @property
    def volume(self) -> float:
        return math.fsum(self.weight)

    @property
    def ambient(self) -> np.ndarray:
        """Unnormalised ambient lift ``frame @ W(u)`` per node."""
        return self.working @ self.frame.T

    @property
    def dambient(self) -> np.ndarray:
        return self.dworking @ self.frame.T

    def integrate(self, values) -> complex | float:
        vals = np.broadcast_to(np.asarray(values), self.weight.shape)
        if np.iscomplexobj(vals):
            re = math.fsum(self.weight * vals.real)
            im = math.fsum(self.weight * vals.imag)
            return complex(re, im)
        return math.fsum(self.weight * vals)

    def to_rows(self):
        """CSV rows ``(chart, coord_re, coord_im, branch, weight)``."""
        return [(int(c), float(u.real), float(u.imag), int(b), float(w))
                for c, u, b, w in zip(self.chart, self.coord, self.branch, self.weight)]


def _permutation_frame(curve: NumPoly) -> np.ndarray | None:
    d = curve.degree
    scale = np.abs(curve.coeffs).max()
    for v in (1, 0, 2):
        mono = [0, 0, 0]
        mono[v] = d
        if abs(curve.coefficient(tuple(mono))) > 1e-12 * scale:
            others = [k for k in range(3) if k != v]
            frame = np.zeros((3, 3))
            frame[others[0], 0] = 1.0
            frame[v, 1] = 1.0
            frame[others[1], 2] = 1.0
            return frame
    return None


def rotation_frame(a: float = 0.3, b: float = 0.7, c: float = 1.1) -> np.ndarray:
    """Real orthogonal matrix from three Euler angles."""
    ca, sa, cb, sb, cc, sc = math.cos(a), math.sin(a), math.cos(b), math.sin(b), math.cos(c), math.sin(c)
    rz1 = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]])
    ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    rz2 = np.array([[cc, -sc, 0], [sc, cc, 0], [0, 0, 1]])
    return rz1 @ ry @ rz2


def _polar_grid(resolution: int):
    """Nodes and area weights on the unit disc.

    Gauss-Legendre in ``s`` with ``r = s^2`` (so a ``1/|u|`` density at the
    centre becomes smooth) times the uniform rule in the angle.
    """
    s, ws = np.polynomial.legendre.leggauss(resolution)
    s = 0.5 * (s + 1.0)
    ws = 0.5 * ws
    n_theta = 2 * resolution
    theta = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    r = s ** 2
    radial_w = ws * 2 * s * r
    u = (r[:, None] * np.exp(1j * theta)[None, :]).reshape(-1)
    area = (radial_w[:, None] * np.full(n_theta, 2 * np.pi / n_theta)[None, :]).reshape(-1)
    return u, area


def _roots(coeffs: np.ndarray) -> np.ndarray:
    """All roots of ``sum_k coeffs[:, k] y^k`` (leading coefficient constant)."""
    n, d1 = coeffs.shape
    d = d1 - 1
    monic = coeffs / coeffs[:, d:d + 1]
    if d == 1:
        return -monic[:, :1]
    if d == 2:
        half = -0.5 * monic[:, 1]
        root = np.sqrt(half ** 2 - monic[:, 0])
        return np.stack([half + root, half - root], axis=1)
    comp = np.zeros((n, d, d), dtype=np.complex128)
    comp[:, 1:, :-1] = np.eye(d - 1)
    comp[:, :, -1] = -monic[:, :d]
    return np.linalg.eigvals(comp)


def _chart_coefficients(work: NumPoly, chart: int, u: np.ndarray) -> np.ndarray:
    """Coefficients in ``y`` of the curve restricted to chart ``chart`` over ``u``."""
    upow = 0 if chart == 0 else 2
    coeffs = np.zeros((len(u), work.degree + 1), dtype=np.complex128)
    for mono, c in zip(work.exps, work.coeffs):
        coeffs[:, mono[1]] += c * u ** int(mono[upow])
    return coeffs


BUMP_INNER = 0.2
CENTRE_TOL = 1e-9


def _bump(r: np.ndarray) -> np.ndarray:
    """Smooth cutoff: 1 for ``r <= BUMP_INNER``, 0 for ``r >= 1``."""
    x = np.clip((1.0 - np.asarray(r, dtype=float)) / (1.0 - BUMP_INNER), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def _polish_branch_point(work: NumPoly, chart: int, b: complex) -> complex:
    """Newton on ``F = F_y = 0`` in ``(u, y)``; left alone where that system is singular."""
    uvar = 0 if chart == 0 else 2
    ys = _roots(_chart_coefficients(work, chart, np.array([b])))[0]
    fy_poly = work.diff(1)
    y = ys[np.argmin(np.abs(fy_poly.eval(_chart_vectors(chart, np.full(len(ys), b), ys))))]
    fu_poly, fyy_poly, fuy_poly = work.diff(uvar), fy_poly.diff(1), fy_poly.diff(uvar)
    u0 = b
    for _ in range(8):
        W = _chart_vectors(chart, np.array([u0]), np.array([y]))
        f, fy = work.eval(W)[0], fy_poly.eval(W)[0]
        J = np.array([[fu_poly.eval(W)[0], fy], [fuy_poly.eval(W)[0], fyy_poly.eval(W)[0]]])
        if abs(np.linalg.det(J)) < 1e-10 * max(1.0, np.abs(J).max()) ** 2:
            return b
        du, dy = np.linalg.solve(J, [f, fy])
        u0, y = u0 - du, y - dy
        if abs(du) < 1e-15:
            break
    return u0 if abs(u0 - b) < 1e-3 else b


def _branch_points(work: NumPoly, chart: int) -> np.ndarray | None:
    """Finite critical values of the projection in chart coordinates.

    The discriminant ``lead^{2d-2} prod_{i<k} (y_i - y_k)^2`` is a polynomial
    in ``u`` of degree at most ``d(d-1)``; it is recovered by FFT from samples
    on the unit circle.  ``None`` signals an identically vanishing
    discriminant (repeated factor).
    """
    d = work.degree
    if d == 1:
        return np.zeros(0, dtype=np.complex128)
    deg = d * (d - 1)
    n = max(16, 2 * (deg + 1))
    z = np.exp(2j * np.pi * np.arange(n) / n)
    ys = _roots(_chart_coefficients(work, chart, z))
    lead = work.coefficient((0, d, 0))
    iu, ik = np.triu_indices(d, 1)
    disc = np.prod((ys[:, iu] - ys[:, ik]) ** 2, axis=1)
    scale = (1.0 + np.abs(ys).max()) ** deg
    if np.abs(disc).max() <= 1e-12 * scale:
        return None
    coeffs = (np.fft.fft(disc * lead ** (2 * d - 2)) / n)[:deg + 1]
    coeffs = coeffs / np.abs(coeffs).max()
    while len(coeffs) > 1 and abs(coeffs[-1]) <= 1e-10:
        coeffs = coeffs[:-1]
    if len(coeffs) <= 1:
        return np.zeros(0, dtype=np.complex128)
    cand = np.roots(coeffs[::-1])
    # merge the numerically split copies of multiple roots
    merged: list[list[complex]] = []
    for c in cand[np.argsort(np.abs(cand), kind="stable")]:
        for group in merged:
            if abs(group[0] - c) < 1e-4 * max(1.0, abs(c)):
                group.append(c)
                break
        else:
            merged.append([c])
    pts = [np.mean(g) for g in merged]
    return np.array([_polish_branch_point(work, chart, b) if len(g) == 1 else b
                     for b, g in zip(pts, merged)], dtype=np.complex128)


def _patches(work: NumPoly) -> list[tuple[int, complex, float]] | None:
    """``(chart, centre, radius)`` of the polar patches around branch points."""
    found = []
    bp_a = _branch_points(work, 0)
    bp_b = _branch_points(work, 1)
    if bp_a is None or bp_b is None:
        return None
    for b in bp_a:
        if abs(b) <= 1.0:
            found.append((0, complex(b)))
    for b in bp_b:
        if abs(b) < 1.0:
            if b != 0 and any(c == 0 and abs(1 / b - a) < 1e-6 for c, a in found):
                continue
            found.append((1, complex(b)))

    def in_chart(chart, c, b):
        if c == chart:
            return b
        return np.inf if b == 0 else 1 / b

    out = []
    for chart, b in found:
        if abs(b) <= CENTRE_TOL:
            # the r = s^2 disc rule already absorbs a branch point at the chart centre
            continue
        dists = [abs(in_chart(chart, c, a) - b) for c, a in found if (c, a) != (chart, b)]
        radius = min([0.5] + [0.45 * x for x in dists if np.isfinite(x)])
        out.append((chart, b, radius))
    return out


def _partition_factor(chart: int, u: np.ndarray, patches, skip: int | None = None) -> np.ndarray:
    """``1 - sum chi_p`` at base nodes of ``chart`` (or ``chi_skip`` alone)."""
    if skip is not None:
        pc, b, radius = patches[skip]
        return _bump(np.abs(u - b) / radius)
    out = np.ones(len(u))
    for pc, b, radius in patches:
        if pc == chart:
            v = u
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                v = np.where(u == 0, np.inf, 1 / np.where(u == 0, 1, u))
        out -= _bump(np.abs(v - b) / radius)
    return out


def build_quadrature(curve, resolution: int = 64, frame: np.ndarray | None = None) -> QuadratureGrid:
    """Branched-projection quadrature on a reduced plane curve.

    ``frame`` is a unitary matrix with ``ambient = frame @ working``; the
    curve is solved for the middle working coordinate over the two charts
    ``W = (u, y, 1)`` and ``W = (1, y, u)``, ``|u| <= 1``.  By default the
    frame is the coordinate permutation that makes the solved variable
    appear to full degree.

    The base P^1 is integrated with a smooth partition of unity: a polar
    patch centred on every branch point (where the density has a
    ``1/|u - b|`` singularity) and the two chart discs for the remainder.
    """
    curve = _numeric(curve)
    if resolution < MIN_RESOLUTION:
        raise ResolutionTooLow(f"resolution {resolution} < {MIN_RESOLUTION}")
    if curve.is_zero() or curve.degree == 0:
        raise CurveDegenerate("curve must have positive degree")
    if frame is None:
        frame = _permutation_frame(curve)
        if frame is None:
            frame = rotation_frame()
    frame = np.asarray(frame)
    if not np.allclose(frame.conj().T @ frame, np.eye(3), atol=1e-12):
        raise ValueError("frame must be unitary")
    work = curve.compose_linear(frame)
    d = work.degree
    lead = work.coefficient((0, d, 0))
    if abs(lead) <= 1e-12 * np.abs(work.coeffs).max():
        raise ValueError("frame puts the projection centre on the curve")
    patches = _patches(work)
    if patches is None:
        raise CurveDegenerate("the discriminant vanishes identically: the curve has a repeated factor")

    disc_u, disc_area = _polar_grid(resolution)
    base = {0: [], 1: []}
    for chart in (0, 1):
        factor = _partition_factor(chart, disc_u, patches)
        keep = factor != 0
        base[chart].append((disc_u[keep], disc_area[keep] * factor[keep]))
    for k, (chart, b, radius) in enumerate(patches):
        u = b + radius * disc_u
        factor = _partition_factor(chart, u, patches, skip=k)
        keep = factor != 0
        base[chart].append((u[keep], radius ** 2 * disc_area[keep] * factor[keep]))

    pieces = []
    skipped = 0
    total = 0
    for chart in (0, 1):
        u = np.concatenate([p[0] for p in base[chart]])
        area = np.concatenate([p[1] for p in base[chart]])
        piece, nskip = _lift(work, chart, u, area)
        pieces.extend(piece)
        skipped += nskip
        total += len(u) * d
    if skipped > total // 2:
        raise CurveDegenerate(
            f"{skipped} of {total} lifted samples sit on the discriminant: the curve has a repeated factor")
    cat = {k: np.concatenate([p[k] for p in pieces]) for k in pieces[0]}
    points = cat["working"] @ frame.T
    points = points / np.linalg.norm(points, axis=1, keepdims=True)
    return QuadratureGrid(curve=curve, resolution=resolution, frame=frame, points=points,
                          chart=cat["chart"], coord=cat["coord"], branch=cat["branch"],
                          weight=cat["weight"], area=cat["area"], working=cat["working"],
                          dworking=cat["dworking"], skipped=skipped)


def _lift(work: NumPoly, chart: int, u: np.ndarray, area: np.ndarray):
    """Lift base nodes to every branch; returns node dictionaries and the skip count."""
    d = work.degree
    upow_index = 0 if chart == 0 else 2
    dy = work.diff(1)
    du_poly = work.diff(upow_index)
    roots = _roots(_chart_coefficients(work, chart, u))
    pieces = []
    skipped = 0
    for branch in range(d):
        y = roots[:, branch]
        W = _chart_vectors(chart, u, y)
        # one Newton step on the univariate equation
        with np.errstate(divide="ignore", invalid="ignore"):
            y = y - work.eval(W) / dy.eval(W)
        W = _chart_vectors(chart, u, y)
        Wn = W / np.linalg.norm(W, axis=1, keepdims=True)
        keep = np.abs(dy.eval(Wn)) >= DISCRIMINANT_SKIP
        keep &= np.isfinite(y)
        skipped += int((~keep).sum())
        with np.errstate(divide="ignore", invalid="ignore"):
            yp = -du_poly.eval(W) / dy.eval(W)
        dW = np.zeros_like(W)
        dW[:, upow_index] = 1.0
        dW[:, 1] = yp
        dens = _fs_density(W[keep], dW[keep])
        pieces.append(dict(
            chart=np.full(keep.sum(), chart), coord=u[keep], branch=np.full(keep.sum(), branch),
            weight=dens * area[keep], area=area[keep], working=W[keep], dworking=dW[keep]))
    return pieces, skipped


def _chart_vectors(chart: int, u: np.ndarray, y: np.ndarray) -> np.ndarray:
    one = np.ones_like(u)
    if chart == 0:
        return np.stack([u, y, one], axis=1)
    return np.stack([one, y, u], axis=1)


def _fs_density(W: np.ndarray, dW: np.ndarray) -> np.ndarray:
    """Area density of ``(i/2pi) ddbar log|W(u)|^2`` for a holomorphic curve ``W(u)``."""
    n2 = np.einsum("ij,ij->i", W, W.conj()).real
    d2 = np.einsum("ij,ij->i", dW, dW.conj()).real
    cross = np.einsum("ij,ij->i", dW, W.conj())
    return (n2 * d2 - np.abs(cross) ** 2) / (np.pi * n2 ** 2)


def local_points(grid: QuadratureGrid, du: complex, index: np.ndarray | None = None,
                 newton_steps: int = 6) -> np.ndarray:
    """Unit-norm points at chart coordinate ``u + du`` on the branch of each node.

    The branch is followed by a first-order prediction and Newton polishing.
    """
    idx = np.arange(len(grid)) if index is None else np.asarray(index)
    work = grid.curve.compose_linear(grid.frame)
    dy = work.diff(1)
    W = grid.working[idx].copy()
    dW = grid.dworking[idx]
    chart = grid.chart[idx]
    uidx = np.where(chart == 0, 0, 2)
    du = np.broadcast_to(np.asarray(du, dtype=np.complex128), W[:, 0].shape)
    rows = np.arange(len(idx))
    W[rows, uidx] = W[rows, uidx] + du
    W[:, 1] = W[:, 1] + dW[:, 1] * du
    for _ in range(newton_steps):
        f = work.eval(W)
        fy = dy.eval(W)
        W[:, 1] = W[:, 1] - f / fy
    pts = W @ grid.frame.T
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def integrate_pair(s: HomogPoly, s2: HomogPoly, grid: QuadratureGrid, m: int) -> complex:
    """``sum_nodes w * s(p) * conj(s2(p))`` with compensated summation."""
    if s.degree != m or s2.degree != m:
        raise DegreeMismatch(f"sections of degrees {s.degree}, {s2.degree} paired as O({m})")
    a = s.eval(grid.points)
    b = s2.eval(grid.points)
    return grid.integrate(a * np.conj(b))


def central_grids(fam: Family, resolution: int = 64) -> list[QuadratureGrid]:
    return [build_quadrature(comp.poly, resolution) for comp in fam.components]


def fiber_grid(fam: Family, t, resolution: int = 64, frame=None) -> QuadratureGrid:
    return build_quadrature(fiber_poly(fam, t), resolution, frame=frame)


def _same_curve(grid: QuadratureGrid, poly: HomogPoly) -> bool:
    target = poly.to_numeric()
    if target.degree != grid.curve.degree:
        return False
    a, b = grid.curve.terms(), target.terms()
    if set(a) != set(b):
        return False
    ratios = {m: a[m] / b[m] for m in a}
    first = next(iter(ratios.values()))
    return all(abs(r - first) <= 1e-12 * abs(first) for r in ratios.values())


def integrate_central(fam: Family, integrand: Callable[[np.ndarray, int], np.ndarray],
                      grids: Sequence[QuadratureGrid]) -> float:
    """``sum_j m_j * int_{Y_j} integrand``; ``integrand(points, j)`` returns node values."""
    if len(grids) != len(fam.components):
        raise GridComponentMismatch(f"{len(grids)} grids for {len(fam.components)} components")
    total = []
    for j, (comp, grid) in enumerate(zip(fam.components, grids)):
        if not _same_curve(grid, comp.poly):
            raise GridComponentMismatch(f"grid {j} is not built on component {comp.poly}")
        vals = np.real_if_close(np.asarray(integrand(grid.points, j)))
        total.append(comp.multiplicity * grid.integrate(vals))
    return math.fsum(np.real(total))


# ------------------------------------------------------------ point tracking
def _locate(fam: Family, x0) -> tuple[np.ndarray, int]:
    p = unit(x0)
    vals = [abs(c.poly.to_numeric().eval(p)) for c in fam.components]
    on = [j for j, v in enumerate(vals) if v <= ON_CURVE_TOL]
    if len(on) != 1:
        raise BadBasePoint(f"point {x0} lies on {len(on)} central components")
    j = on[0]
    if any(v <= BASE_POINT_TOL for k, v in enumerate(vals) if k != j):
        raise BadBasePoint(f"point {x0} is too close to another component")
    if abs(fam.F1.to_numeric().eval(p)) <= BASE_POINT_TOL:
        raise BadBasePoint(f"F1 vanishes at {x0}")
    return p, j


def normal_direction(g: HomogPoly, x0) -> tuple[np.ndarray, np.ndarray]:
    """Affine base point (largest coordinate set to 1) and unit normal to ``g = 0``."""
    p = unit(x0)
    k = int(np.argmax(np.abs(p)))
    a = p / p[k]
    gn = g.to_numeric()
    grad = np.array([gn.diff(v).eval(a) for v in range(3)])
    grad[k] = 0.0
    norm = np.linalg.norm(grad)
    if norm == 0:
        raise BadBasePoint(f"{g} is singular at {x0}")
    return a, grad.conj() / norm


def track_points(fam: Family, x0, t, j: int | None = None) -> np.ndarray:
    """The ``m_j`` points of ``X_t`` near ``x0`` along the normal line to ``Y_j``."""
    t = fiber_id(t)
    p, found = _locate(fam, x0)
    if j is not None and j != found:
        raise BadBasePoint(f"point lies on component {found}, not {j}")
    j = found
    mult = fam.components[j].multiplicity
    a, nu = normal_direction(fam.components[j].poly, p)
    F = fiber_poly(fam, t)
    grad = [F.diff(v) for v in range(3)]

    def phi(z):
        return F.eval(a[None, :] + np.atleast_1d(z)[:, None] * nu[None, :])

    n = 2 * (F.degree + 1)
    zs = np.exp(2j * np.pi * np.arange(n) / n)
    coeffs = np.fft.fft(phi(zs)) / n
    coeffs = coeffs[:F.degree + 1]
    while len(coeffs) > 1 and abs(coeffs[-1]) <= 1e-13 * np.abs(coeffs).max():
        coeffs = coeffs[:-1]
    roots = np.roots(coeffs[::-1]) if len(coeffs) > 1 else np.array([])
    roots = roots[np.argsort(np.abs(roots), kind="stable")]
    if len(roots) < mult:
        raise TrackingFailed(f"only {len(roots)} roots along the normal line, expected {mult}")
    near = roots[:mult]
    radius = np.abs(near).max()
    if radius > 1.0 or (len(roots) > mult and radius > 0.5 * abs(roots[mult])):
        raise TrackingFailed(f"|t| = {abs(t):.3g} too large: preimage cluster not isolated")
    out = []
    for z in near:
        for _ in range(30):
            q = a + z * nu
            val = F.eval(q)
            scale = np.linalg.norm(q) ** F.degree
            if abs(val) / scale <= 1e-13:
                break
            deriv = sum(grad[v].eval(q) * nu[v] for v in range(3))
            z = z - val / deriv
        q = a + z * nu
        q = q / np.linalg.norm(q)
        if abs(F.eval(q)) > 1e-12:
            raise TrackingFailed(f"Newton polish stalled at residual {abs(F.eval(q)):.2e}")
        out.append(q)
    return np.array(out)


# ---------------------------------------------------------- limit pairings
@lru_cache(maxsize=4096)
def _graded_factor(fam: Family, s: HomogPoly, alpha: Fraction, j: int):
    """``(q, num, den)`` with ``s = g_j^a q`` and ``v = num/den``, or ``None``.

    ``None`` means the weighted limit vanishes identically on ``Y_j`` (the
    order of ``s`` there exceeds ``alpha``).
    """
    comp = fam.components[j]
    a = alpha * comp.multiplicity
    val = polyalg.valuation(s, comp.poly)
    if val < a and val < comp.multiplicity:
        raise OrderMismatch(f"{s} has order {val}/{comp.multiplicity} < {alpha} along {comp.poly}")
    if a.denominator != 1 or val > a:
        return None
    q = polyalg.divide_exact(s, comp.poly ** int(a))
    num, den = fam.unit_factor_parts(j)
    return q.to_numeric(), num.to_numeric(), den.to_numeric()


def graded_values(fam: Family, s: HomogPoly, alpha, j: int, points) -> np.ndarray:
    """Complex values ``c`` with ``h_{0,alpha}(s) = |c|^2`` at unit-norm points of ``Y_j``.

    ``c = |v|^{-alpha} q`` where ``s = g_j^{alpha m_j} q`` and ``t = g_j^{m_j} v``
    on the total space; the combination is invariant under rescaling the
    point, matching ``|t|^{-2 alpha} |s|^2``.
    """
    alpha = Fraction(alpha)
    pts = unit(np.atleast_2d(points))
    parts = _graded_factor(fam, s, alpha, j)
    if parts is None:
        return np.zeros(len(pts), dtype=np.complex128)
    q, num, den = parts
    if alpha == 0:
        return q.eval(pts)
    with np.errstate(divide="ignore"):
        weight = (np.abs(den.eval(pts)) / np.abs(num.eval(pts))) ** float(alpha)
    return weight * q.eval(pts)


def _check_on_component(fam: Family, x0, j: int | None) -> tuple[np.ndarray, int]:
    p, found = _locate(fam, x0)
    if j is not None and j != found:
        raise BadBasePoint(f"point lies on component {found}, not {j}")
    return p, found


def h0_eval(fam: Family, s: HomogPoly, alpha, x0, j: int | None = None) -> float:
    """Limit pairing ``h_{0,alpha}(s)`` at a regular point ``x0`` of the central fiber."""
    p, j = _check_on_component(fam, x0, j)
    return float(abs(graded_values(fam, s, alpha, j, p)[0]) ** 2)


def pair_h0_eval(fam: Family, s: HomogPoly, s2: HomogPoly, alpha, x0, j: int | None = None) -> complex:
    """Hermitian form ``h_{0,alpha}(s, s2)`` by polarisation of :func:`h0_eval`."""
    p, j = _check_on_component(fam, x0, j)
    hs = h0_eval(fam, s, alpha, p, j)
    hs2 = h0_eval(fam, s2, alpha, p, j)
    plus = h0_eval(fam, s + s2, alpha, p, j)
    iplus = h0_eval(fam, s + s2.scale(polyalg.GaussRational(0, 1)), alpha, p, j)
    return 0.5 * ((plus - hs - hs2) + 1j * (iplus - hs - hs2))


def tracked_limit(fam: Family, s: HomogPoly, alpha, x0, t) -> float:
    """Mean of ``|t|^{-2 alpha} |s|^2_FS`` over the tracked preimages of ``x0``."""
    pts = track_points(fam, x0, t)
    vals = np.abs(s.eval(pts)) ** 2
    return float(np.mean(vals) * abs(complex(t)) ** (-2 * float(Fraction(alpha))))


def is_on_fiber(fam: Family, t, point, tol: float = ON_CURVE_TOL) -> bool:
    p = unit(point)
    if t is CENTRAL:
        return any(abs(c.poly.to_numeric().eval(p)) <= tol for c in fam.components)
    return abs(fiber_poly(fam, t).eval(p)) <= tol
