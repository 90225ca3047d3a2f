"""Moment-matching projections, decay experiments, and packing probes.

Lebesgue integrals use tensor Gauss-Legendre of order max(2*sigma, 8) per
cell; integrals against the measure use cube-mass times center-value at a
configurable depth, the only generic rule consistent with singular measures
(masses are exact; no density exists).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coarse import alpha_good_cubes, well_separated
from .cubes import DyadicCube, scaled_box
from .errors import SolverError, ValidationError
from .functions import (
    Bump,
    MappedBump,
    TestFunction,
    finite_difference_partial,
    multi_indices,
)
from .measures import DEFAULT_MAX_CUBES, MeasureModel
from .orders import EmbeddingParams, upper_order
from .partition import DEFAULT_MAX_CELLS, PartitionResult, build_partition
from .quadrature import composite_unit_integral, composite_unit_nodes, unit_rule
from .spectrum import closed_form_spectrum, empirical_spectrum

logger = logging.getLogger(__name__)


def polynomial_space_dim(m: int, sigma: int) -> int:
    """Dimension of degree <= sigma-1 polynomials in m variables."""
    return math.comb(m + sigma - 1, m)


def _default_npts(degree: int) -> int:
    return max(2 * (degree + 1), 8)


def _eval_monomials(exps: np.ndarray, coeffs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate sum_j coeffs[j] * y^exps[j] at unit-cell points y (N, m)."""
    y = np.atleast_2d(y)
    out = np.zeros(y.shape[0])
    for k, c in zip(exps, coeffs):
        if c == 0.0:
            continue
        term = np.full(y.shape[0], c)
        for i, e in enumerate(k):
            if e:
                term = term * y[:, i] ** e
        out += term
    return out


def moment_project(
    f, cube: DyadicCube, degree: int, npts: Optional[int] = None
) -> np.ndarray:
    """Coefficients of the unique degree <= `degree` moment match on a cube.

    The Gram system is assembled on the affinely rescaled unit cell (exact
    tensor-Hilbert entries), which keeps it well conditioned; the solution is
    simultaneously the L2(cube)-orthogonal projection of f.
    """
    if degree < 0:
        raise ValidationError("projection degree must be >= 0")
    m = cube.m
    npts = npts or _default_npts(degree)
    exps = np.array(multi_indices(m, degree), dtype=int)
    kdim = exps.shape[0]

    gram = np.empty((kdim, kdim))
    for a in range(kdim):
        for b in range(kdim):
            gram[a, b] = math.prod(
                1.0 / (int(exps[a, i]) + int(exps[b, i]) + 1) for i in range(m)
            )

    pts, wts = unit_rule(m, npts)
    side = float(cube.side)
    lower = np.array([float(x) for x in cube.lower()])
    fvals = np.asarray(f(lower + side * pts), dtype=float)
    if not np.all(np.isfinite(fvals)):
        raise SolverError(f"non-finite function values on cube {cube}")
    rhs = np.empty(kdim)
    for a in range(kdim):
        mono = np.ones(len(pts))
        for i, e in enumerate(exps[a]):
            if e:
                mono = mono * pts[:, i] ** e
        rhs[a] = float(np.dot(wts, mono * fvals))

    cond = np.linalg.cond(gram)
    logger.debug("moment gram: m=%d degree=%d cond=%.3e", m, degree, cond)
    return np.linalg.solve(gram, rhs)


@dataclass
class PiecewisePolynomial:
    """Per-cell polynomials over the rescaled-cell monomial basis."""

    cells: tuple[DyadicCube, ...]
    coeffs: np.ndarray  # (card, kdim)
    degree: int
    m: int

    def __post_init__(self):
        self.exponents = np.array(multi_indices(self.m, self.degree), dtype=int)
        self._by_key = {
            (c.level, c.index): i for i, c in enumerate(self.cells)
        }
        self.min_level = min(c.level for c in self.cells)
        self.max_level = max(c.level for c in self.cells)

    def cell_row(self, cube: DyadicCube) -> Optional[int]:
        """Row of the cell containing `cube` (by ancestor lookup), if any."""
        for level in range(self.min_level, min(cube.level, self.max_level) + 1):
            row = self._by_key.get((level, cube.ancestor(level).index))
            if row is not None:
                return row
        return None

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        """Pointwise values; zero outside the union of cells (half-open)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros(pts.shape[0])
        for j, x in enumerate(pts):
            for level in range(self.min_level, self.max_level + 1):
                scale = 1 << level
                idx = tuple(int(np.ceil(v * scale)) - 1 for v in x)
                if any(i < 0 or i >= scale for i in idx):
                    continue
                row = self._by_key.get((level, idx))
                if row is not None:
                    cell = self.cells[row]
                    side = float(cell.side)
                    lower = np.array([float(v) for v in cell.lower()])
                    y = (x - lower) / side
                    out[j] = _eval_monomials(self.exponents, self.coeffs[row], y)[0]
                    break
        return out


def piecewise_project(
    f, partition, degree: int, npts: Optional[int] = None
) -> PiecewisePolynomial:
    """Apply the moment projection cell by cell (linear in f)."""
    cells = tuple(partition.cells if isinstance(partition, PartitionResult) else partition)
    if not cells:
        raise ValidationError("piecewise projection needs at least one cell")
    m = cells[0].m
    coeffs = np.vstack([moment_project(f, cell, degree, npts) for cell in cells])
    return PiecewisePolynomial(cells=cells, coeffs=coeffs, degree=degree, m=m)


def lq_error(
    f,
    approx: PiecewisePolynomial,
    model: MeasureModel,
    q: float,
    depth: int,
    max_cubes: int = DEFAULT_MAX_CUBES,
) -> float:
    """||f - approx|| in L^q_nu by depth-cube masses at cube centers."""
    if depth < approx.max_level + 2:
        raise ValidationError(
            f"quadrature depth {depth} below max cell level + 2 = {approx.max_level + 2}"
        )
    positive = model.enumerate_positive(depth, max_cubes)
    if not positive:
        raise SolverError("measure has no positive cubes at quadrature depth")
    centers = np.array(
        [[float(x) for x in cube.center()] for cube, _ in positive], dtype=float
    )
    fvals = np.asarray(f(centers), dtype=float)

    avals = np.zeros(len(positive))
    rows: dict[int, list[int]] = {}
    for j, (cube, _) in enumerate(positive):
        row = approx.cell_row(cube)
        if row is not None:
            rows.setdefault(row, []).append(j)
    for row, idxs in rows.items():
        cell = approx.cells[row]
        side = float(cell.side)
        lower = np.array([float(v) for v in cell.lower()])
        y = (centers[idxs] - lower) / side
        avals[idxs] = _eval_monomials(approx.exponents, approx.coeffs[row], y)

    diff = np.abs(fvals - avals)
    if math.isinf(q):
        return float(diff.max())
    masses = np.array([float(mu) for _, mu in positive])
    return float(np.dot(masses, diff**q) ** (1.0 / q))


@dataclass(frozen=True)
class DecayResult:
    slope: Optional[float]
    predicted: float
    upper_bound_ok: Optional[bool]
    rows: tuple[tuple[float, int, float], ...]  # (t, card, error)
    degenerate: bool


def decay_experiment(
    f,
    model: MeasureModel,
    params: EmbeddingParams,
    t_sequence,
    depth_offset: int = 3,
    tol: float = 0.15,
    max_cells: int = DEFAULT_MAX_CELLS,
    max_cubes: int = DEFAULT_MAX_CUBES,
) -> DecayResult:
    """Fit the decay of the projection error against partition cardinality.

    For each threshold the adaptive partition is built, f is projected at
    degree sigma-1, and the L^q_nu error is measured; the fitted log-log
    slope is compared against the predicted upper Kolmogorov order.
    """
    if math.isinf(params.q):
        raise ValidationError("decay experiments need finite q")
    if depth_offset < 2:
        raise ValidationError("depth offset must be >= 2")
    curve = closed_form_spectrum(model) or empirical_spectrum(model, 10)
    predicted = upper_order(params, curve).upper["K"]

    rows = []
    xs, ys = [], []
    scale = 1.0
    for t in t_sequence:
        part = build_partition(model, params.rho, float(t), max_cells)
        if part.degenerate:
            continue
        approx = piecewise_project(f, part, params.sigma - 1)
        err = lq_error(
            f, approx, model, params.q, part.max_level + depth_offset, max_cubes
        )
        rows.append((float(t), part.card, err))
        scale = max(scale, err)
    valid = [(c, e) for _, c, e in rows if e > 1e-13 * scale]
    if not valid:
        return DecayResult(
            slope=None, predicted=predicted, upper_bound_ok=None,
            rows=tuple(rows), degenerate=True,
        )
    if len(valid) < 3:
        raise SolverError("decay fit needs >= 3 non-degenerate thresholds")
    xs = [math.log(c) for c, _ in valid]
    ys = [math.log(e) for _, e in valid]
    slope = float(np.polyfit(xs, ys, 1)[0])
    return DecayResult(
        slope=slope,
        predicted=predicted,
        upper_bound_ok=slope <= predicted + tol,
        rows=tuple(rows),
        degenerate=False,
    )


def _gradient_magnitude(u, sigma: int, m: int, fd_step: float):
    """sqrt(sum over |k| = sigma of (D^k u)^2) as a vectorized callable."""
    partials = []
    for k in multi_indices(m, sigma):
        if sum(k) != sigma:
            continue
        dk = u.partial(k) if isinstance(u, TestFunction) else None
        if dk is None:
            dk = finite_difference_partial(u, k, fd_step)
        partials.append(dk)

    def grad(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        acc = np.zeros(pts.shape[0])
        for dk in partials:
            vals = np.asarray(dk(pts), dtype=float)
            acc += vals * vals
        return np.sqrt(acc)

    return grad


def sobolev_seminorm(
    u,
    sigma: int,
    p: float,
    resolution: int = 5,
    npts: Optional[int] = None,
    m: Optional[int] = None,
) -> float:
    """||u||_{L^{sigma,p}}: the L^p norm of the order-sigma gradient field."""
    if resolution < 1:
        raise ValidationError("resolution must be >= 1")
    m = m or getattr(u, "m", None)
    if m is None:
        raise ValidationError("dimension m required for plain callables")
    npts = npts or _default_npts(sigma)
    grad = _gradient_magnitude(u, sigma, m, fd_step=0.5**resolution)
    if math.isinf(p):
        nodes = composite_unit_nodes(m, resolution, npts)
        return float(np.max(grad(nodes)))
    integral = composite_unit_integral(
        lambda pts: grad(pts) ** p, m, resolution, npts
    )
    return float(integral ** (1.0 / p))


def scaling_check(
    u,
    cube: DyadicCube,
    sigma: int,
    p: float,
    resolution: int = 4,
) -> float:
    """Ratio of ||u o phi_Q^{-1}||_{L^{sigma,p}(Q)} to its predicted value.

    The two sides are quadratured with different composite resolutions so
    the identity is checked rather than reproduced by construction.
    """
    m = cube.m
    side = float(cube.side)
    lower = np.array([float(x) for x in cube.lower()])
    npts = _default_npts(sigma)
    grad = _gradient_magnitude(u, sigma, m, fd_step=0.5 ** (resolution + 4))

    def grad_uq(pts):  # |grad_sigma (u o phi^{-1})|(x) = side^-sigma |grad_sigma u|(y)
        y = (np.atleast_2d(pts) - lower) / side
        return side ** (-sigma) * grad(y)

    if math.isinf(p):
        nodes_q = lower + side * composite_unit_nodes(m, resolution, npts)
        lhs = float(np.max(grad_uq(nodes_q)))
        rhs_norm = sobolev_seminorm(u, sigma, p, resolution + 1, npts + 3, m=m)
    else:
        integral = composite_unit_integral(
            lambda y: (side ** (-sigma) * grad(y)) ** p, m, resolution, npts
        ) * side**m
        lhs = float(integral ** (1.0 / p))
        rhs_norm = sobolev_seminorm(u, sigma, p, resolution + 1, npts + 3, m=m)
    rho_hat = sigma - (0.0 if math.isinf(p) else m / p)
    rhs = float(cube.volume) ** (-rho_hat / m) * rhs_norm
    return lhs / rhs


@dataclass(frozen=True)
class ProbeResult:
    n: int
    alpha: float
    family: tuple[DyadicCube, ...]
    ratio: float
    normalized_ratio: float
    sobolev_norm: float
    lq_norm: float
    operator_checks: tuple[tuple[float, float], ...]  # (||Q_n g||, 3^m ||g||)
    operator_bound_ok: bool


def packing_probe(
    model: MeasureModel,
    n: int,
    alpha: float,
    params: EmbeddingParams,
    depth_offset: int = 6,
    seed: int = 0,
    n_random: int = 3,
    max_cubes: int = DEFAULT_MAX_CUBES,
) -> ProbeResult:
    """Bump-sum lower-bound probe on a well-separated alpha-good family.

    Builds g = sum of rescaled bumps over the family (uniform coefficients, a
    witness for the packing floor), measures ||g||_{L^q_nu} / ||g||_{sigma,p},
    and verifies the averaging-operator bound ||Q_n g|| <= 3^m ||g|| on g and
    on seeded random elements of the span.
    """
    if math.isinf(params.q):
        raise ValidationError("packing probe needs finite q (rho = q * rho_hat)")
    good = alpha_good_cubes(model, n, params.rho, alpha, max_cubes)
    if not good:
        raise ValidationError(f"no alpha-good cubes at level {n}, alpha={alpha}")
    family = well_separated(good, model, require_dominant=True)
    family = [c for c in family if scaled_box(c, 3).inside_unit_cube()]
    if not family:
        raise ValidationError(
            "well-separated family is empty after restricting supports to the cube"
        )
    boxes = [scaled_box(c, 3) for c in family]
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if boxes[i].interior_intersects(boxes[j]):
                raise SolverError("overlapping bump supports: separation bug")

    m = model.m
    bump = Bump(m)
    sigma, p, q = params.sigma, params.p, params.q
    bumps = [
        MappedBump(bump, box.lower(), 3.0 * float(cube.side))
        for cube, box in zip(family, boxes)
    ]
    norm_u = sobolev_seminorm(bump, sigma, p, resolution=5)

    depth = n + depth_offset
    positive = model.enumerate_positive(depth, max_cubes)
    centers = np.array(
        [[float(x) for x in cube.center()] for cube, _ in positive], dtype=float
    )
    masses = np.array([float(mu) for _, mu in positive])
    bump_vals = np.vstack([b(centers) for b in bumps])  # (family, ncubes)

    def lq_norm_of(values: np.ndarray) -> float:
        if math.isinf(q):
            return float(np.max(np.abs(values)))
        return float(np.dot(masses, np.abs(values) ** q) ** (1.0 / q))

    def sobolev_norm_of(a: np.ndarray) -> float:
        scale = (3.0 * float(family[0].side)) ** (-params.rho_hat)
        if math.isinf(p):
            return float(np.max(np.abs(a))) * scale * norm_u
        return float(np.sum(np.abs(a) ** p) ** (1.0 / p)) * scale * norm_u

    ones = np.ones(len(family))
    g_vals = ones @ bump_vals
    lq_g = lq_norm_of(g_vals)
    sob_g = sobolev_norm_of(ones)
    ratio = lq_g / sob_g
    normalized = ratio * 2.0 ** (alpha * n / q)

    # averaging operator: Q(f) = sum coefficients * bumps with nu-weighted means
    dens = np.array([np.dot(masses, bv * bv) for bv in bump_vals])
    if np.any(dens <= 0):
        raise SolverError("bump has zero nu-mass on its cube: probe is degenerate")

    def apply_averaging(values: np.ndarray) -> np.ndarray:
        coeff = np.array(
            [np.dot(masses, values * bv) for bv in bump_vals]
        ) / dens
        return coeff @ bump_vals

    rng = np.random.default_rng(seed)
    checks = []
    all_ok = True
    bound = 3.0**m
    for a in [ones] + [rng.standard_normal(len(family)) for _ in range(n_random)]:
        vals = a @ bump_vals
        lhs = lq_norm_of(apply_averaging(vals))
        rhs = bound * lq_norm_of(vals)
        checks.append((lhs, rhs))
        if lhs > rhs * (1.0 + 1e-9):
            all_ok = False

    return ProbeResult(
        n=n,
        alpha=alpha,
        family=tuple(family),
        ratio=ratio,
        normalized_ratio=normalized,
        sobolev_norm=sob_g,
        lq_norm=lq_g,
        operator_checks=tuple(checks),
        operator_bound_ok=all_ok,
    )
