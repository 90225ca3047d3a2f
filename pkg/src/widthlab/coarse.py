"""Coarse multifractal counts, optimized dimensions, and separated families.

The partition function J_rho(Q) = nu(Q) * vol(Q)^(rho/m) drives both the
alpha-good counts N_{rho,n}(alpha) and the adaptive partition. Counts come
from the exact per-level mass multiset, so levels far beyond what full
enumeration could reach stay cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .cubes import DyadicCube, neighbors
from .errors import ValidationError
from .measures import DEFAULT_MAX_CUBES, MeasureModel
from .spectrum import frac_log2


def j_log2(model: MeasureModel, cube: DyadicCube, rho: float) -> float:
    """log2 of J_rho(Q); -inf for zero-mass cubes."""
    if rho <= 0:
        raise ValidationError("rho must be positive")
    mass = model.mass(cube)
    if mass == 0:
        return -math.inf
    return frac_log2(mass) - cube.level * rho


def j_value(model: MeasureModel, cube: DyadicCube, rho: float) -> float:
    """J_rho(Q) = nu(Q) * vol(Q)^(rho/m), evaluated in the log domain."""
    x = j_log2(model, cube, rho)
    return 0.0 if math.isinf(x) else 2.0**x


def count_alpha_good(
    model: MeasureModel,
    n: int,
    rho: float,
    alpha: float,
    max_cubes: int = DEFAULT_MAX_CUBES,
) -> int:
    """Number of level-n cubes with J_rho(Q) >= 2^(-alpha*n)."""
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    if n < 1:
        raise ValidationError("count needs level n >= 1")
    threshold = (rho - alpha) * n  # log2(mass) >= (rho - alpha) * n
    return sum(
        count
        for mass, count in model.level_masses(n, max_cubes).items()
        if frac_log2(mass) >= threshold
    )


def default_alpha_grid(m: int, rho: float, step: Fraction = Fraction(1, 20)):
    """Grid 0.1 .. m + rho + 2 in exact decimal steps of 0.05."""
    lo = Fraction(1, 10)
    hi = Fraction(m) + Fraction(rho).limit_denominator(10**6) + 2
    grid = []
    a = lo
    while a <= hi:
        grid.append(float(a))
        a += step
    return grid


@dataclass(frozen=True)
class CoarseProfile:
    """Counts N_{rho,n}(alpha) with window F-estimates and optimized dims.

    F estimates use log2(max(count, 1)); the optimized dimensions take the
    grid supremum of estimate/alpha. `s_rho_estimate` is the optimized upper
    value, the finite-level stand-in for the large-deviation identity
    s_rho = optimized upper coarse dimension.
    """

    rho: float
    levels: tuple[int, ...]
    alpha_grid: tuple[float, ...]
    counts: tuple[tuple[int, ...], ...]  # [level][alpha]
    f_upper: tuple[float, ...]  # per alpha, window max of log2(count)/n
    f_lower: tuple[float, ...]  # per alpha, window min
    optimized_upper: float
    optimized_lower: float

    @property
    def s_rho_estimate(self) -> float:
        return self.optimized_upper

    def summary(self) -> dict:
        return {
            "rho": self.rho,
            "levels": list(self.levels),
            "optimized_upper": self.optimized_upper,
            "optimized_lower": self.optimized_lower,
            "s_rho_estimate": self.s_rho_estimate,
        }


def coarse_profile(
    model: MeasureModel,
    levels,
    rho: float,
    alpha_grid=None,
    max_cubes: int = DEFAULT_MAX_CUBES,
) -> CoarseProfile:
    """Fill the count matrix over levels x alpha grid and optimize."""
    levels = tuple(int(n) for n in levels)
    if not levels:
        raise ValidationError("coarse profile needs a nonempty level list")
    if alpha_grid is None:
        alpha_grid = default_alpha_grid(model.m, rho)
    alpha_grid = tuple(float(a) for a in alpha_grid)
    if not alpha_grid:
        raise ValidationError("coarse profile needs a nonempty alpha grid")

    multisets = {n: model.level_masses(n, max_cubes) for n in levels}
    log_masses = {
        n: [(frac_log2(mass), count) for mass, count in ms.items()]
        for n, ms in multisets.items()
    }
    counts = []
    for n in levels:
        row = []
        for alpha in alpha_grid:
            threshold = (rho - alpha) * n
            row.append(sum(c for lm, c in log_masses[n] if lm >= threshold))
        counts.append(tuple(row))

    f_upper, f_lower = [], []
    for j in range(len(alpha_grid)):
        ests = [math.log2(max(counts[i][j], 1)) / n for i, n in enumerate(levels)]
        f_upper.append(max(ests))
        f_lower.append(min(ests))
    optimized_upper = max(f / a for f, a in zip(f_upper, alpha_grid))
    optimized_lower = max(f / a for f, a in zip(f_lower, alpha_grid))
    return CoarseProfile(
        rho=float(rho),
        levels=levels,
        alpha_grid=alpha_grid,
        counts=tuple(counts),
        f_upper=tuple(f_upper),
        f_lower=tuple(f_lower),
        optimized_upper=optimized_upper,
        optimized_lower=optimized_lower,
    )


def alpha_good_cubes(
    model: MeasureModel,
    n: int,
    rho: float,
    alpha: float,
    max_cubes: int = DEFAULT_MAX_CUBES,
) -> list[DyadicCube]:
    """The alpha-good cubes themselves (identities, not just the count)."""
    threshold = (rho - alpha) * n
    return [
        cube
        for cube, mass in model.enumerate_positive(n, max_cubes)
        if frac_log2(mass) >= threshold
    ]


def _conflict(a: DyadicCube, b: DyadicCube) -> bool:
    # interiors of b and of the 5-fold concentric box of a intersect
    return all(abs(x - y) <= 2 for x, y in zip(a.index, b.index))


def dominant_cubes(cubes, model: MeasureModel) -> list[DyadicCube]:
    """Members whose mass is >= the mass of every same-level neighbor."""
    out = []
    for cube in cubes:
        mu = model.mass(cube)
        if all(model.mass(nb) <= mu for nb in neighbors(cube)):
            out.append(cube)
    return out


def well_separated(
    cubes,
    model: MeasureModel,
    require_dominant: bool = False,
    validate_threshold: bool = False,
) -> list[DyadicCube]:
    """Greedy extraction of a 3-fold-separated subfamily.

    Repeatedly keeps the cube of maximal mass (ties broken by lexicographic
    index) and discards every remaining cube whose interior meets the kept
    cube's 5-fold concentric box. The output has pairwise disjoint 3-fold box
    interiors and cardinality >= floor(card(input) / 5^m).

    Neighbor dominance of every output cube additionally requires the
    caller's threshold property AND a mass profile without strictly
    increasing adjacent runs; `require_dominant=True` restricts candidates to
    neighbor-dominant cubes so that the property holds unconditionally (at
    the price of the cardinality bound on adversarial inputs).
    """
    cubes = list(cubes)
    if not cubes:
        raise ValidationError("well_separated needs a nonempty input")
    level = cubes[0].level
    if any(c.level != level for c in cubes):
        raise ValidationError("well_separated input cubes must share one level")

    if validate_threshold:
        # O(card D_n) check of sup_{outside} mass <= inf_{inside} mass
        inside = set(cubes)
        inf_in = min(model.mass(c) for c in cubes)
        for cube, mass in model.enumerate_positive(level):
            if cube not in inside and mass > inf_in:
                raise ValidationError(
                    "threshold property violated: outside cube outweighs input"
                )

    candidates = dominant_cubes(cubes, model) if require_dominant else cubes
    order = sorted(candidates, key=lambda c: (-model.mass(c), c.index))
    kept: list[DyadicCube] = []
    for cube in order:
        if all(not _conflict(cube, k) for k in kept):
            kept.append(cube)
    kept.sort(key=lambda c: c.index)
    return kept
