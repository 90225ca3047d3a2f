"""Borel probability measures on the unit cube with exact dyadic-cube masses.

Four model families are supported, all with exactly computable cube masses:
atomic measures, normalized Lebesgue on a dyadic cube, dyadically aligned
self-similar (IFS) measures, and products of lower-dimensional models.
Masses are kept as `fractions.Fraction` throughout; probabilities written as
decimals in spec files parse exactly, so no floating-point fallback is needed.

Models are immutable after construction. Mass evaluation is pure; the IFS
memo table is a plain dict guarded by the GIL, safe for concurrent readers.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

from .cubes import DyadicCube, children, parse_cube, root
from .errors import ParseError, ResourceLimitError, ValidationError

DEFAULT_MAX_CUBES = 1 << 21

Mass = Fraction


def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def cube_of_point(point, n: int) -> DyadicCube:
    """The level-n cube containing a point of the half-open unit cube."""
    scale = 1 << n
    index = tuple(_ceil_frac(Fraction(x) * scale) - 1 for x in point)
    return DyadicCube(n, index)


class MeasureModel:
    """Common interface: exact mass of dyadic cubes plus pruned enumeration."""

    m: int
    finite_support = False

    def mass(self, cube: DyadicCube) -> Mass:
        raise NotImplementedError

    def positive_children(self, cube: DyadicCube) -> list[tuple[DyadicCube, Mass]]:
        out = []
        for child in children(cube):
            mu = self.mass(child)
            if mu > 0:
                out.append((child, mu))
        return out

    def enumerate_positive(
        self, n: int, max_cubes: int = DEFAULT_MAX_CUBES
    ) -> list[tuple[DyadicCube, Mass]]:
        """All level-n cubes of positive mass, by pruned tree descent."""
        if n < 0:
            raise ValidationError("level must be >= 0")
        frontier = [(root(self.m), Fraction(1))]
        for _ in range(n):
            nxt = []
            for cube, _ in frontier:
                nxt.extend(self.positive_children(cube))
                if len(nxt) > max_cubes:
                    raise ResourceLimitError(
                        f"more than {max_cubes} positive cubes at level {n}"
                    )
            frontier = nxt
        frontier.sort(key=lambda cm: cm[0].index)
        return frontier

    def level_masses(self, n: int, max_cubes: int = DEFAULT_MAX_CUBES) -> dict[Mass, int]:
        """Multiset {mass: count} over the level-n positive cubes.

        Subclasses override this with closed forms where the tree would be
        too large to walk; the default just groups the enumeration.
        """
        out: dict[Mass, int] = {}
        for _, mu in self.enumerate_positive(n, max_cubes):
            out[mu] = out.get(mu, 0) + 1
        return out

    def card_positive(self, n: int, max_cubes: int = DEFAULT_MAX_CUBES) -> int:
        return sum(self.level_masses(n, max_cubes).values())

    def to_spec(self) -> dict:
        raise NotImplementedError


class AtomicMeasure(MeasureModel):
    """Finitely many atoms in the open unit cube.

    Finite support makes the asymptotic quantities degenerate (all box
    dimensions are 0); reports downstream flag this.
    """

    finite_support = True

    def __init__(self, points, weights) -> None:
        pts = [tuple(Fraction(x) for x in p) for p in points]
        wts = [Fraction(w) for w in weights]
        if not pts:
            raise ValidationError("atomic measure needs at least one point")
        if len(pts) != len(wts):
            raise ValidationError("points and weights length mismatch")
        m = len(pts[0])
        for p in pts:
            if len(p) != m:
                raise ValidationError("inconsistent point dimensions")
            if not all(0 < x < 1 for x in p):
                raise ValidationError(
                    f"atomic point {tuple(map(str, p))} not in the open unit cube"
                )
        if any(w <= 0 for w in wts):
            raise ValidationError("atomic weights must be positive")
        if sum(wts) != 1:
            raise ValidationError(
                f"atomic weights sum to {sum(wts)}, not a probability measure"
            )
        self.m = m
        self.points = tuple(pts)
        self.weights = tuple(wts)

    def mass(self, cube: DyadicCube) -> Mass:
        return sum(
            (w for p, w in zip(self.points, self.weights) if cube.contains(p)),
            Fraction(0),
        )

    def enumerate_positive(self, n, max_cubes=DEFAULT_MAX_CUBES):
        agg: dict[DyadicCube, Fraction] = {}
        for p, w in zip(self.points, self.weights):
            cube = cube_of_point(p, n)
            agg[cube] = agg.get(cube, Fraction(0)) + w
        return sorted(agg.items(), key=lambda cm: cm[0].index)

    def level_masses(self, n, max_cubes=DEFAULT_MAX_CUBES):
        out: dict[Mass, int] = {}
        for _, mu in self.enumerate_positive(n, max_cubes):
            out[mu] = out.get(mu, 0) + 1
        return out

    def to_spec(self) -> dict:
        return {
            "type": "atomic",
            "m": self.m,
            "points": [[str(x) for x in p] for p in self.points],
            "weights": [str(w) for w in self.weights],
        }


class UniformMeasure(MeasureModel):
    """Normalized Lebesgue measure restricted to a dyadic cube."""

    def __init__(self, support: DyadicCube) -> None:
        self.support = support
        self.m = support.m

    def mass(self, cube: DyadicCube) -> Mass:
        s = self.support
        if cube.level >= s.level:
            if cube.ancestor(s.level) == s:
                return Fraction(1, 1 << ((cube.level - s.level) * self.m))
            return Fraction(0)
        if s.ancestor(cube.level) == cube:
            return Fraction(1)
        return Fraction(0)

    def level_masses(self, n, max_cubes=DEFAULT_MAX_CUBES):
        s = self.support
        if n <= s.level:
            return {Fraction(1): 1}
        k = (n - s.level) * self.m
        return {Fraction(1, 1 << k): 1 << k}

    def enumerate_positive(self, n, max_cubes=DEFAULT_MAX_CUBES):
        s = self.support
        if n <= s.level:
            return [(s.ancestor(n), Fraction(1))]
        if (1 << ((n - s.level) * self.m)) > max_cubes:
            raise ResourceLimitError(
                f"more than {max_cubes} positive cubes at level {n}"
            )
        shift = n - s.level
        mu = Fraction(1, 1 << (shift * self.m))
        ranges = [range(l << shift, (l + 1) << shift) for l in s.index]
        return [(DyadicCube(n, idx), mu) for idx in itertools.product(*ranges)]

    def to_spec(self) -> dict:
        return {"type": "uniform", "m": self.m, "support": str(self.support)}


@dataclass(frozen=True)
class IfsMap:
    """Similarity with contraction 2^-ratio_log2 onto a dyadic image cube."""

    ratio_log2: int
    offset: tuple[int, ...]

    def __post_init__(self):
        if self.ratio_log2 < 1:
            raise ValidationError("ratio_log2 must be a positive integer")

    def image(self) -> DyadicCube:
        return DyadicCube(self.ratio_log2, self.offset)


def _dyadic_disjoint(a: DyadicCube, b: DyadicCube) -> bool:
    lo, hi = (a, b) if a.level <= b.level else (b, a)
    return hi.ancestor(lo.level) != lo


class IfsMeasure(MeasureModel):
    """Self-similar measure for dyadically aligned maps with disjoint images.

    nu = sum_i p_i * nu o S_i^{-1}; masses follow by finite recursion on the
    cube level, memoized. An optional embed_shift conjugates the attractor
    into a dyadic subcube so that it avoids the boundary of the unit cube.
    """

    def __init__(self, maps, probs, embed_shift: IfsMap | None = None) -> None:
        maps = tuple(maps)
        probs = tuple(Fraction(p) for p in probs)
        if not maps:
            raise ValidationError("IFS needs at least one map")
        if len(maps) != len(probs):
            raise ValidationError("maps and probs length mismatch")
        m = len(maps[0].offset)
        images = []
        for mp in maps:
            if len(mp.offset) != m:
                raise ValidationError("inconsistent map dimensions")
            images.append(mp.image())
        for i in range(len(images)):
            for j in range(i + 1, len(images)):
                if not _dyadic_disjoint(images[i], images[j]):
                    raise ValidationError(
                        f"IFS image cubes {images[i]} and {images[j]} overlap"
                    )
        if any(p <= 0 for p in probs):
            raise ValidationError("IFS probabilities must be positive")
        if sum(probs) != 1:
            raise ValidationError(
                f"IFS probabilities sum to {sum(probs)}, not a probability vector"
            )
        if embed_shift is not None and len(embed_shift.offset) != m:
            raise ValidationError("embed_shift dimension mismatch")
        self.m = m
        self.maps = maps
        self.probs = probs
        self.embed_shift = embed_shift
        self._images = tuple(images)
        self._memo: dict[tuple[int, tuple[int, ...]], Fraction] = {}
        self._multisets: dict[int, dict[Mass, int]] = {}
        self._max_k = max(mp.ratio_log2 for mp in maps)

    @property
    def common_ratio_log2(self) -> int | None:
        ks = {mp.ratio_log2 for mp in self.maps}
        return ks.pop() if len(ks) == 1 else None

    def _pullback(self, cube: DyadicCube, image: DyadicCube) -> DyadicCube:
        shift = cube.level - image.level
        return DyadicCube(
            cube.level - image.level,
            tuple(l - (o << shift) for l, o in zip(cube.index, image.index)),
        )

    def _mass_base(self, cube: DyadicCube) -> Fraction:
        """Mass of the unshifted self-similar measure."""
        if cube.level == 0:
            return Fraction(1)
        key = (cube.level, cube.index)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        total = Fraction(0)
        for p, image in zip(self.probs, self._images):
            if cube.level <= image.level:
                if image.ancestor(cube.level) == cube:
                    total += p
            elif cube.ancestor(image.level) == image:
                total += p * self._mass_base(self._pullback(cube, image))
        self._memo[key] = total
        return total

    def mass(self, cube: DyadicCube) -> Mass:
        shift = self.embed_shift
        if shift is None:
            return self._mass_base(cube)
        img = shift.image()
        if cube.level <= img.level:
            return Fraction(1) if img.ancestor(cube.level) == cube else Fraction(0)
        if cube.ancestor(img.level) == img:
            return self._mass_base(self._pullback(cube, img))
        return Fraction(0)

    def level_masses(self, n, max_cubes=DEFAULT_MAX_CUBES):
        shift = self.embed_shift
        if shift is not None:
            if n <= shift.ratio_log2:
                return {Fraction(1): 1}
            n = n - shift.ratio_log2
        return dict(self._level_masses_base(n, max_cubes))

    def _level_masses_base(self, n, max_cubes):
        # For n >= max ratio_log2, every positive cube sits inside exactly one
        # image cube, so the multiset telescopes; shallower levels are walked.
        cached = self._multisets.get(n)
        if cached is not None:
            return cached
        if n < self._max_k:
            out: dict[Mass, int] = {}
            for _, mu in self._enumerate_base(n, max_cubes):
                out[mu] = out.get(mu, 0) + 1
        else:
            out = {}
            for p, image in zip(self.probs, self._images):
                sub = self._level_masses_base(n - image.level, max_cubes)
                for mu, cnt in sub.items():
                    key = p * mu
                    out[key] = out.get(key, 0) + cnt
        # the multiset is the resource here, not the cube count it compresses
        if len(out) > max_cubes:
            raise ResourceLimitError(
                f"more than {max_cubes} distinct masses at level {n}"
            )
        self._multisets[n] = out
        return out

    def _enumerate_base(self, n, max_cubes):
        """Enumerate positive cubes of the unshifted measure."""
        frontier = [(root(self.m), Fraction(1))]
        for _ in range(n):
            nxt = []
            for cube, _ in frontier:
                for child in children(cube):
                    mu = self._mass_base(child)
                    if mu > 0:
                        nxt.append((child, mu))
                if len(nxt) > max_cubes:
                    raise ResourceLimitError(
                        f"more than {max_cubes} positive cubes at level {n}"
                    )
            frontier = nxt
        return frontier

    def to_spec(self) -> dict:
        spec = {
            "type": "ifs",
            "m": self.m,
            "maps": [
                {"ratio_log2": mp.ratio_log2, "offset": list(mp.offset)}
                for mp in self.maps
            ],
            "probs": [str(p) for p in self.probs],
        }
        if self.embed_shift is not None:
            spec["embed_shift"] = {
                "ratio_log2": self.embed_shift.ratio_log2,
                "offset": list(self.embed_shift.offset),
            }
        return spec


class ProductMeasure(MeasureModel):
    """Product of independent lower-dimensional models."""

    def __init__(self, factors) -> None:
        factors = tuple(factors)
        if not factors:
            raise ValidationError("product measure needs at least one factor")
        self.factors = factors
        self.m = sum(f.m for f in factors)
        self.finite_support = all(f.finite_support for f in factors)

    def _split(self, index: tuple[int, ...]):
        pos = 0
        for f in self.factors:
            yield f, index[pos : pos + f.m]
            pos += f.m

    def mass(self, cube: DyadicCube) -> Mass:
        total = Fraction(1)
        for f, idx in self._split(cube.index):
            total *= f.mass(DyadicCube(cube.level, idx))
            if total == 0:
                return Fraction(0)
        return total

    def level_masses(self, n, max_cubes=DEFAULT_MAX_CUBES):
        out = {Fraction(1): 1}
        for f in self.factors:
            sub = f.level_masses(n, max_cubes)
            nxt: dict[Mass, int] = {}
            for a, ca in out.items():
                for b, cb in sub.items():
                    key = a * b
                    nxt[key] = nxt.get(key, 0) + ca * cb
            out = nxt
            if len(out) > max_cubes:
                raise ResourceLimitError(
                    f"more than {max_cubes} distinct masses at level {n}"
                )
        return out

    def to_spec(self) -> dict:
        return {"type": "product", "factors": [f.to_spec() for f in self.factors]}


def lebesgue(m: int) -> UniformMeasure:
    """Lebesgue measure on the full unit cube."""
    return UniformMeasure(root(m))


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParseError(f"expected a number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        # json parse hook normally yields Fractions; floats only appear when a
        # model is built programmatically, where exactness is the caller's call.
        return Fraction(value).limit_denominator(10**15)
    raise ParseError(f"expected a number, got {value!r}")


def _model_from_dict(doc: dict) -> MeasureModel:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ParseError("measure spec must be an object with a 'type' field")
    kind = doc["type"]
    if kind == "atomic":
        return AtomicMeasure(
            [[_as_fraction(x) for x in p] for p in doc["points"]],
            [_as_fraction(w) for w in doc["weights"]],
        )
    if kind == "uniform":
        support = doc["support"]
        cube = parse_cube(support) if isinstance(support, str) else support
        return UniformMeasure(cube)
    if kind == "ifs":
        maps = [
            IfsMap(int(mp["ratio_log2"]), tuple(int(o) for o in mp["offset"]))
            for mp in doc["maps"]
        ]
        shift = None
        if doc.get("embed_shift") is not None:
            es = doc["embed_shift"]
            shift = IfsMap(int(es["ratio_log2"]), tuple(int(o) for o in es["offset"]))
        return IfsMeasure(maps, [_as_fraction(p) for p in doc["probs"]], shift)
    if kind == "product":
        return ProductMeasure([_model_from_dict(f) for f in doc["factors"]])
    raise ParseError(f"unknown measure type {kind!r}")


def load_measure(source) -> MeasureModel:
    """Parse and validate a measure-spec document (JSON).

    Accepts bytes, str, or a readable file object. Decimal numbers parse as
    exact rationals.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source, parse_float=Fraction, parse_int=int)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in measure spec: {exc}") from exc
    model = _model_from_dict(doc)
    m_declared = doc.get("m")
    if m_declared is not None and int(m_declared) != model.m:
        raise ParseError(
            f"declared dimension m={m_declared} does not match model dimension {model.m}"
        )
    return model


def _looks_numeric(token: str) -> bool:
    try:
        Fraction(token.strip())
        return True
    except (ValueError, ZeroDivisionError):
        return False


def ingest_points(rows, weight_column=None) -> AtomicMeasure:
    """Build an atomic model from CSV rows of coordinates in (0,1).

    `weight_column` may be a header name or a 0-based column index; without
    it every point gets weight 1/N. Weights are normalized to total mass 1.
    """
    if isinstance(rows, (str, bytes)):
        rows = io.StringIO(rows.decode() if isinstance(rows, bytes) else rows)
    reader = csv.reader(rows)
    records = [row for row in reader if any(tok.strip() for tok in row)]
    if not records:
        raise ParseError("no data rows in CSV input")

    header = None
    if not all(_looks_numeric(tok) for tok in records[0]):
        header = [tok.strip() for tok in records[0]]
        records = records[1:]
        if not records:
            raise ParseError("CSV input has a header but no data rows")

    widx = None
    if weight_column is not None:
        if isinstance(weight_column, str):
            if header is None or weight_column not in header:
                raise ParseError(f"weight column {weight_column!r} not found in header")
            widx = header.index(weight_column)
        else:
            widx = int(weight_column)

    points, weights = [], []
    for lineno, row in enumerate(records, start=1):
        coords = []
        for j, tok in enumerate(row):
            if not _looks_numeric(tok):
                raise ParseError(f"non-numeric field {tok!r} in CSV row {lineno}")
            value = Fraction(tok.strip())
            if j == widx:
                if value <= 0:
                    raise ValidationError(f"non-positive weight in CSV row {lineno}")
                weights.append(value)
            else:
                coords.append(value)
        for x in coords:
            if not 0 < x < 1:
                raise ValidationError(
                    f"coordinate {x} in CSV row {lineno} not inside the open unit cube"
                )
        points.append(coords)
    if widx is None:
        n = len(points)
        weights = [Fraction(1, n)] * n
    if len(weights) != len(points):
        raise ParseError("weight column missing in some CSV rows")
    total = sum(weights)
    weights = [w / total for w in weights]
    return AtomicMeasure(points, weights)
