"""The K± invariant of principal finite triples and induced maps.

Coordinates of ``K0`` are the summands of the universal TRO, in order.
Marked sets are stored factor by factor; the full extensional sets are the
Cartesian products and are built on demand.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np

from .factors import CartanFactor, Kind, is_principal_kind, universal_tro
from .morphisms import (
    AdmissibilityError,
    MorphismClass,
    MorphismError,
    NoRealization,
    block_from_matrix,
    check_morphism,
    tro_multiplicity,
)

__all__ = [
    "K0Data",
    "KMap",
    "KTheoryError",
    "NoRealization",
    "TABLE_MODES",
    "k0_of",
    "k0_of_factor",
    "k0_of_morphism",
    "check_kpm_map",
    "kpm_violations",
    "realize",
    "direct_sum",
    "minkowski_image",
]

TABLE_MODES = ("oracle", "paper")

Vec = tuple[int, ...]


class KTheoryError(ValueError):
    pass


@dataclass(frozen=True)
class _Part:
    """Marked sets of one factor, described by rules rather than listed.

    The scale is the box ``0..bounds``; ``plus``/``minus`` select a subset of
    it: ``'all'``, ``'even'`` (one coordinate) or ``'diag'`` (two coordinates).
    """

    bounds: tuple[int, ...]
    plus: str
    minus: str

    def rule(self, name: str) -> str:
        return {"scale": "all", "deltaPlus": self.plus, "deltaMinus": self.minus}[name]

    def members(self, name: str) -> list[Vec]:
        rule = self.rule(name)
        if rule == "diag":
            return [(j, j) for j in range(min(self.bounds) + 1)]
        if rule == "even":
            return [(j,) for j in range(0, self.bounds[0] + 1, 2)]
        return list(product(*(range(b + 1) for b in self.bounds)))

    def lattice_generators(self, name: str) -> list[Vec]:
        """Generators of the subgroup spanned by the marked set."""
        rule = self.rule(name)
        if rule == "diag":
            return [(1, 1)]
        if rule == "even":
            return [(2,)]
        return [tuple(int(i == j) for j in range(len(self.bounds))) for i in range(len(self.bounds))]

    def in_lattice(self, name: str, vec: Sequence[int]) -> bool:
        rule = self.rule(name)
        if rule == "diag":
            return vec[0] == vec[1]
        if rule == "even":
            return vec[0] % 2 == 0
        return True

    def contains(self, name: str, vec: Sequence[int]) -> bool:
        if len(vec) != len(self.bounds) or any(not 0 <= x <= b for x, b in zip(vec, self.bounds)):
            return False
        rule = self.rule(name)
        if rule == "diag":
            return vec[0] == vec[1]
        if rule == "even":
            return vec[0] % 2 == 0
        return True


@dataclass(frozen=True, eq=False)
class K0Data:
    """``(K0, Σ, Δ⁺, Δ⁻, σ)`` for a principal finite triple.

    ``sigma`` is the involution as a permutation of coordinates.  ``parts``
    holds the marked sets of each summand; :attr:`scale`,
    :attr:`delta_plus` and :attr:`delta_minus` are their products.
    """

    rank: int
    sigma: tuple[int, ...]
    parts: tuple[_Part, ...] = field(repr=False)
    widths: tuple[int, ...] = field(repr=False)

    def _product(self, name: str) -> frozenset:
        out = [()]
        for part in self.parts:
            sets = part.members(name)
            out = [a + b for a in out for b in sets]
        return frozenset(out)

    @cached_property
    def scale(self) -> frozenset:
        return self._product("scale")

    @cached_property
    def delta_plus(self) -> frozenset:
        return self._product("deltaPlus")

    @cached_property
    def delta_minus(self) -> frozenset:
        return self._product("deltaMinus")

    @property
    def sigma_matrix(self) -> np.ndarray:
        out = np.zeros((self.rank, self.rank), dtype=object)
        for i, j in enumerate(self.sigma):
            out[j, i] = 1
        return out

    def marked(self, name: str) -> frozenset:
        return {"scale": self.scale, "deltaPlus": self.delta_plus, "deltaMinus": self.delta_minus}[name]

    def part_slices(self) -> list[slice]:
        out, start = [], 0
        for w in self.widths:
            out.append(slice(start, start + w))
            start += w
        return out

    def contains(self, name: str, vec: Sequence[int]) -> bool:
        """Membership test done factor by factor (no product expansion)."""
        vec = tuple(vec)
        return all(part.contains(name, vec[sl]) for part, sl in zip(self.parts, self.part_slices()))

    def __eq__(self, other):
        if not isinstance(other, K0Data):
            return NotImplemented
        return (self.rank, self.sigma, self.parts, self.widths) == (
            other.rank,
            other.sigma,
            other.parts,
            other.widths,
        )

    def __hash__(self):
        return hash((self.rank, self.sigma, self.parts, self.widths))

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "sigma": list(self.sigma),
            "scale": [list(v) for v in sorted(self.scale)],
            "deltaPlus": [list(v) for v in sorted(self.delta_plus)],
            "deltaMinus": [list(v) for v in sorted(self.delta_minus)],
        }


def k0_of_factor(f: CartanFactor, table_mode: str = "oracle") -> tuple[_Part, tuple[int, ...]]:
    """Marked sets and local involution of one principal factor."""
    if table_mode not in TABLE_MODES:
        raise KTheoryError(f"unknown table mode {table_mode!r}")
    if not is_principal_kind(f):
        raise KTheoryError(f"K± invariant needs principal factors, got {f}")
    if f.kind is Kind.I:
        return _Part(f.params, "diag", "diag"), (1, 0)
    # symmetric partial isometries reach every rank, antisymmetric ones only even ranks
    hermitian = f.kind is Kind.III
    if table_mode == "paper":
        hermitian = not hermitian
    plus, minus = ("all", "even") if hermitian else ("even", "all")
    return _Part(f.params, plus, minus), (0,)


def k0_of(Z: Sequence[CartanFactor] | CartanFactor, table_mode: str = "oracle") -> K0Data:
    """K± invariant of a principal triple, as the direct sum over summands."""
    if isinstance(Z, CartanFactor):
        Z = (Z,)
    parts, widths, sigma = [], [], []
    for f in Z:
        part, local = k0_of_factor(f, table_mode)
        off = len(sigma)
        sigma.extend(off + i for i in local)
        parts.append(part)
        widths.append(len(local))
    return K0Data(len(sigma), tuple(sigma), tuple(parts), tuple(widths))


def direct_sum(a: K0Data, b: K0Data) -> K0Data:
    sigma = a.sigma + tuple(a.rank + i for i in b.sigma)
    return K0Data(a.rank + b.rank, sigma, a.parts + b.parts, a.widths + b.widths)


@dataclass(frozen=True, eq=False)
class KMap:
    """Integer matrix between two K0 groups (rows index the target)."""

    matrix: np.ndarray
    source: K0Data
    target: K0Data

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=object)
        shape = (self.target.rank, self.source.rank)
        if mat.size == 0 and 0 in shape:
            mat = mat.reshape(shape)
        if mat.shape != shape:
            raise KTheoryError(f"K-map must be {shape[0]}x{shape[1]}, got shape {mat.shape}")
        object.__setattr__(self, "matrix", mat)

    def __eq__(self, other):
        if not isinstance(other, KMap):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.source, self.target, tuple(self.matrix.ravel())))

    def apply(self, vec: Sequence[int]) -> Vec:
        return tuple(int(x) for x in self.matrix.dot(np.array(vec, dtype=object)))

    def tolist(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self.matrix.tolist()]


def k0_of_morphism(m: MorphismClass, table_mode: str = "oracle") -> KMap:
    """Induced map on the K± invariant."""
    return KMap(tro_multiplicity(m), k0_of(m.source, table_mode), k0_of(m.target, table_mode))


_SET_NAMES = ("scale", "deltaPlus", "deltaMinus")


def minkowski_image(parts, slices, mat: np.ndarray, name: str) -> set:
    """Image of a product of marked sets under ``mat`` (rows already selected)."""
    reach = {(0,) * mat.shape[0]}
    for part, sl in zip(parts, slices):
        sub = mat[:, sl]
        if not sub.any():
            continue
        imgs = {tuple(int(x) for x in sub.dot(np.array(v, dtype=object))) for v in part.members(name)}
        reach = {tuple(a + b for a, b in zip(r, w)) for r in reach for w in imgs}
    return reach


def _corner(k: K0Data) -> np.ndarray:
    return np.array([b for p in k.parts for b in p.bounds], dtype=object)


def _image_violation(gamma: KMap, name: str):
    src, tgt = gamma.source, gamma.target
    mat = gamma.matrix
    src_slices = src.part_slices()
    nonneg = bool((mat >= 0).all())
    fits = False
    if nonneg:
        top = mat.dot(_corner(src)) if src.rank else np.zeros(tgt.rank, dtype=object)
        fits = all(tp.contains("scale", tuple(int(x) for x in top[sl])) for tp, sl in zip(tgt.parts, tgt.part_slices()))
    for t, (tpart, tsl) in enumerate(zip(tgt.parts, tgt.part_slices())):
        sub = mat[tsl, :]
        if nonneg and fits:
            # every marked set is box ∩ lattice and spans its lattice, so with
            # the box image inside the target box only lattice generators matter
            for spart, ssl in zip(src.parts, src_slices):
                for g in spart.lattice_generators(name):
                    w = tuple(int(x) for x in sub[:, ssl].dot(np.array(g, dtype=object)))
                    if not tpart.in_lattice(name, w):
                        return t, w
            continue
        if name == "scale" and nonneg:
            top = tuple(int(x) for x in sub.dot(_corner(src))) if src.rank else (0,) * sub.shape[0]
            if not tpart.contains(name, top):
                return t, top
            continue
        for w in sorted(minkowski_image(src.parts, src_slices, sub, name)):
            if not tpart.contains(name, w):
                return t, w
    return None


def kpm_violations(gamma: KMap) -> list[str]:
    """Human-readable reasons why ``gamma`` is not a K± map (empty if it is)."""
    mat = gamma.matrix
    if mat.shape != (gamma.target.rank, gamma.source.rank):
        raise KTheoryError(f"matrix shape {mat.shape} does not match ranks")
    out = []
    lhs = mat.dot(gamma.source.sigma_matrix) if gamma.source.rank else mat
    rhs = gamma.target.sigma_matrix.dot(mat) if gamma.target.rank else mat
    if not np.array_equal(lhs, rhs):
        out.append("γσ ≠ σγ")
    for name in _SET_NAMES:
        bad = _image_violation(gamma, name)
        if bad is not None:
            out.append(f"{name}: image {list(bad[1])} not in target summand {bad[0]}")
    return out


def check_kpm_map(gamma: KMap) -> bool:
    """True iff ``gamma`` maps Σ, Δ⁺, Δ⁻ into their targets and commutes with σ."""
    return not kpm_violations(gamma)


def realize(gamma: KMap | np.ndarray, src: Sequence[CartanFactor], tgt: Sequence[CartanFactor]) -> MorphismClass:
    """The unique morphism class inducing ``gamma``.

    Raises :class:`NoRealization` naming the violated parity or capacity
    inequality when no morphism induces ``gamma``.
    """
    src, tgt = tuple(src), tuple(tgt)
    for f in src + tgt:
        if not is_principal_kind(f):
            raise KTheoryError(f"realize needs principal factors, got {f}")
    mat = gamma.matrix if isinstance(gamma, KMap) else np.array(gamma, dtype=object)
    rs = [len(universal_tro(f)) for f in tgt]
    cs = [len(universal_tro(f)) for f in src]
    mat = np.array(mat, dtype=object).reshape(sum(rs), sum(cs))
    blocks = []
    r0 = 0
    for i, t in enumerate(tgt):
        row = []
        c0 = 0
        for j, s in enumerate(src):
            sub = mat[r0 : r0 + rs[i], c0 : c0 + cs[j]]
            row.append(block_from_matrix(sub, s, t))
            c0 += cs[j]
        blocks.append(tuple(row))
        r0 += rs[i]
    m = MorphismClass(src, tgt, tuple(blocks))
    try:
        check_morphism(m)
    except AdmissibilityError as exc:
        raise NoRealization(str(exc)) from exc
    except MorphismError as exc:  # pragma: no cover - kinds were checked above
        raise NoRealization(str(exc)) from exc
    return m

