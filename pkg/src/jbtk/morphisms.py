"""Unitary-equivalence classes of morphisms between finite triples.

A morphism class is a matrix of multiplicity blocks indexed by
``(target summand, source summand)``.  Between principal factors a block
is ``RectRect(a, b)`` (type I to type I) or ``Column(a)`` (all other pairs);
spin, Hilbertian and exceptional strands only carry ``Unit`` blocks.

Block literals: ``[a,b]``, ``[a]``, ``"u"`` and ``0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence, Union

import numpy as np

from .factors import (
    CartanFactor,
    Kind,
    canonicalize,
    factor_class,
    is_principal_kind,
    universal_tro,
)

__all__ = [
    "RectRect",
    "Column",
    "Unit",
    "Zero",
    "UNIT",
    "ZERO",
    "Block",
    "MorphismClass",
    "StandardBlock",
    "AdmissibilityError",
    "UnsupportedMorphism",
    "MorphismError",
    "NoRealization",
    "parse_block",
    "block_literal",
    "is_zero",
    "check_block",
    "admissible",
    "check_morphism",
    "check_capacity",
    "is_admissible",
    "block_matrix",
    "block_from_matrix",
    "tro_multiplicity",
    "compose",
    "identity",
    "zero_morphism",
    "standard_form",
    "block_options",
    "pair_type",
]


class MorphismError(ValueError):
    """Structurally invalid morphism data (shapes, mismatched composition)."""


class AdmissibilityError(MorphismError):
    """A block or morphism violates a capacity inequality."""

    def __init__(self, message: str, inequality: str = "", lhs=None, rhs=None):
        super().__init__(message)
        self.inequality = inequality
        self.lhs = lhs
        self.rhs = rhs


class UnsupportedMorphism(MorphismError):
    """Nonzero block between a pair of factor kinds outside the classification."""


class NoRealization(MorphismError):
    """An integer matrix is not the multiplicity data of any morphism."""


@dataclass(frozen=True)
class RectRect:
    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise MorphismError(f"negative multiplicity in [{self.a},{self.b}]")


@dataclass(frozen=True)
class Column:
    a: int

    def __post_init__(self):
        if self.a < 0:
            raise MorphismError(f"negative multiplicity in [{self.a}]")


@dataclass(frozen=True)
class Unit:
    """Multiplicity-one embedding (spin, Hilbertian or exceptional strands)."""


@dataclass(frozen=True)
class Zero:
    pass


UNIT = Unit()
ZERO = Zero()

Block = Union[RectRect, Column, Unit, Zero]


def parse_block(value) -> Block:
    if value == 0 and not isinstance(value, bool) and not isinstance(value, list):
        return ZERO
    if value == "u":
        return UNIT
    if isinstance(value, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in value):
        if len(value) == 2:
            return RectRect(value[0], value[1])
        if len(value) == 1:
            return Column(value[0])
    raise MorphismError(f"bad block literal {value!r}")


def block_literal(b: Block):
    if isinstance(b, RectRect):
        return [b.a, b.b]
    if isinstance(b, Column):
        return [b.a]
    if isinstance(b, Unit):
        return "u"
    return 0


def _normal(b) -> Block:
    if not isinstance(b, (RectRect, Column, Unit, Zero)):
        b = parse_block(b)
    return ZERO if is_zero(b) else b


def is_zero(b: Block) -> bool:
    if isinstance(b, Zero):
        return True
    if isinstance(b, RectRect):
        return b.a == 0 and b.b == 0
    if isinstance(b, Column):
        return b.a == 0
    return False


def _cls(f: CartanFactor) -> str:
    if is_principal_kind(f):
        return "P"
    return factor_class(canonicalize(f))


def pair_type(src: CartanFactor, tgt: CartanFactor) -> str:
    """Name of the classification row for ``src -> tgt``.

    Returns ``'I-I'``, ``'I-II'``, ``'III-I'`` ... for principal pairs and
    ``'S-S'``, ``'H-H'``, ``'H-S'``, ``'E-E'`` otherwise.  Raises
    :class:`UnsupportedMorphism` for pairs without nonzero morphisms here.
    """
    cs, ct = _cls(src), _cls(tgt)
    if cs == "P" and ct == "P":
        return f"{src.kind.name}-{tgt.kind.name}"
    if (cs, ct) in {("S", "S"), ("H", "H"), ("H", "S"), ("E", "E")}:
        return f"{cs}-{ct}"
    raise UnsupportedMorphism(f"no nonzero morphisms classified for {src} -> {tgt}")


def _le(ineq: str, lhs: int, rhs: int):
    if lhs > rhs:
        raise AdmissibilityError(f"{ineq}: {lhs}>{rhs}", ineq, lhs, rhs)


def _factor_dim(f: CartanFactor) -> int:
    return canonicalize(f).dimension


def check_block(b: Block, src: CartanFactor, tgt: CartanFactor) -> None:
    """Raise unless ``b`` is an admissible block for ``src -> tgt``."""
    if is_zero(b):
        return
    pt = pair_type(src, tgt)
    if pt in ("S-S", "H-H", "H-S", "E-E"):
        if not isinstance(b, Unit):
            raise AdmissibilityError(f"{pt} blocks are multiplicity one, got {block_literal(b)!r}")
        d_src, d_tgt = _factor_dim(src), _factor_dim(tgt)
        if pt == "H-S":
            # isometric images sit in totally isotropic subspaces
            _le("dim H≤⌊n/2⌋", d_src, d_tgt // 2)
        else:
            _le("dim≤dim", d_src, d_tgt)
        return

    sk, tk = src.kind, tgt.kind
    if sk is Kind.I and tk is Kind.I:
        if not isinstance(b, RectRect):
            raise AdmissibilityError(f"I→I needs a [a,b] block, got {block_literal(b)!r}")
        m, n = src.params
        M, N = tgt.params
        _le("αm+βn≤M", b.a * m + b.b * n, M)
        _le("αn+βm≤N", b.a * n + b.b * m, N)
        return
    if not isinstance(b, Column):
        raise AdmissibilityError(f"{pt} needs an [a] block, got {block_literal(b)!r}")
    a = b.a
    if tk is Kind.I:
        n = src.params[0]
        _le("αn≤min{M,N}", a * n, min(tgt.params))
    elif sk is Kind.I:
        m, n = src.params
        _le("α(m+n)≤N", a * (m + n), tgt.params[0])
    elif sk is tk:
        _le("αn≤N", a * src.params[0], tgt.params[0])
    else:
        _le("2αn≤N", 2 * a * src.params[0], tgt.params[0])


def admissible(b: Block, src: CartanFactor, tgt: CartanFactor) -> bool:
    """Whether ``b`` is a valid block for ``src -> tgt``.

    Raises :class:`UnsupportedMorphism` for a nonzero block between kinds that
    have no classified morphisms.
    """
    try:
        check_block(b, src, tgt)
    except UnsupportedMorphism:
        raise
    except AdmissibilityError:
        return False
    return True


def block_matrix(b: Block, src: CartanFactor, tgt: CartanFactor) -> np.ndarray:
    """TRO-level multiplicity matrix of a block (rows: target TRO summands)."""
    shape = (len(universal_tro(tgt)), len(universal_tro(src)))
    if is_zero(b):
        return np.zeros(shape, dtype=object)
    if not (is_principal_kind(src) and is_principal_kind(tgt)):
        raise MorphismError(f"TRO multiplicities are not modelled for {src} -> {tgt}")
    if isinstance(b, RectRect):
        out = [[b.a, b.b], [b.b, b.a]]
    elif isinstance(b, Column):
        a = b.a
        if src.kind is Kind.I:
            out = [[a, a]]
        elif tgt.kind is Kind.I:
            out = [[a], [a]]
        elif src.kind is tgt.kind:
            out = [[a]]
        else:
            out = [[2 * a]]
    else:
        raise MorphismError(f"unit block between principal factors {src} -> {tgt}")
    out = np.array(out, dtype=object)
    if out.shape != shape:
        raise MorphismError(f"block {block_literal(b)!r} does not fit {src} -> {tgt}")
    return out


def block_from_matrix(mat, src: CartanFactor, tgt: CartanFactor) -> Block:
    """Inverse of :func:`block_matrix` for principal factors.

    Raises :class:`NoRealization` when the matrix has the wrong symmetry,
    negative entries, or an odd entry between types II and III.
    """
    mat = np.asarray(mat, dtype=object)
    vals = [int(x) for x in mat.ravel()]
    if any(v < 0 for v in vals):
        raise NoRealization(f"negative entry in {vals} for {src} -> {tgt}")
    if all(v == 0 for v in vals):
        return ZERO
    sk, tk = src.kind, tgt.kind
    if sk is Kind.I and tk is Kind.I:
        (a, b), (c, d) = mat.tolist()
        if a != d or b != c:
            raise NoRealization(f"I→I block must be [[α,β],[β,α]], got {mat.tolist()}")
        return RectRect(int(a), int(b))
    if sk is Kind.I:
        a, b = mat.ravel().tolist()
        if a != b:
            raise NoRealization(f"I→{tk.name} block must be [α,α], got {[a, b]}")
        return Column(int(a))
    if tk is Kind.I:
        a, b = mat.ravel().tolist()
        if a != b:
            raise NoRealization(f"{sk.name}→I block must be [α;α], got {[a, b]}")
        return Column(int(a))
    (x,) = mat.ravel().tolist()
    if sk is tk:
        return Column(int(x))
    if x % 2:
        raise NoRealization(f"{sk.name}→{tk.name} entry must be even (k↦2αk), got {x}")
    return Column(int(x) // 2)


@dataclass(frozen=True)
class MorphismClass:
    """Morphism ``source -> target`` given by one block per summand pair.

    ``blocks[i][j]`` is the block from ``source[j]`` to ``target[i]``.
    """

    source: tuple[CartanFactor, ...]
    target: tuple[CartanFactor, ...]
    blocks: tuple[tuple[Block, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        blocks = tuple(tuple(_normal(b) for b in row) for row in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if len(blocks) != len(self.target) or any(len(r) != len(self.source) for r in blocks):
            raise MorphismError(
                f"block matrix must be {len(self.target)}x{len(self.source)}, "
                f"got {[len(r) for r in blocks]}"
            )

    def block(self, i: int, j: int) -> Block:
        return self.blocks[i][j]

    def nonzero(self) -> Iterator[tuple[int, int, Block]]:
        for i, row in enumerate(self.blocks):
            for j, b in enumerate(row):
                if not is_zero(b):
                    yield i, j, b

    def literal(self):
        return [[block_literal(b) for b in row] for row in self.blocks]


def zero_morphism(source: Sequence[CartanFactor], target: Sequence[CartanFactor]) -> MorphismClass:
    return MorphismClass(tuple(source), tuple(target), tuple((ZERO,) * len(source) for _ in target))


def _identity_block(f: CartanFactor) -> Block:
    if is_principal_kind(f):
        return RectRect(1, 0) if f.kind is Kind.I else Column(1)
    return UNIT


def identity(Z: Sequence[CartanFactor]) -> MorphismClass:
    Z = tuple(Z)
    blocks = tuple(
        tuple(_identity_block(f) if i == j else ZERO for j in range(len(Z)))
        for i, f in enumerate(Z)
    )
    return MorphismClass(Z, Z, blocks)


def _tro_size(f: CartanFactor) -> int:
    return len(universal_tro(f))


def check_capacity(m: MorphismClass, i: int) -> None:
    """Raise unless the blocks entering target ``i`` fit jointly."""
    tgt = m.target[i]
    incoming = [(j, b) for j, b in enumerate(m.blocks[i]) if not is_zero(b)]
    if not incoming:
        return
    if not is_principal_kind(tgt):
        if len(incoming) > 1:
            raise AdmissibilityError(
                f"target {i} ({tgt}) receives {len(incoming)} nonzero blocks; "
                "non-principal targets take at most one",
                "one incoming edge",
                len(incoming),
                1,
            )
        return
    rows = universal_tro(tgt).summands
    total_left = [0] * len(rows)
    total_right = [0] * len(rows)
    for j, b in incoming:
        src = m.source[j]
        mat = block_matrix(b, src, tgt)
        for r in range(len(rows)):
            for c, (n_j, m_j) in enumerate(universal_tro(src).summands):
                total_left[r] += mat[r, c] * n_j
                total_right[r] += mat[r, c] * m_j
    for r, (k, l) in enumerate(rows):
        _le(f"Σα·n≤k (target {i}, {tgt})", total_left[r], k)
        _le(f"Σα·m≤l (target {i}, {tgt})", total_right[r], l)


def check_morphism(m: MorphismClass) -> None:
    """Raise unless every block and every target's joint capacity is admissible."""
    for i, row in enumerate(m.blocks):
        for j, b in enumerate(row):
            try:
                check_block(b, m.source[j], m.target[i])
            except MorphismError as exc:
                raise type(exc)(f"block ({i},{j}) {m.source[j]}→{m.target[i]}: {exc}") from exc
    for i in range(len(m.target)):
        check_capacity(m, i)


def is_admissible(m: MorphismClass) -> bool:
    try:
        check_morphism(m)
    except MorphismError:
        return False
    return True


def tro_multiplicity(m: MorphismClass) -> np.ndarray:
    """Multiplicity matrix between the universal TROs (object dtype, exact)."""
    rows = [_tro_size(f) for f in m.target]
    cols = [_tro_size(f) for f in m.source]
    out = np.zeros((sum(rows), sum(cols)), dtype=object)
    r0 = 0
    for i, tgt in enumerate(m.target):
        c0 = 0
        for j, src in enumerate(m.source):
            b = m.blocks[i][j]
            if not is_zero(b):
                out[r0 : r0 + rows[i], c0 : c0 + cols[j]] = block_matrix(b, src, tgt)
            c0 += cols[j]
        r0 += rows[i]
    return out


def compose(g: MorphismClass, f: MorphismClass) -> MorphismClass:
    """The class of ``g ∘ f``; multiplicities compose by matrix product."""
    if f.target != g.source:
        raise MorphismError(f"cannot compose: {f.target} != {g.source}")
    blocks = []
    for k, tgt in enumerate(g.target):
        row = []
        for i, src in enumerate(f.source):
            terms = [
                (j, g.blocks[k][j], f.blocks[j][i])
                for j in range(len(f.target))
                if not is_zero(g.blocks[k][j]) and not is_zero(f.blocks[j][i])
            ]
            if not terms:
                row.append(ZERO)
                continue
            if is_principal_kind(src) and is_principal_kind(tgt):
                acc = None
                for j, gb, fb in terms:
                    mid = f.target[j]
                    term = block_matrix(gb, mid, tgt).dot(block_matrix(fb, src, mid))
                    acc = term if acc is None else acc + term
                row.append(block_from_matrix(acc, src, tgt))
            elif len(terms) == 1 and all(isinstance(x, Unit) for x in terms[0][1:]):
                row.append(UNIT)
            else:
                raise MorphismError(f"composite {src}→{tgt} is not multiplicity one")
        blocks.append(tuple(row))
    return MorphismClass(f.source, g.target, tuple(blocks))


# -- enumeration ---------------------------------------------------------


def block_options(src: CartanFactor, tgt: CartanFactor) -> list[Block]:
    """All admissible blocks for ``src -> tgt`` in lexicographic order (zero first)."""
    try:
        pt = pair_type(src, tgt)
    except UnsupportedMorphism:
        return [ZERO]
    if pt in ("S-S", "H-H", "H-S", "E-E"):
        return [ZERO, UNIT] if admissible(UNIT, src, tgt) else [ZERO]
    if src.kind is Kind.I and tgt.kind is Kind.I:
        (m, n), (M, N) = src.params, tgt.params
        out: list[Block] = [ZERO]
        a = 0
        while a * m <= M and a * n <= N:
            b = 0 if a else 1
            while a * m + b * n <= M and a * n + b * m <= N:
                out.append(RectRect(a, b))
                b += 1
            a += 1
        return out
    out = [ZERO]
    a = 1
    while admissible(Column(a), src, tgt):
        out.append(Column(a))
        a += 1
    return out


def iter_morphisms(source: Sequence[CartanFactor], target: Sequence[CartanFactor]) -> Iterator[MorphismClass]:
    """Every admissible morphism class ``source -> target`` (lexicographic)."""
    source, target = tuple(source), tuple(target)
    per_target = []
    for tgt in target:
        rows = []
        for blocks in product(*[block_options(s, tgt) for s in source]):
            probe = MorphismClass(source, (tgt,), (blocks,))
            try:
                check_capacity(probe, 0)
            except AdmissibilityError:
                continue
            rows.append(blocks)
        per_target.append(rows)
    for combo in product(*per_target):
        yield MorphismClass(source, target, tuple(combo))


__all__.append("iter_morphisms")


# -- standard forms --------------------------------------------------------


@dataclass(frozen=True)
class StandardBlock:
    """Placement of one standard-form block inside a target matrix.

    ``cls`` is ``'A'`` (block diagonal, ``k`` copies of the argument and
    ``l`` of its transpose) or ``'B'`` (block anti-diagonal with sign
    ``eps``).  ``row``/``col`` are offsets of the footprint.
    """

    target: int
    source: int
    cls: str
    k: int
    l: int
    eps: int
    row: int
    col: int
    rows: int
    cols: int

    def label(self) -> str:
        if self.cls == "A":
            return f"(A)_{{{self.k},{self.l}}}"
        return f"(B)_{{{self.k},{'+' if self.eps > 0 else '-'}}}"

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "source": self.source,
            "class": self.cls,
            "k": self.k,
            "l": self.l,
            "eps": self.eps,
            "offset": [self.row, self.col],
            "size": [self.rows, self.cols],
            "label": self.label(),
        }


def _standard_shape(b: Block, src: CartanFactor, tgt: CartanFactor):
    """Return (cls, k, l, eps, rows, cols) for a nonzero principal block."""
    sk, tk = src.kind, tgt.kind
    if isinstance(b, RectRect):
        m, n = src.params
        return "A", b.a, b.b, 0, b.a * m + b.b * n, b.a * n + b.b * m
    a = b.a
    if sk is Kind.I:
        m, n = src.params
        eps = -1 if tk is Kind.II else 1
        return "B", a, 0, eps, a * (m + n), a * (m + n)
    n = src.params[0]
    if tk is Kind.I or sk is tk:
        return "A", a, 0, 0, a * n, a * n
    eps = -1 if tk is Kind.II else 1
    return "B", a, 0, eps, 2 * a * n, 2 * a * n


def standard_form(m: MorphismClass) -> tuple[StandardBlock, ...]:
    """Deterministic standard-form representative of ``m``.

    Within each target summand, (A)-blocks are packed along the diagonal in
    source order, then (B)-blocks; the remainder is zero.
    """
    out = []
    for i, tgt in enumerate(m.target):
        shapes = []
        for j, b in enumerate(m.blocks[i]):
            if is_zero(b):
                continue
            src = m.source[j]
            if not (is_principal_kind(src) and is_principal_kind(tgt)):
                raise MorphismError(f"no standard form for non-principal block {src}→{tgt}")
            shapes.append((j, _standard_shape(b, src, tgt)))
        shapes.sort(key=lambda item: (item[1][0], item[0]))
        r = c = 0
        for j, (cls, k, l, eps, rows, cols) in shapes:
            out.append(StandardBlock(i, j, cls, k, l, eps, r, c, rows, cols))
            r += rows
            c += cols
    return tuple(out)
