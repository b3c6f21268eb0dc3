"""Cartan factors, finite triples and their universal TRO shapes.

A finite-dimensional JB*-triple is stored as an ordered tuple of Cartan
factors.  Factors are immutable values and hash by ``(kind, params)``.

Factor literal syntax: ``I(m,n)``, ``II(n)``, ``III(n)``, ``IV(n)``, ``V``,
``VI``.  A finite triple is written as a JSON array of literals.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from math import comb
from typing import Callable, Iterable, Sequence

__all__ = [
    "Kind",
    "CartanFactor",
    "FiniteTriple",
    "TROShape",
    "FactorError",
    "RectI",
    "SymplII",
    "HermIII",
    "SpinIV",
    "ExcV",
    "ExcVI",
    "Hilbertian",
    "parse_factor",
    "parse_triple",
    "canonicalize",
    "canonicalize_triple",
    "rank",
    "dimension",
    "universal_tro",
    "minus_triple",
    "is_principal",
    "is_principal_kind",
    "factor_class",
    "spin_block_size",
]


class FactorError(ValueError):
    """Malformed factor, literal, or a factor outside an operation's domain."""


class Kind(enum.IntEnum):
    # Ordering is used for canonical vertex sorting.
    I = 1
    II = 2
    III = 3
    IV = 4
    V = 5
    VI = 6


_MIN_PARAM = {Kind.II: 2, Kind.III: 1, Kind.IV: 2}


@dataclass(frozen=True, order=True)
class CartanFactor:
    kind: Kind
    params: tuple[int, ...] = ()

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        params = tuple(int(p) for p in self.params)
        object.__setattr__(self, "params", params)
        if kind in (Kind.V, Kind.VI):
            if params:
                raise FactorError(f"exceptional factor {kind.name} takes no parameters")
        elif kind is Kind.I:
            if len(params) != 2 or min(params) < 1:
                raise FactorError(f"I(m,n) needs two parameters >= 1, got {params}")
        else:
            if len(params) != 1 or params[0] < _MIN_PARAM[kind]:
                raise FactorError(
                    f"{kind.name}(n) needs one parameter >= {_MIN_PARAM[kind]}, got {params}"
                )

    @property
    def hilbertian(self) -> bool:
        """True for a rectangular factor with a side of length one."""
        return self.kind is Kind.I and min(self.params) == 1

    @property
    def dimension(self) -> int:
        return dimension(self)

    @property
    def rank(self) -> int:
        return rank(self)

    def literal(self) -> str:
        if not self.params:
            return self.kind.name
        return f"{self.kind.name}({','.join(str(p) for p in self.params)})"

    def __str__(self):
        return self.literal()

    def __repr__(self):
        return f"CartanFactor({self.literal()})"


def RectI(m: int, n: int) -> CartanFactor:
    return CartanFactor(Kind.I, (m, n))


def SymplII(n: int) -> CartanFactor:
    return CartanFactor(Kind.II, (n,))


def HermIII(n: int) -> CartanFactor:
    return CartanFactor(Kind.III, (n,))


def SpinIV(n: int) -> CartanFactor:
    return CartanFactor(Kind.IV, (n,))


ExcV = CartanFactor(Kind.V)
ExcVI = CartanFactor(Kind.VI)


def Hilbertian(n: int) -> CartanFactor:
    """The n-dimensional Hilbert space, stored as ``I(1,n)``."""
    return CartanFactor(Kind.I, (1, n))


FiniteTriple = tuple  # tuple[CartanFactor, ...]

_LITERAL = re.compile(r"^\s*(VI|V|IV|III|II|I)\s*(?:\(\s*(\d+)\s*(?:,\s*(\d+)\s*)?\))?\s*$")


def parse_factor(text: str) -> CartanFactor:
    """Parse a factor literal such as ``"I(2,3)"`` or ``"VI"``."""
    if not isinstance(text, str):
        raise FactorError(f"factor literal must be a string, got {text!r}")
    match = _LITERAL.match(text)
    if match is None:
        raise FactorError(f"bad factor literal {text!r}")
    name, a, b = match.groups()
    params = tuple(int(x) for x in (a, b) if x is not None)
    return CartanFactor(Kind[name], params)


def parse_triple(items: Iterable[str]) -> tuple[CartanFactor, ...]:
    return tuple(parse_factor(x) for x in items)


def canonicalize(f: CartanFactor) -> CartanFactor:
    """Return the canonical representative of ``f`` among isomorphic factors.

    ``I(2,2)``, ``II(4)`` and ``III(2)`` are spin factors of dimensions 4, 6
    and 3.  Rectangular factors with a side of length one, ``II(2)`` and
    ``III(1)`` are Hilbert spaces and become ``I(1,N)``.
    """
    kind, p = f.kind, f.params
    if kind is Kind.I:
        if p == (2, 2):
            return SpinIV(4)
        if min(p) == 1:
            return Hilbertian(max(p))
    elif kind is Kind.II:
        if p[0] == 4:
            return SpinIV(6)
        if p[0] == 2:
            return Hilbertian(1)
    elif kind is Kind.III:
        if p[0] == 2:
            return SpinIV(3)
        if p[0] == 1:
            return Hilbertian(1)
    return f


def canonicalize_triple(Z: Sequence[CartanFactor]) -> tuple[CartanFactor, ...]:
    return tuple(canonicalize(f) for f in Z)


def dimension(f: CartanFactor) -> int:
    kind, p = f.kind, f.params
    if kind is Kind.I:
        return p[0] * p[1]
    if kind is Kind.II:
        return p[0] * (p[0] - 1) // 2
    if kind is Kind.III:
        return p[0] * (p[0] + 1) // 2
    if kind is Kind.IV:
        return p[0]
    return 16 if kind is Kind.V else 27


# Standard values for the exceptional factors, used only by rank checks.
_EXCEPTIONAL_RANK = {Kind.V: 2, Kind.VI: 3}


def rank(f: CartanFactor) -> int:
    kind, p = f.kind, f.params
    if kind is Kind.I:
        return min(p)
    if kind is Kind.II:
        return p[0] // 2
    if kind is Kind.III:
        return p[0]
    if kind is Kind.IV:
        return 2
    return _EXCEPTIONAL_RANK[kind]


def spin_block_size(n: int) -> int:
    """Default matrix size of a spin factor's TRO blocks (Clifford size)."""
    return 2 ** (n // 2)


@dataclass(frozen=True)
class TROShape:
    """Direct sum of rectangular ``k x l`` TRO blocks.

    ``k`` is the block size of the left C*-algebra, ``l`` of the right one.
    """

    summands: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        summands = tuple((int(k), int(l)) for k, l in self.summands)
        for k, l in summands:
            if k < 1 or l < 1:
                raise FactorError(f"TRO summand ({k},{l}) has a zero side")
        object.__setattr__(self, "summands", summands)

    def __len__(self):
        return len(self.summands)

    def __iter__(self):
        return iter(self.summands)

    @property
    def left_sizes(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.summands)

    @property
    def total_dimension(self) -> int:
        return sum(k * l for k, l in self.summands)


def _factor_tro(f: CartanFactor, spin_size: Callable[[int], int]) -> list[tuple[int, int]]:
    kind, p = f.kind, f.params
    if kind is Kind.I:
        if f.hilbertian:
            N = max(p)
            return [(comb(N, j), comb(N, j + 1)) for j in range(N)]
        m, n = p
        return [(m, n), (n, m)]
    if kind in (Kind.II, Kind.III):
        return [(p[0], p[0])]
    if kind is Kind.IV:
        s = spin_size(p[0])
        return [(s, s)] if p[0] % 2 else [(s, s), (s, s)]
    return []


def universal_tro(
    Z: Sequence[CartanFactor] | CartanFactor,
    spin_size: Callable[[int], int] = spin_block_size,
) -> TROShape:
    """Block shape of the universal TRO of ``Z``, concatenated over summands.

    Spin factors contribute one block for odd and two for even dimension;
    ``spin_size`` sets the block size.  Exceptional factors contribute nothing.
    """
    if isinstance(Z, CartanFactor):
        Z = (Z,)
    out: list[tuple[int, int]] = []
    for f in Z:
        out.extend(_factor_tro(f, spin_size))
    return TROShape(tuple(out))


def is_principal_kind(f: CartanFactor) -> bool:
    """True if ``f`` is presented as a non-Hilbertian factor of type I, II or III.

    This looks at the presentation only; ``III(2)`` counts even though it is
    isomorphic to a spin factor.  Use :func:`is_principal` for the
    isomorphism-invariant notion.
    """
    if f.kind is Kind.I:
        return min(f.params) >= 2
    if f.kind is Kind.II:
        return True
    if f.kind is Kind.III:
        return f.params[0] >= 2
    return False


def is_principal(Z: Sequence[CartanFactor]) -> bool:
    """True iff every summand of ``Z`` is, up to isomorphism, principal."""
    return all(is_principal_kind(canonicalize(f)) for f in Z)


def factor_class(f: CartanFactor) -> str:
    """One of ``'P'``, ``'E'``, ``'S'``, ``'H'`` for a canonical factor."""
    if f.kind in (Kind.V, Kind.VI):
        return "E"
    if f.kind is Kind.IV:
        return "S"
    if f.hilbertian:
        return "H"
    return "P"


def minus_triple(Z: Sequence[CartanFactor]) -> tuple[CartanFactor, ...]:
    """The triple of elements reversed in sign by the canonical antiautomorphism.

    Hermitian and symplectic summands swap; rectangular summands are kept.
    """
    out = []
    for f in Z:
        if not is_principal_kind(f):
            raise FactorError(f"minus triple needs principal summands, got {f}")
        if f.kind is Kind.III:
            out.append(SymplII(f.params[0]))
        elif f.kind is Kind.II:
            out.append(HermIII(f.params[0]))
        else:
            out.append(f)
    return tuple(out)
