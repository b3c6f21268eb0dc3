"""Exact K± invariants, morphism classes and inductive limits of finite JB*-triples."""
from .factors import (
    CartanFactor,
    ExcV,
    ExcVI,
    HermIII,
    Hilbertian,
    Kind,
    RectI,
    SpinIV,
    SymplII,
    TROShape,
    canonicalize,
    is_principal,
    minus_triple,
    parse_factor,
    parse_triple,
    rank,
    universal_tro,
)
from .morphisms import (
    Column,
    MorphismClass,
    RectRect,
    UNIT,
    ZERO,
    admissible,
    compose,
    standard_form,
    tro_multiplicity,
)
from .ktheory import K0Data, KMap, check_kpm_map, k0_of, k0_of_morphism, realize
from .bratteli import BratteliDiagram, parse, serialize, telescope
from .limits import compare, limit_presentation, telescope_invariant, verify_witness

__version__ = "0.1.0"

__all__ = [
    "CartanFactor",
    "ExcV",
    "ExcVI",
    "HermIII",
    "Hilbertian",
    "Kind",
    "RectI",
    "SpinIV",
    "SymplII",
    "TROShape",
    "canonicalize",
    "is_principal",
    "minus_triple",
    "parse_factor",
    "parse_triple",
    "rank",
    "universal_tro",
    "Column",
    "MorphismClass",
    "RectRect",
    "UNIT",
    "ZERO",
    "admissible",
    "compose",
    "standard_form",
    "tro_multiplicity",
    "K0Data",
    "KMap",
    "check_kpm_map",
    "k0_of",
    "k0_of_morphism",
    "realize",
    "BratteliDiagram",
    "parse",
    "serialize",
    "telescope",
    "compare",
    "limit_presentation",
    "telescope_invariant",
    "verify_witness",
]
