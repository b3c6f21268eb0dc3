"""Inductive limits of principal diagrams at bounded depth.

The invariant telescope of a diagram is the sequence of K± invariants of its
rows with the induced maps.  Two telescopes are compared by looking for an
intertwining chain

    A[n0] -γ0-> B[m0] -δ0-> A[n1] -γ1-> B[m1] -> ...

whose triangles commute exactly, after first checking a fixed set of
eventual-rank obstructions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator

import numpy as np
from sympy import GF, QQ, ZZ, Matrix
from sympy.matrices.normalforms import invariant_factors
from sympy.polys.matrices import DomainMatrix

from .bratteli import BratteliDiagram, layer_morphism
from .factors import CartanFactor, Kind, is_principal_kind, universal_tro
from .ktheory import K0Data, KMap, check_kpm_map, k0_of, minkowski_image, realize
from .morphisms import (
    ZERO,
    AdmissibilityError,
    Block,
    Column,
    MorphismClass,
    RectRect,
    UnsupportedMorphism,
    admissible,
    block_matrix,
    block_options,
    check_capacity,
    iter_morphisms,
    pair_type,
    tro_multiplicity,
)

__all__ = [
    "InvariantTelescope",
    "LimitPresentation",
    "ComparisonResult",
    "Witness",
    "LimitError",
    "telescope_invariant",
    "limit_presentation",
    "obstructions",
    "compare",
    "verify_witness",
    "EXIT_CODES",
]

EXIT_CODES = {"Isomorphic": 0, "Distinguished": 3, "Inconclusive": 4}


class LimitError(ValueError):
    pass


def _eye(d: int) -> np.ndarray:
    out = np.zeros((d, d), dtype=object)
    for i in range(d):
        out[i, i] = 1
    return out


@dataclass(frozen=True, eq=False)
class InvariantTelescope:
    """K± data of rows ``0..depth`` and the maps between consecutive rows."""

    rows: tuple[tuple[CartanFactor, ...], ...]
    levels: tuple[K0Data, ...]
    maps: tuple[KMap, ...]
    table_mode: str = "oracle"
    _cache: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.levels)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def connecting(self, n: int, k: int) -> np.ndarray:
        """Composed map from level ``k`` to level ``n`` (``k <= n``)."""
        if not 0 <= k <= n < len(self.levels):
            raise LimitError(f"no connecting map {k}→{n}")
        key = (n, k)
        if key not in self._cache:
            if n == k:
                self._cache[key] = _eye(self.levels[k].rank)
            else:
                self._cache[key] = self.maps[n - 1].matrix.dot(self.connecting(n - 1, k))
        return self._cache[key]

    def same_as(self, other: "InvariantTelescope") -> bool:
        return (
            self.rows == other.rows
            and self.levels == other.levels
            and all(np.array_equal(a.matrix, b.matrix) for a, b in zip(self.maps, other.maps))
        )


def telescope_invariant(d: BratteliDiagram, depth: int, table_mode: str = "oracle") -> InvariantTelescope:
    """Levelwise K± invariants and induced maps of rows ``0..depth``."""
    if depth < 0:
        raise LimitError("depth must be nonnegative")
    u = d.unroll(depth) if d.infinite else d
    for lam, row in enumerate(u.rows):
        for i, f in enumerate(row):
            if not is_principal_kind(f):
                raise LimitError(f"vertex [{lam},{i}] {f} is not principal")
    last = min(depth, len(u.rows) - 1)
    levels = tuple(k0_of(u.rows[lam], table_mode) for lam in range(last + 1))
    maps = tuple(
        KMap(tro_multiplicity(layer_morphism(u, lam)), levels[lam], levels[lam + 1]) for lam in range(last)
    )
    return InvariantTelescope(tuple(u.rows[: last + 1]), levels, maps, table_mode)


# -- presentation --------------------------------------------------------------


@dataclass(frozen=True)
class LimitPresentation:
    anchor: int
    free_rank: int
    invariant_factors: tuple[tuple[int, ...], ...]
    kernel_ranks: tuple[int, ...]
    stabilized: bool
    scale_image: frozenset
    delta_plus_image: frozenset
    delta_minus_image: frozenset
    sigma: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "anchorLevel": self.anchor,
            "group": {
                "freeRank": self.free_rank,
                "invariantFactors": [list(x) for x in self.invariant_factors],
                "kernelRanks": list(self.kernel_ranks),
                "stabilized": self.stabilized,
            },
            "scaleImage": [list(v) for v in sorted(self.scale_image)],
            "deltaPlusImage": [list(v) for v in sorted(self.delta_plus_image)],
            "deltaMinusImage": [list(v) for v in sorted(self.delta_minus_image)],
            "sigma": list(self.sigma),
        }


_SETS = ("scale", "deltaPlus", "deltaMinus")


def push_forward(level: K0Data, mat: np.ndarray, name: str) -> frozenset:
    """Image of a marked set of ``level`` under ``mat``."""
    return frozenset(minkowski_image(level.parts, level.part_slices(), mat, name))


def _smith(mat: np.ndarray) -> tuple[int, ...]:
    if mat.size == 0 or not mat.any():
        return ()
    return tuple(int(x) for x in invariant_factors(Matrix(mat.tolist())) if x != 0)


def limit_presentation(t: InvariantTelescope, N: int) -> LimitPresentation:
    """Level-``N`` snapshot of the limit invariant.

    Marked sets are unions over ``k <= N`` of the level-``k`` sets pushed to
    level ``N``.  Group data records the Smith invariant factors and kernel
    rank of every layer map up to ``N``; ``stabilized`` is set when the last
    three layers have equal Smith data.
    """
    if not 0 <= N < len(t.levels):
        raise LimitError(f"anchor {N} out of range 0..{len(t.levels) - 1}")
    images = {}
    for name in _SETS:
        acc: set = set()
        for k in range(N + 1):
            acc |= push_forward(t.levels[k], t.connecting(N, k), name)
        images[name] = frozenset(acc)
    factors, kernels = [], []
    for k in range(N):
        mat = t.maps[k].matrix
        inv = _smith(mat)
        factors.append(inv)
        kernels.append(mat.shape[1] - len(inv))
    stabilized = len(factors) >= 3 and factors[-1] == factors[-2] == factors[-3]
    return LimitPresentation(
        N,
        t.levels[N].rank,
        tuple(factors),
        tuple(kernels),
        stabilized,
        images["scale"],
        images["deltaPlus"],
        images["deltaMinus"],
        t.levels[N].sigma,
    )


# -- obstructions --------------------------------------------------------------


def _rank(mat: np.ndarray, domain) -> int:
    rows, cols = mat.shape
    if rows == 0 or cols == 0:
        return 0
    dm = DomainMatrix([[ZZ(int(x)) for x in row] for row in mat.tolist()], (rows, cols), ZZ)
    return int(dm.convert_to(domain).rank())


def _sigma_basis(level: K0Data, sign: int) -> np.ndarray:
    cols = []
    for i, j in enumerate(level.sigma):
        if i < j or (i == j and sign == 1):
            v = [0] * level.rank
            v[i] = 1
            if i != j:
                v[j] = sign
            cols.append(v)
    return np.array(cols, dtype=object).T.reshape(level.rank, len(cols))


def _parity_quotient(level: K0Data, name: str) -> tuple[np.ndarray, np.ndarray]:
    """Projection and section for ``K0 / <Δ>`` reduced mod 2."""
    proj, sect = [], []
    start = 0
    for part, w in zip(level.parts, level.widths):
        if w == 1:
            if part.rule(name) == "even":
                row = [0] * level.rank
                row[start] = 1
                proj.append(row)
        else:
            # diagonal lattice in a rectangular pair: (a, b) -> a + b
            row = [0] * level.rank
            row[start] = row[start + 1] = 1
            proj.append(row)
        start += w
    for row in proj:
        col = [0] * level.rank
        col[row.index(1)] = 1
        sect.append(col)
    p = np.array(proj, dtype=object).reshape(len(proj), level.rank)
    s = np.array(sect, dtype=object).T.reshape(level.rank, len(sect))
    return p, s


def obstructions(t: InvariantTelescope) -> dict[str, dict]:
    """Eventual ranks of direct systems attached to the telescope.

    Each entry is ``{"value": r, "stable": bool}`` where ``r`` is the rank of
    the composed map from level ``D // 2`` to the last level ``D``.  Entries
    are marked stable when the neighbouring estimates agree.
    """
    D = t.depth
    out: dict[str, dict] = {}

    def estimate(rank_of) -> dict:
        if D < 2:
            return {"value": rank_of(D // 2, D) if D >= 0 else 0, "stable": False}
        K = D // 2
        lo, mid, hi = rank_of(K - 1, D), rank_of(K, D), rank_of(K, D - 1)
        return {"value": mid, "stable": lo == mid == hi}

    out["rationalRank"] = estimate(lambda k, n: _rank(t.connecting(n, k), QQ))
    for sign, name in ((1, "sigmaPlusRank"), (-1, "sigmaMinusRank")):
        out[name] = estimate(lambda k, n, s=sign: _rank(t.connecting(n, k).dot(_sigma_basis(t.levels[k], s)), QQ))
    for p in (2, 3, 5):
        out[f"mod{p}Rank"] = estimate(lambda k, n, p=p: _rank(t.connecting(n, k), GF(p)))
    for name, key in (("deltaPlus", "deltaPlusParity"), ("deltaMinus", "deltaMinusParity")):
        quot = [_parity_quotient(lv, name) for lv in t.levels]

        def induced(k, n, quot=quot):
            pn, _ = quot[n]
            _, sk = quot[k]
            return pn.dot(t.connecting(n, k)).dot(sk)

        out[key] = estimate(lambda k, n, f=induced: _rank(f(k, n), GF(2)))
    return out


# -- witness search --------------------------------------------------------------


@dataclass
class Witness:
    """Intertwining chain between two invariant telescopes.

    ``maps[0]`` is ``γ0: A[a_levels[0]] → B[b_levels[0]]``, ``maps[1]`` is
    ``δ0: B[b_levels[0]] → A[a_levels[1]]`` and so on.
    """

    a: InvariantTelescope
    b: InvariantTelescope
    a_levels: list[int]
    b_levels: list[int]
    maps: list[KMap]
    morphisms: list[MorphismClass]

    @property
    def gammas(self) -> list[KMap]:
        return self.maps[0::2]

    @property
    def deltas(self) -> list[KMap]:
        return self.maps[1::2]

    def to_json(self) -> dict:
        return {
            "aLevels": list(self.a_levels),
            "bLevels": list(self.b_levels),
            "gamma": [g.tolist() for g in self.gammas],
            "delta": [d.tolist() for d in self.deltas],
            "morphisms": [
                {
                    "source": [f.literal() for f in m.source],
                    "target": [f.literal() for f in m.target],
                    "blocks": m.literal(),
                }
                for m in self.morphisms
            ],
        }


def _endpoints(w: Witness, idx: int):
    """(source side, source level, target side, target level) of map ``idx``."""
    k, odd = divmod(idx, 2)
    if not odd:
        return "A", w.a_levels[k], "B", w.b_levels[k]
    return "B", w.b_levels[k], "A", w.a_levels[k + 1]


def verify_witness(w: Witness) -> bool:
    """Replay every triangle of the chain in exact integer arithmetic."""
    try:
        tel = {"A": w.a, "B": w.b}
        if len(w.maps) < 3:
            return False
        for levels in (w.a_levels, w.b_levels):
            if any(b <= a for a, b in zip(levels, levels[1:])):
                return False
        for idx, g in enumerate(w.maps):
            s, sl, t, tl = _endpoints(w, idx)
            if g.source != tel[s].levels[sl] or g.target != tel[t].levels[tl]:
                return False
            if not check_kpm_map(g):
                return False
        for idx in range(len(w.maps) - 1):
            s, sl, _, _ = _endpoints(w, idx)
            _, _, t, tl = _endpoints(w, idx + 1)
            composite = w.maps[idx + 1].matrix.dot(w.maps[idx].matrix)
            if not np.array_equal(composite, tel[s].connecting(tl, sl)):
                return False
        for m, g in zip(w.morphisms, w.maps):
            if not np.array_equal(tro_multiplicity(m), g.matrix):
                return False
        return True
    except (IndexError, ValueError):
        return False


class _Budget(Exception):
    pass


class _Counter:
    def __init__(self, budget: int):
        self.budget = budget
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise _Budget


def _tro_sizes(Z) -> list[int]:
    return [len(universal_tro(f)) for f in Z]


def _bound(unit: np.ndarray, M: np.ndarray) -> int | None:
    pos = unit > 0
    if not pos.any():
        return None
    return min(int(M[idx]) // int(unit[idx]) for idx in zip(*np.nonzero(pos)))


def _candidates(s: CartanFactor, t: CartanFactor, C_j: np.ndarray, M_i: np.ndarray) -> list[Block]:
    """Blocks ``s → t`` whose contribution ``block · C_j`` can fit under ``M_i``."""
    if not (C_j.any() and is_principal_kind(s) and is_principal_kind(t)):
        return block_options(s, t)
    try:
        pair_type(s, t)
    except UnsupportedMorphism:
        return [ZERO]
    if _both_rect(s, t):
        amax = _bound(block_matrix(RectRect(1, 0), s, t).dot(C_j), M_i)
        bmax = _bound(block_matrix(RectRect(0, 1), s, t).dot(C_j), M_i)
        if amax is None or bmax is None:
            return block_options(s, t)
        out = []
        for a in range(amax + 1):
            for b in range(bmax + 1):
                blk = ZERO if (a, b) == (0, 0) else RectRect(a, b)
                if admissible(blk, s, t):
                    out.append(blk)
        return out
    amax = _bound(block_matrix(Column(1), s, t).dot(C_j), M_i)
    if amax is None:
        return block_options(s, t)
    return [ZERO if a == 0 else Column(a) for a in range(amax + 1) if admissible(Column(a), s, t)]


def _both_rect(s: CartanFactor, t: CartanFactor) -> bool:
    return s.kind is Kind.I and t.kind is Kind.I


def _solve_left(
    mid: tuple[CartanFactor, ...],
    tgt: tuple[CartanFactor, ...],
    C: np.ndarray,
    M: np.ndarray,
    counter: _Counter,
) -> Iterator[MorphismClass]:
    """Morphism classes ``X: mid → tgt`` with ``tro(X) · C == M``."""
    counter.tick()
    # X · C = M needs ker C ⊆ ker M
    if C.size and _rank(np.vstack([C, M]), QQ) != _rank(C, QQ):
        return
    if not C.size and M.any():
        return
    mid_sizes, tgt_sizes = _tro_sizes(mid), _tro_sizes(tgt)
    mid_off = np.cumsum([0] + mid_sizes)
    tgt_off = np.cumsum([0] + tgt_sizes)
    per_target = []
    for i, t in enumerate(tgt):
        M_i = M[tgt_off[i] : tgt_off[i + 1], :]
        options = []
        for j, s in enumerate(mid):
            C_j = C[mid_off[j] : mid_off[j + 1], :]
            opts = []
            for b in _candidates(s, t, C_j, M_i):
                counter.tick()
                contrib = block_matrix(b, s, t).dot(C_j) if C_j.size else np.zeros_like(M_i)
                if (contrib > M_i).any():
                    continue
                opts.append((b, contrib))
            options.append(opts)
        rows = []

        def rec(j, acc, chosen):
            if j == len(mid):
                if np.array_equal(acc, M_i):
                    probe = MorphismClass(mid, (t,), (tuple(chosen),))
                    try:
                        check_capacity(probe, 0)
                    except AdmissibilityError:
                        return
                    rows.append(tuple(chosen))
                return
            for b, contrib in options[j]:
                counter.tick()
                nxt = acc + contrib
                if (nxt > M_i).any():
                    continue
                rec(j + 1, nxt, chosen + [b])

        rec(0, np.zeros_like(M_i), [])
        if not rows:
            return
        per_target.append(rows)
    for combo in product(*per_target):
        counter.tick()
        yield MorphismClass(mid, tgt, tuple(combo))


class _Search:
    def __init__(self, a: InvariantTelescope, b: InvariantTelescope, budget: int):
        self.tel = {"A": a, "B": b}
        self.counter = _Counter(budget)

    def run(self):
        a, b = self.tel["A"], self.tel["B"]
        for n0 in range(len(a.levels)):
            for m0 in range(len(b.levels)):
                src, tgt = a.rows[n0], b.rows[m0]
                for g in iter_morphisms(src, tgt):
                    self.counter.tick()
                    chain = self._extend([g], {"A": [n0], "B": [m0]}, "B")
                    if chain is not None:
                        return chain
        return None

    def _extend(self, chain, levels, at):
        """``at`` is the side the last map lands on; extend towards the other side."""
        other = "A" if at == "B" else "B"
        tel_o = self.tel[other]
        prev = levels[other][-1]
        if prev == tel_o.depth:
            return (chain, levels) if len(chain) >= 3 else None
        last = chain[-1]
        C = tro_multiplicity(last)
        for nxt in range(prev + 1, tel_o.depth + 1):
            M = tel_o.connecting(nxt, prev)
            for X in _solve_left(last.target, tel_o.rows[nxt], C, M, self.counter):
                new_levels = {k: list(v) for k, v in levels.items()}
                new_levels[other].append(nxt)
                out = self._extend(chain + [X], new_levels, other)
                if out is not None:
                    return out
        return None


@dataclass
class ComparisonResult:
    verdict: str
    depth: int
    nodes: int = 0
    witness: Witness | None = None
    obstruction: dict | None = None
    obstructions: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "depth": self.depth, "nodes": self.nodes}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.obstruction is not None:
            out["obstruction"] = self.obstruction
        out["obstructions"] = self.obstructions
        return out


def compare(
    dA: BratteliDiagram | InvariantTelescope,
    dB: BratteliDiagram | InvariantTelescope,
    depth: int = 6,
    budget: int = 100_000,
    table_mode: str = "oracle",
) -> ComparisonResult:
    """Decide isomorphism of two principal limits at bounded depth.

    Returns ``Distinguished`` when a stable obstruction differs,
    ``Isomorphic`` with a verified witness when the search finds one, and
    ``Inconclusive`` otherwise.
    """
    if depth < 1 or budget < 1:
        raise LimitError("depth and budget must be positive")
    ta = dA if isinstance(dA, InvariantTelescope) else telescope_invariant(dA, depth, table_mode)
    tb = dB if isinstance(dB, InvariantTelescope) else telescope_invariant(dB, depth, table_mode)
    oa, ob = obstructions(ta), obstructions(tb)
    summary = {k: {"A": oa[k], "B": ob[k]} for k in oa}
    for key in oa:
        if oa[key]["stable"] and ob[key]["stable"] and oa[key]["value"] != ob[key]["value"]:
            ob_info = {"name": key, "A": oa[key]["value"], "B": ob[key]["value"]}
            return ComparisonResult("Distinguished", depth, 0, None, ob_info, summary)
    search = _Search(ta, tb, budget)
    try:
        found = search.run()
    except _Budget:
        found = None
    if found is None:
        return ComparisonResult("Inconclusive", depth, search.counter.nodes, None, None, summary)
    chain, levels = found
    maps = []
    tel = {"A": ta, "B": tb}
    for idx, m in enumerate(chain):
        k, odd = divmod(idx, 2)
        s, sl, t, tl = ("A", levels["A"][k], "B", levels["B"][k]) if not odd else ("B", levels["B"][k], "A", levels["A"][k + 1])
        maps.append(KMap(tro_multiplicity(m), tel[s].levels[sl], tel[t].levels[tl]))
    realized = [realize(g, m.source, m.target) for g, m in zip(maps, chain)]
    w = Witness(ta, tb, levels["A"], levels["B"], maps, realized)
    if not verify_witness(w):  # pragma: no cover - search only builds exact chains
        raise LimitError("internal error: witness failed verification")
    return ComparisonResult("Isomorphic", depth, search.counter.nodes, w, None, summary)
