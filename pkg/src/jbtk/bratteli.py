"""Ternary Bratteli diagrams: parsing, validation, telescoping, decomposition.

JSON layout::

    {"rows": [["I(2,3)"], ["I(8,7)", "III(5)"]],
     "edges": [{"from": [0, 0], "to": [1, 0], "label": [1, 2]}],
     "period": {"start": 2, "rows": [...], "edges": [...],
                "growth": {"mul": 2, "add": 0}},
     "meta": {"name": "..."}}

Period edges use row indices relative to the period block; an edge into row
``len(period.rows)`` lands in row 0 of the next copy.  At copy ``c`` every
parameter ``p`` of a period row becomes ``p * mul**c + add * c``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Sequence

from .factors import CartanFactor, FactorError, canonicalize, factor_class, parse_factor
from .morphisms import (
    Block,
    MorphismClass,
    MorphismError,
    Unit,
    ZERO,
    block_literal,
    check_block,
    compose,
    is_zero,
    parse_block,
    check_capacity,
)

__all__ = [
    "Edge",
    "Period",
    "BratteliDiagram",
    "DiagramError",
    "DiagramSyntaxError",
    "ValidationError",
    "NotStabilized",
    "MultiplicityError",
    "parse",
    "load",
    "serialize",
    "canonical_form",
    "layer_morphism",
    "telescope",
    "classify_vertices",
    "decompose",
    "path_classes",
    "export_dot",
    "CLASS_ORDER",
]

CLASS_ORDER = ("P", "E", "S", "H")


class DiagramError(ValueError):
    pass


class DiagramSyntaxError(DiagramError):
    def __init__(self, message: str, lineno: int = 0, colno: int = 0):
        super().__init__(message)
        self.lineno = lineno
        self.colno = colno


class ValidationError(DiagramError):
    pass


class NotStabilized(DiagramError):
    def __init__(self, depth: int, detail: str = ""):
        super().__init__(f"classes not stabilized at depth {depth}" + (f": {detail}" if detail else ""))
        self.depth = depth


class MultiplicityError(DiagramError):
    pass


Vertex = tuple[int, int]


@dataclass(frozen=True)
class Edge:
    src: Vertex
    dst: Vertex
    label: Block

    def to_json(self) -> dict:
        return {"from": list(self.src), "to": list(self.dst), "label": block_literal(self.label)}


@dataclass(frozen=True)
class Period:
    start: int
    rows: tuple[tuple[CartanFactor, ...], ...]
    edges: tuple[Edge, ...]
    mul: int = 1
    add: int = 0

    @property
    def length(self) -> int:
        return len(self.rows)

    @property
    def grows(self) -> bool:
        return self.mul != 1 or self.add != 0

    def factor_at(self, f: CartanFactor, copy: int) -> CartanFactor:
        if copy == 0 or not f.params:
            return f
        params = tuple(p * self.mul**copy + self.add * copy for p in f.params)
        return canonicalize(CartanFactor(f.kind, params))


@dataclass(frozen=True, eq=True)
class BratteliDiagram:
    """Rows of canonical factors joined by labelled edges between consecutive rows.

    A diagram with ``period`` is infinite; ``rows`` then holds the explicit
    prefix and :meth:`row` generates later rows.
    """

    rows: tuple[tuple[CartanFactor, ...], ...]
    edges: tuple[Edge, ...]
    period: Period | None = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    __hash__ = None  # meta is a dict

    @property
    def infinite(self) -> bool:
        return self.period is not None

    @property
    def n_rows(self) -> int | None:
        return None if self.infinite else len(self.rows)

    def row(self, lam: int) -> tuple[CartanFactor, ...]:
        if lam < 0:
            raise DiagramError(f"row {lam} out of range")
        if lam < len(self.rows):
            return self.rows[lam]
        if self.period is None:
            raise DiagramError(f"row {lam} out of range (diagram has {len(self.rows)} rows)")
        c, a = divmod(lam - self.period.start, self.period.length)
        return tuple(self.period.factor_at(f, c) for f in self.period.rows[a])

    def layer_edges(self, lam: int) -> list[Edge]:
        """Edges from row ``lam`` to row ``lam + 1`` in absolute coordinates."""
        if self.period is None or lam < self.period.start:
            if self.period is None and lam + 1 >= len(self.rows):
                raise DiagramError(f"layer {lam} out of range")
            return [e for e in self.edges if e.src[0] == lam]
        p = self.period
        a = (lam - p.start) % p.length
        shift = lam - a
        return [
            Edge((shift + e.src[0], e.src[1]), (shift + e.dst[0], e.dst[1]), e.label)
            for e in p.edges
            if e.src[0] == a
        ]

    def unroll(self, depth: int) -> "BratteliDiagram":
        """Finite diagram with rows ``0..depth`` (or all rows if fewer)."""
        last = depth if self.infinite else min(depth, len(self.rows) - 1)
        rows = tuple(self.row(lam) for lam in range(last + 1))
        edges = tuple(e for lam in range(last) for e in self.layer_edges(lam))
        meta = dict(self.meta)
        if self.period is not None:
            meta["unrolledFrom"] = {"period": self.period.length, "growth": self.period.grows}
        out = BratteliDiagram(rows, edges, None, meta)
        if self.infinite:
            # parse only checked the first two copies of the period
            for lam in range(self.period.start, last):
                _check_layer(out, lam)
        return out


# -- parsing and validation -------------------------------------------------


def _fail(msg: str):
    raise ValidationError(msg)


def _parse_rows(raw, where: str) -> tuple[tuple[CartanFactor, ...], ...]:
    if not isinstance(raw, list) or not all(isinstance(r, list) for r in raw):
        _fail(f"{where}: rows must be a list of lists of factor literals")
    out = []
    for lam, row in enumerate(raw):
        parsed = []
        for i, lit in enumerate(row):
            try:
                parsed.append(canonicalize(parse_factor(lit)))
            except FactorError as exc:
                _fail(f"{where} vertex [{lam},{i}]: {exc}")
        out.append(tuple(parsed))
    return tuple(out)


def _vertex(raw, what: str) -> Vertex:
    if (
        not isinstance(raw, list)
        or len(raw) != 2
        or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in raw)
    ):
        _fail(f"{what} must be [row, index], got {raw!r}")
    return raw[0], raw[1]


def _parse_edges(raw, where: str, row_size) -> tuple[Edge, ...]:
    if not isinstance(raw, list):
        _fail(f"{where}: edges must be a list")
    out, seen = [], set()
    for k, item in enumerate(raw):
        if not isinstance(item, dict) or set(item) != {"from", "to", "label"}:
            _fail(f"{where} edge #{k}: needs exactly the keys from, to, label")
        src = _vertex(item["from"], f"{where} edge #{k} 'from'")
        dst = _vertex(item["to"], f"{where} edge #{k} 'to'")
        try:
            label = parse_block(item["label"])
        except MorphismError as exc:
            _fail(f"{where} edge {list(src)}->{list(dst)}: {exc}")
        if is_zero(label):
            _fail(f"{where} edge {list(src)}->{list(dst)}: zero label (omit the edge instead)")
        if dst[0] != src[0] + 1:
            _fail(f"{where} edge {list(src)}->{list(dst)}: edges must join consecutive rows")
        for v in (src, dst):
            size = row_size(v[0])
            if size is None or v[1] >= size:
                _fail(f"{where} edge {list(src)}->{list(dst)}: no vertex {list(v)}")
        if (src, dst) in seen:
            _fail(f"{where} edge {list(src)}->{list(dst)}: duplicate edge")
        seen.add((src, dst))
        out.append(Edge(src, dst, label))
    return tuple(out)


def _layer_blocks(d: BratteliDiagram, lam: int) -> MorphismClass:
    src, tgt = d.row(lam), d.row(lam + 1)
    blocks = [[ZERO] * len(src) for _ in tgt]
    for e in d.layer_edges(lam):
        blocks[e.dst[1]][e.src[1]] = e.label
    return MorphismClass(src, tgt, tuple(tuple(r) for r in blocks))


def _check_layer(d: BratteliDiagram, lam: int) -> MorphismClass:
    m = _layer_blocks(d, lam)
    for e in d.layer_edges(lam):
        s, t = m.source[e.src[1]], m.target[e.dst[1]]
        try:
            check_block(e.label, s, t)
        except MorphismError as exc:
            raise ValidationError(
                f"edge {list(e.src)}->{list(e.dst)} {s}→{t} label "
                f"{json.dumps(block_literal(e.label))}: {exc}"
            ) from exc
    for i, t in enumerate(m.target):
        try:
            check_capacity(m, i)
        except MorphismError as exc:
            raise ValidationError(f"target vertex [{lam + 1},{i}] ({t}): {exc}") from exc
    return m


def _from_obj(obj) -> BratteliDiagram:
    if not isinstance(obj, dict):
        _fail("top level must be an object")
    unknown = set(obj) - {"rows", "edges", "period", "meta"}
    if unknown:
        _fail(f"unknown keys {sorted(unknown)}")
    for key in ("rows", "edges"):
        if key not in obj:
            _fail(f"missing key '{key}'")
    rows = _parse_rows(obj["rows"], "rows")
    meta = obj.get("meta", {})
    if not isinstance(meta, dict):
        _fail("meta must be an object")

    period = None
    praw = obj.get("period")
    if praw is not None:
        if not isinstance(praw, dict) or not {"start", "rows", "edges"} <= set(praw):
            _fail("period needs start, rows and edges")
        if set(praw) - {"start", "rows", "edges", "growth"}:
            _fail(f"unknown period keys {sorted(set(praw) - {'start', 'rows', 'edges', 'growth'})}")
        if praw["start"] != len(rows):
            _fail(f"period start {praw['start']!r} must equal the number of explicit rows {len(rows)}")
        prow = _parse_rows(praw["rows"], "period rows")
        if not prow:
            _fail("period must contain at least one row")
        plen = len(prow)
        pedges = _parse_edges(
            praw["edges"],
            "period",
            lambda a: len(prow[a % plen]) if 0 <= a <= plen else None,
        )
        growth = praw.get("growth", {"mul": 1, "add": 0})
        if (
            not isinstance(growth, dict)
            or set(growth) != {"mul", "add"}
            or not all(isinstance(growth[k], int) and not isinstance(growth[k], bool) for k in growth)
            or growth["mul"] < 1
            or growth["add"] < 0
        ):
            _fail("growth must be {\"mul\": int >= 1, \"add\": int >= 0}")
        period = Period(len(rows), prow, pedges, growth["mul"], growth["add"])

    def row_size(lam):
        if 0 <= lam < len(rows):
            return len(rows[lam])
        if period is not None and lam == len(rows):
            return len(period.rows[0])
        return None

    edges = _parse_edges(obj["edges"], "edges", row_size)
    d = BratteliDiagram(rows, edges, period, meta)
    last = len(rows) - 1
    if period is not None:
        last = len(rows) + 2 * period.length - 1
    for lam in range(max(last, 0)):
        _check_layer(d, lam)
    return d


def parse(text: bytes | str) -> BratteliDiagram:
    """Parse and validate a diagram from JSON text."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DiagramSyntaxError(f"byte {exc.start}: not UTF-8") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramSyntaxError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", exc.lineno, exc.colno) from exc
    return _from_obj(obj)


def load(path) -> BratteliDiagram:
    with open(path, "rb") as fh:
        return parse(fh.read())


def from_rows(rows: Sequence[Sequence[str]], edges: Iterable[tuple], period=None, meta=None) -> BratteliDiagram:
    """Build and validate a diagram from literals.

    ``edges`` are ``((λ, i), (λ + 1, j), label_literal)`` triples.
    """
    obj = {
        "rows": [list(r) for r in rows],
        "edges": [{"from": list(s), "to": list(t), "label": lab} for s, t, lab in edges],
    }
    if period is not None:
        obj["period"] = period
    if meta:
        obj["meta"] = meta
    return _from_obj(obj)


__all__.append("from_rows")


# -- serialization ------------------------------------------------------------


def _dump(x) -> str:
    return json.dumps(x, ensure_ascii=False)


def _rows_text(rows, indent: str) -> str:
    if not rows:
        return "[]"
    body = ",\n".join(f"{indent}  {_dump([f.literal() for f in r])}" for r in rows)
    return "[\n" + body + f"\n{indent}]"


def _edges_text(edges, indent: str) -> str:
    if not edges:
        return "[]"
    body = ",\n".join(f"{indent}  {_dump(e.to_json())}" for e in edges)
    return "[\n" + body + f"\n{indent}]"


def serialize(d: BratteliDiagram) -> str:
    """Deterministic JSON text; one row or edge per line."""
    parts = [f'  "rows": {_rows_text(d.rows, "  ")}', f'  "edges": {_edges_text(d.edges, "  ")}']
    if d.period is not None:
        p = d.period
        inner = [
            f'    "start": {p.start}',
            f'    "rows": {_rows_text(p.rows, "    ")}',
            f'    "edges": {_edges_text(p.edges, "    ")}',
        ]
        if p.grows:
            inner.append(f'    "growth": {_dump({"mul": p.mul, "add": p.add})}')
        parts.append('  "period": {\n' + ",\n".join(inner) + "\n  }")
    if d.meta:
        parts.append(f'  "meta": {json.dumps(d.meta, sort_keys=True, ensure_ascii=False)}')
    return "{\n" + ",\n".join(parts) + "\n}\n"


def _sort_rows(rows, edges, wrap: bool):
    perms = []
    new_rows = []
    for r in rows:
        order = sorted(range(len(r)), key=lambda i: (r[i].kind, r[i].params, i))
        perms.append({old: new for new, old in enumerate(order)})
        new_rows.append(tuple(r[i] for i in order))

    def remap(v):
        lam, i = v
        if wrap and lam == len(rows):
            return lam, perms[0][i]
        return lam, perms[lam][i]

    new_edges = sorted(
        (Edge(remap(e.src), remap(e.dst), e.label) for e in edges),
        key=lambda e: (e.src, e.dst),
    )
    return tuple(new_rows), tuple(new_edges), perms


def canonical_form(d: BratteliDiagram) -> BratteliDiagram:
    """Sort vertices within rows by (kind, params) and edges by (from, to)."""
    period = None
    if d.period is not None:
        p = d.period
        prow, pedges, pperms = _sort_rows(p.rows, p.edges, wrap=True)
        period = Period(p.start, prow, pedges, p.mul, p.add)
    rows, _, perms = _sort_rows(d.rows, (), wrap=False)
    if period is not None:
        perms = perms + [pperms[0]]

    def remap(v):
        return v[0], perms[v[0]][v[1]]

    edges = tuple(sorted((Edge(remap(e.src), remap(e.dst), e.label) for e in d.edges), key=lambda e: (e.src, e.dst)))
    return BratteliDiagram(rows, edges, period, dict(d.meta))


# -- layers and telescoping -------------------------------------------------


def layer_morphism(d: BratteliDiagram, lam: int) -> MorphismClass:
    """Morphism class from row ``lam`` to row ``lam + 1``."""
    if lam < 0 or (not d.infinite and lam + 1 >= len(d.rows)):
        raise DiagramError(f"layer {lam} out of range")
    return _check_layer(d, lam)


def _composed(d: BratteliDiagram, a: int, b: int) -> MorphismClass:
    m = layer_morphism(d, a)
    for lam in range(a + 1, b):
        m = compose(layer_morphism(d, lam), m)
    return m


def _edges_of(m: MorphismClass, lam: int) -> list[Edge]:
    return sorted((Edge((lam, j), (lam + 1, i), b) for i, j, b in m.nonzero()), key=lambda e: (e.src, e.dst))


def telescope(
    d: BratteliDiagram,
    levels: Sequence[int] | None = None,
    stride: int | None = None,
) -> BratteliDiagram:
    """Pass to a subsequence of rows, composing the connecting maps.

    Give either explicit ``levels`` (strictly increasing, starting at 0) or a
    ``stride``.  A periodic diagram telescoped by a stride stays periodic.
    """
    if (levels is None) == (stride is None):
        raise DiagramError("give exactly one of levels or stride")
    if stride is not None:
        if stride < 1:
            raise DiagramError("stride must be positive")
        if d.infinite:
            return _telescope_periodic(d, stride)
        levels = list(range(0, len(d.rows), stride))
    levels = list(levels)
    if not levels:
        raise DiagramError("empty levels")
    if levels[0] != 0 or any(b <= a for a, b in zip(levels, levels[1:])):
        raise DiagramError(f"levels must be strictly increasing from 0, got {levels}")
    if not d.infinite and levels[-1] >= len(d.rows):
        raise DiagramError(f"level {levels[-1]} out of range")
    rows = tuple(d.row(lam) for lam in levels)
    edges = []
    for k, (a, b) in enumerate(zip(levels, levels[1:])):
        edges.extend(_edges_of(_composed(d, a, b), k))
    return BratteliDiagram(rows, tuple(edges), None, dict(d.meta))


def _telescope_periodic(d: BratteliDiagram, s: int) -> BratteliDiagram:
    p = d.period
    if p.mul != 1 and p.add != 0:
        raise DiagramError("telescoping needs growth with mul == 1 or add == 0")
    k0 = -(-p.start // s)
    q = p.length // gcd(p.length, s)
    t = q * s // p.length  # original copies per new copy
    rows = tuple(d.row(k * s) for k in range(k0))
    edges = []
    for k in range(k0):
        edges.extend(_edges_of(_composed(d, k * s, (k + 1) * s), k))
    prow, pedges = [], []
    for a in range(q):
        lam = (k0 + a) * s
        c0 = (lam - p.start) // p.length
        r = (lam - p.start) % p.length
        base = []
        for f in p.rows[r]:
            if f.params and p.grows:
                params = tuple(x * p.mul**c0 + p.add * c0 for x in f.params)
                base.append(canonicalize(CartanFactor(f.kind, params)))
            else:
                base.append(f)
        prow.append(tuple(base))
        for e in _edges_of(_composed(d, lam, lam + s), a):
            pedges.append(e)
    period = Period(k0, tuple(prow), tuple(pedges), p.mul**t, p.add * t)
    return BratteliDiagram(rows, tuple(edges), period, dict(d.meta))


# -- classes and decomposition ------------------------------------------------


def classify_vertices(d: BratteliDiagram, depth: int | None = None) -> dict[Vertex, str]:
    """Class ``'P'``, ``'E'``, ``'S'`` or ``'H'`` of every vertex."""
    if d.infinite:
        if depth is None:
            raise DiagramError("depth needed for an infinite diagram")
        d = d.unroll(depth)
    return {(lam, i): factor_class(f) for lam, row in enumerate(d.rows) for i, f in enumerate(row)}


def _eventual(d: BratteliDiagram) -> tuple[dict[Vertex, str], dict[Vertex, frozenset]]:
    cls = classify_vertices(d)
    out_edges: dict[Vertex, list[Vertex]] = {}
    for e in d.edges:
        out_edges.setdefault(e.src, []).append(e.dst)
    ev: dict[Vertex, frozenset] = {}
    for lam in range(len(d.rows) - 1, -1, -1):
        for i in range(len(d.rows[lam])):
            v = (lam, i)
            succ = out_edges.get(v, [])
            ev[v] = frozenset().union(*(ev[w] for w in succ)) if succ else frozenset(cls[v])
    return cls, ev


def _restrict(d: BratteliDiagram, keep: set[Vertex], meta: dict) -> BratteliDiagram:
    remap = {}
    rows = []
    for lam, row in enumerate(d.rows):
        new = []
        for i, f in enumerate(row):
            if (lam, i) in keep:
                remap[(lam, i)] = (lam, len(new))
                new.append(f)
        rows.append(tuple(new))
    edges = tuple(
        Edge(remap[e.src], remap[e.dst], e.label) for e in d.edges if e.src in keep and e.dst in keep
    )
    return BratteliDiagram(tuple(rows), edges, None, meta)


def decompose(d: BratteliDiagram, depth: int) -> dict:
    """Split a diagram into its P, E, S and H parts by forward cones.

    Returns ``{"P": diagram, "E": ..., "S": ..., "H": ..., "transient": [...]}``.
    A vertex lands in every part its forward cone reaches at the horizon;
    vertices whose cone class differs from their own are reported as transient.
    """
    u = d.unroll(depth) if d.infinite else d
    cls, ev = _eventual(u)
    if len(u.rows) >= 2:
        last = len(u.rows) - 2
        for e in u.layer_edges(last):
            if cls[e.src] != cls[e.dst]:
                raise NotStabilized(depth, f"edge {list(e.src)}->{list(e.dst)} crosses {cls[e.src]}→{cls[e.dst]}")
    transient = []
    for v in sorted(ev):
        if ev[v] != frozenset(cls[v]):
            transient.append(
                {"vertex": list(v), "class": cls[v], "eventual": [c for c in CLASS_ORDER if c in ev[v]]}
            )
    out: dict = {}
    for c in CLASS_ORDER:
        keep = {v for v, cs in ev.items() if c in cs}
        meta = {k: v for k, v in u.meta.items() if k == "unrolledFrom"}
        meta["component"] = c
        out[c] = _restrict(u, keep, meta)
    out["transient"] = transient
    return out


def path_classes(d: BratteliDiagram, depth: int) -> list[dict]:
    """Classes of paths up to eventual coincidence on the depth truncation.

    Every target vertex of a multiplicity-one part has at most one incoming
    edge, so a class is determined by its endpoint on the horizon row.
    """
    u = d.unroll(depth) if d.infinite else d
    for e in u.edges:
        if not isinstance(e.label, Unit):
            raise MultiplicityError(
                f"edge {list(e.src)}->{list(e.dst)} has label {json.dumps(block_literal(e.label))}; "
                "path classes need multiplicity-one edges"
            )
    if not u.rows:
        return []
    if d.period is not None:
        plen, grows = d.period.length, d.period.grows
    else:
        info = u.meta.get("unrolledFrom") or {}
        plen, grows = info.get("period"), bool(info.get("growth"))
    pred: dict[Vertex, Vertex] = {}
    out_deg: dict[Vertex, int] = {}
    for e in u.edges:
        if e.dst in pred:
            raise MultiplicityError(f"vertex {list(e.dst)} has two incoming edges")
        pred[e.dst] = e.src
        out_deg[e.src] = out_deg.get(e.src, 0) + 1
    horizon = len(u.rows) - 1
    result = []
    for i, f in enumerate(u.rows[horizon]):
        chain = [(horizon, i)]
        while chain[-1] in pred:
            chain.append(pred[chain[-1]])
        chain.reverse()
        dims = [u.rows[lam][j].dimension for lam, j in chain]
        dim: int | str = dims[-1]
        if grows and plen and len(dims) > plen and dims[-1] > dims[-1 - plen]:
            dim = "inf"
        result.append(
            {
                "class": factor_class(f),
                "kind": f.kind.name,
                "endpoint": [horizon, i],
                "start": list(chain[0]),
                "dims": dims,
                "dim": dim,
                "pathCount": 1,
                "branching": any(out_deg.get(v, 0) > 1 for v in chain),
            }
        )
    return result


# -- DOT ------------------------------------------------------------------------

_COLORS = {1: "blue", 2: "green", 3: "red", 4: "orange", 5: "purple", 6: "brown"}


def export_dot(d: BratteliDiagram, depth: int | None = None) -> bytes:
    """Graphviz DOT text of a finite diagram (periodic ones are unrolled)."""
    if d.infinite:
        d = d.unroll(8 if depth is None else depth)
    lines = ["digraph bratteli {", "  rankdir=TB;", '  node [style=filled, fontcolor="white"];']
    for lam, row in enumerate(d.rows):
        for i, f in enumerate(row):
            label = ",".join([f.kind.name, *map(str, f.params)])
            lines.append(f'  v{lam}_{i} [label="{label}", fillcolor="{_COLORS[int(f.kind)]}"];')
        if row:
            lines.append("  { rank=same; " + " ".join(f"v{lam}_{i};" for i in range(len(row))) + " }")
    for e in d.edges:
        lit = block_literal(e.label)
        text = lit if isinstance(lit, str) else json.dumps(lit, separators=(",", ":"))
        lines.append(f'  v{e.src[0]}_{e.src[1]} -> v{e.dst[0]}_{e.dst[1]} [label="{text}"];')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")
