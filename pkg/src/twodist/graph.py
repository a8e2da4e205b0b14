"""Edge-bicoloured graphs, their partly-virtual extension, grids and file IO."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

RED = "red"
BLUE = "blue"


class CornerClash(ValueError):
    """Grid corners are not distinct or collide with an existing edge."""


class GraphFormatError(ValueError):
    pass


def _pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Ebg:
    num_vertices: int
    red_edges: tuple[tuple[int, int], ...] = ()
    blue_edges: tuple[tuple[int, int], ...] = ()
    labels: dict = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def make(cls, n: int, red: Iterable = (), blue: Iterable = (), labels: Optional[dict] = None) -> "Ebg":
        return cls(n, tuple(_pair(*e) for e in red), tuple(_pair(*e) for e in blue), dict(labels or {}))


@dataclass(frozen=True)
class GreenClass:
    id: str
    colour: str


@dataclass(frozen=True)
class GreenEdge:
    tail: int
    head: int
    cls: str


@dataclass(frozen=True)
class Pvebg:
    base: Ebg
    green_edges: tuple[GreenEdge, ...] = ()
    classes: tuple[GreenClass, ...] = ()

    @property
    def num_vertices(self) -> int:
        return self.base.num_vertices

    @property
    def red_edges(self):
        return self.base.red_edges

    @property
    def blue_edges(self):
        return self.base.blue_edges

    @property
    def labels(self) -> dict:
        return self.base.labels

    def class_colour(self, cid: str) -> str:
        for c in self.classes:
            if c.id == cid:
                return c.colour
        raise KeyError(cid)

    def class_members(self) -> dict[str, list[GreenEdge]]:
        out: dict[str, list[GreenEdge]] = {c.id: [] for c in self.classes}
        for e in self.green_edges:
            out.setdefault(e.cls, []).append(e)
        return out


Graph = Union[Ebg, Pvebg]


def as_pvebg(g: Graph) -> Pvebg:
    return g if isinstance(g, Pvebg) else Pvebg(g)


class Builder:
    """Mutable accumulator used by the gadget constructors."""

    def __init__(self):
        self.n = 0
        self.red: list[tuple[int, int]] = []
        self.blue: list[tuple[int, int]] = []
        self.green_edges: list[GreenEdge] = []
        self.classes: list[GreenClass] = []
        self.labels: dict[int, str] = {}
        self._edge_set: set = set()
        self._class_ids: set = set()

    def vertex(self, label: Optional[str] = None) -> int:
        v = self.n
        self.n += 1
        if label is not None:
            self.labels[v] = label
        return v

    def vertices(self, k: int, label_fmt: Optional[str] = None) -> list[int]:
        return [self.vertex(label_fmt.format(i) if label_fmt else None) for i in range(k)]

    def edge(self, u: int, v: int, colour: str) -> None:
        if u == v:
            raise ValueError(f"self-loop at v{u}")
        key = _pair(u, v)
        other = BLUE if colour == RED else RED
        if (key, other) in self._edge_set:
            raise CornerClash(f"pair {key} already carries a {other} edge")
        if (key, colour) in self._edge_set:
            return
        self._edge_set.add((key, colour))
        (self.red if colour == RED else self.blue).append(key)

    def red_edge(self, u: int, v: int) -> None:
        self.edge(u, v, RED)

    def blue_edge(self, u: int, v: int) -> None:
        self.edge(u, v, BLUE)

    def new_class(self, colour: str = RED, cid: Optional[str] = None, fresh: bool = False) -> str:
        """``fresh`` suffixes a taken ``cid`` instead of rejecting it."""
        if cid is not None and fresh:
            cid = _fresh_id(cid, self._class_ids)
        if cid is None:
            k = len(self.classes) + 1
            while f"c{k}" in self._class_ids:
                k += 1
            cid = f"c{k}"
        if cid in self._class_ids:
            raise ValueError(f"duplicate class id {cid}")
        self._class_ids.add(cid)
        self.classes.append(GreenClass(cid, colour))
        return cid

    def green(self, tail: int, head: int, cid: str) -> None:
        if tail == head:
            raise ValueError(f"green self-loop at v{tail}")
        self.green_edges.append(GreenEdge(tail, head, cid))

    def tie(self, e1: tuple[int, int], e2: tuple[int, int], cid: str) -> None:
        self.green(e1[0], e1[1], cid)
        self.green(e2[0], e2[1], cid)

    def embed(self, g: Graph, prefix: str = "") -> list[int]:
        """Copy ``g`` in; returns the new index of each old vertex."""
        g = as_pvebg(g)
        off = self.n
        for v in range(g.num_vertices):
            lab = g.labels.get(v)
            self.vertex(prefix + lab if lab is not None else None)
        for u, v in g.red_edges:
            self.red_edge(u + off, v + off)
        for u, v in g.blue_edges:
            self.blue_edge(u + off, v + off)
        rename = {}
        for c in g.classes:
            rename[c.id] = self.new_class(c.colour, _fresh_id(c.id, self._class_ids))
        for e in g.green_edges:
            self.green(e.tail + off, e.head + off, rename[e.cls])
        return list(range(off, off + g.num_vertices))

    def drop_red(self, pairs: Iterable[tuple[int, int]]) -> None:
        gone = {_pair(u, v) for u, v in pairs}
        self.red = [e for e in self.red if e not in gone]
        self._edge_set -= {(k, RED) for k in gone}

    def build(self) -> Pvebg:
        base = Ebg(self.n, tuple(self.red), tuple(self.blue), dict(self.labels))
        return Pvebg(base, tuple(self.green_edges), tuple(self.classes))

    def build_ebg(self) -> Ebg:
        if self.green_edges:
            raise ValueError("graph still has green edges")
        return Ebg(self.n, tuple(self.red), tuple(self.blue), dict(self.labels))


def _fresh_id(cid: str, taken: set) -> str:
    if cid not in taken:
        return cid
    k = 2
    while f"{cid}.{k}" in taken:
        k += 1
    return f"{cid}.{k}"


def _same_kind(template: Graph, g: Pvebg) -> Graph:
    if isinstance(template, Ebg) and not g.green_edges and not g.classes:
        return g.base
    return g


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    n: int
    k: int
    colour: str = RED

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("grid needs n, k >= 1")
        if self.colour not in (RED, BLUE):
            raise ValueError(f"bad colour {self.colour!r}")


def _grid_into(b: Builder, spec: GridSpec, corners: Optional[dict] = None) -> dict:
    corners = corners or {}
    idx = {}
    for i in range(spec.n + 1):
        for j in range(spec.k + 1):
            idx[i, j] = corners[(i, j)] if (i, j) in corners else b.vertex()
    for i in range(spec.n + 1):
        for j in range(spec.k + 1):
            if j < spec.k:
                b.edge(idx[i, j], idx[i, j + 1], spec.colour)
            if i < spec.n:
                b.edge(idx[i, j], idx[i + 1, j], spec.colour)
    return idx


def red_or_blue_grid(spec: GridSpec) -> Ebg:
    b = Builder()
    idx = _grid_into(b, spec)
    for name, key in (("u00", (0, 0)), ("un0", (spec.n, 0)), ("u0k", (0, spec.k)), ("unk", (spec.n, spec.k))):
        b.labels[idx[key]] = name
    return b.build_ebg()


def _corner_check(g: Pvebg, a: int, b: int, c: int, d: int, spec: GridSpec) -> None:
    if len({a, b, c, d}) != 4:
        raise CornerClash(f"grid corners must be distinct, got {(a, b, c, d)}")
    for v in (a, b, c, d):
        if not 0 <= v < g.num_vertices:
            raise CornerClash(f"corner v{v} out of range")
    other = set(g.blue_edges if spec.colour == RED else g.red_edges)
    adjacent = []
    if spec.n == 1:
        adjacent += [(a, b), (c, d)]
    if spec.k == 1:
        adjacent += [(a, c), (b, d)]
    for u, v in adjacent:
        if _pair(u, v) in other:
            raise CornerClash(f"corner pair {(u, v)} already has the other colour")


def connect_with_grid(g: Graph, a: int, b: int, c: int, d: int, spec: GridSpec) -> Graph:
    """Glue an n x k grid so that a=u00, b=u_n0, c=u_0k, d=u_nk."""
    src = as_pvebg(g)
    _corner_check(src, a, b, c, d, spec)
    bld = Builder()
    bld.embed(src)
    _grid_into(bld, spec, {(0, 0): a, (spec.n, 0): b, (0, spec.k): c, (spec.n, spec.k): d})
    return _same_kind(g, bld.build())


# ---------------------------------------------------------------------------
# structural operations


def disjoint_union(g1: Graph, g2: Graph) -> Graph:
    b = Builder()
    b.embed(g1)
    b.embed(g2)
    out = b.build()
    return out.base if isinstance(g1, Ebg) and isinstance(g2, Ebg) else out


def invert_colours(g: Graph) -> Graph:
    if isinstance(g, Ebg):
        return Ebg(g.num_vertices, g.blue_edges, g.red_edges, dict(g.labels))
    base = Ebg(g.num_vertices, g.blue_edges, g.red_edges, dict(g.labels))
    swapped = tuple(GreenClass(c.id, BLUE if c.colour == RED else RED) for c in g.classes)
    return Pvebg(base, g.green_edges, swapped)


def induced_subgraph(g: Graph, keep: Sequence[int]) -> Graph:
    """Subgraph on ``keep`` (renumbered in the given order) with every edge among them."""
    pos = {v: i for i, v in enumerate(keep)}
    p = as_pvebg(g)
    red = [(pos[u], pos[v]) for u, v in p.red_edges if u in pos and v in pos]
    blue = [(pos[u], pos[v]) for u, v in p.blue_edges if u in pos and v in pos]
    labels = {pos[v]: s for v, s in p.labels.items() if v in pos}
    base = Ebg.make(len(keep), red, blue, labels)
    greens = tuple(GreenEdge(pos[e.tail], pos[e.head], e.cls) for e in p.green_edges if e.tail in pos and e.head in pos)
    used = {e.cls for e in greens}
    out = Pvebg(base, greens, tuple(c for c in p.classes if c.id in used))
    return _same_kind(g, out)


def pvebg_to_ebg(g: Pvebg, W: int) -> Ebg:
    """Replace every green class by a chain of W x W grids in the class colour.

    Consecutive green edges that share an endpoint cannot be grid corners, so
    such a pair is routed through a fresh relay pair of vertices.
    """
    if W < 2:
        raise ValueError("W must be at least 2")
    b = Builder()
    b.embed(g.base)
    spec_of = {c.id: GridSpec(W, W, c.colour) for c in g.classes}
    for cid, members in g.class_members().items():
        if not members:
            raise ValueError(f"class {cid} has no green edges")
        for e1, e2 in zip(members, members[1:]):
            spec = spec_of[cid]
            if len({e1.tail, e1.head, e2.tail, e2.head}) == 4:
                _grid_into(b, spec, {(0, 0): e1.tail, (W, 0): e1.head, (0, W): e2.tail, (W, W): e2.head})
            else:
                x, y = b.vertex(), b.vertex()
                _grid_into(b, spec, {(0, 0): e1.tail, (W, 0): e1.head, (0, W): x, (W, W): y})
                _grid_into(b, spec, {(0, 0): x, (W, 0): y, (0, W): e2.tail, (W, W): e2.head})
    return b.build_ebg()


def validate(g: Graph) -> list[str]:
    p = as_pvebg(g)
    out = []
    n = p.num_vertices
    if n < 0:
        out.append("negative vertex count")
    seen: dict = {}
    for colour, edges in ((RED, p.red_edges), (BLUE, p.blue_edges)):
        for u, v in edges:
            if u == v:
                out.append(f"self-loop at v{u}")
                continue
            if not (0 <= u < n and 0 <= v < n):
                out.append(f"{colour} edge {(u, v)} has an endpoint outside 0..{n - 1}")
            key = _pair(u, v)
            if key in seen and seen[key] != colour:
                out.append(f"pair {key} is both red and blue")
            elif key in seen:
                out.append(f"duplicate {colour} edge {key}")
            seen[key] = colour
    ids = [c.id for c in p.classes]
    if len(set(ids)) != len(ids):
        out.append("duplicate green class ids")
    for c in p.classes:
        if c.colour not in (RED, BLUE):
            out.append(f"class {c.id} has colour {c.colour!r}")
    for e in p.green_edges:
        if e.cls not in ids:
            out.append(f"green edge {e.tail}->{e.head} uses undeclared class {e.cls}")
        if e.tail == e.head:
            out.append(f"self-loop at v{e.tail}")
        if not (0 <= e.tail < n and 0 <= e.head < n):
            out.append(f"green edge {e.tail}->{e.head} has an endpoint outside 0..{n - 1}")
    for v in p.labels:
        if not 0 <= v < n:
            out.append(f"label on missing vertex v{v}")
    return out


# ---------------------------------------------------------------------------
# file format


def to_document(g: Graph) -> dict:
    p = as_pvebg(g)
    return {
        "kind": "ebg" if isinstance(g, Ebg) else "pvebg",
        "num_vertices": p.num_vertices,
        "red_edges": [list(e) for e in p.red_edges],
        "blue_edges": [list(e) for e in p.blue_edges],
        "green_edges": [{"tail": e.tail, "head": e.head, "class": e.cls} for e in p.green_edges],
        "classes": [{"id": c.id, "colour": c.colour} for c in p.classes],
        "labels": {str(v): p.labels[v] for v in sorted(p.labels)},
    }


def dumps(g: Graph) -> str:
    """One field per line; arrays stay on one line so files diff cleanly."""
    doc = to_document(g)
    lines = [f"  {json.dumps(k)}: {json.dumps(v, separators=(', ', ': '), ensure_ascii=False)}" for k, v in doc.items()]
    return "{\n" + ",\n".join(lines) + "\n}\n"


def from_document(doc: dict) -> Graph:
    try:
        kind = doc["kind"]
        n = int(doc["num_vertices"])
        red = [tuple(map(int, e)) for e in doc.get("red_edges", [])]
        blue = [tuple(map(int, e)) for e in doc.get("blue_edges", [])]
        greens = tuple(GreenEdge(int(e["tail"]), int(e["head"]), str(e["class"])) for e in doc.get("green_edges", []))
        classes = tuple(GreenClass(str(c["id"]), str(c["colour"])) for c in doc.get("classes", []))
        labels = {int(k): str(v) for k, v in doc.get("labels", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed graph document: {exc}") from exc
    if kind not in ("ebg", "pvebg"):
        raise GraphFormatError(f"unknown kind {kind!r}")
    if any(len(e) != 2 for e in red + blue):
        raise GraphFormatError("edges must be vertex pairs")
    # keep pair orientation as stored so that save(load(x)) == x
    base = Ebg(n, tuple(red), tuple(blue), labels)
    g: Graph = base if kind == "ebg" else Pvebg(base, greens, classes)
    if kind == "ebg" and (greens or classes):
        raise GraphFormatError("an ebg document cannot carry green edges")
    problems = validate(g)
    if problems:
        raise GraphFormatError("; ".join(problems))
    return g


def loads(text: str) -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"not a graph document: {exc}") from exc
    if not isinstance(doc, dict):
        raise GraphFormatError("graph document must be an object")
    return from_document(doc)


def save(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(g))


def load(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def triangle(a: str = RED, b: str = RED, c: str = BLUE) -> Ebg:
    """Triangle on 0,1,2 with edge colours (0,1), (0,2), (1,2)."""
    bld = Builder()
    bld.vertices(3)
    bld.edge(0, 1, a)
    bld.edge(0, 2, b)
    bld.edge(1, 2, c)
    return bld.build_ebg()


def complete_graph(k: int, colour: str = RED) -> Ebg:
    bld = Builder()
    bld.vertices(k)
    for i in range(k):
        for j in range(i + 1, k):
            bld.edge(i, j, colour)
    return bld.build_ebg()
