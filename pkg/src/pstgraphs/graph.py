"""Weighted spin graphs and their one-excitation Hamiltonian.

Sites are 0-based.  Tables in the README map them to the 1-based qubit
labels used in the literature.

Sign convention: the one-excitation matrix carries ``+J`` off the diagonal.
A global ``h -> -h`` only conjugates amplitudes, so no transfer probability
depends on the choice.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

SCHEMA_VERSION = 1


class GraphError(ValueError):
    """Invalid graph construction or graph document."""


class DisconnectedError(GraphError):
    """Two sites have no path between them."""


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    J: float | None
    param: str | None = None


@dataclass(frozen=True)
class SpinGraph:
    """Undirected weighted graph with optional local fields.

    An edge may be bound to a named parameter; its coupling is ``None`` until
    the parameter receives a value.
    """

    n: int
    edges: tuple[Edge, ...]
    fields: tuple[float, ...]
    params: Mapping[str, float | None] = field(default_factory=dict)

    @property
    def unknowns(self) -> list[str]:
        return sorted(k for k, v in self.params.items() if v is None)

    @property
    def is_bound(self) -> bool:
        return all(e.J is not None for e in self.edges)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for e in self.edges:
            adj[e.u].append(e.v)
            adj[e.v].append(e.u)
        return adj

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency()]

    def coupling(self, u: int, v: int) -> float | None:
        a, b = min(u, v), max(u, v)
        for e in self.edges:
            if e.u == a and e.v == b:
                return e.J
        return None

    def bind(self, assignment: Mapping[str, float]) -> SpinGraph:
        """Return a copy with the given parameters set."""
        params = dict(self.params)
        for k, val in assignment.items():
            if k not in params:
                raise GraphError(f"unknown parameter {k!r}")
            params[k] = float(val)
        edges = [
            (e.u, e.v, params[e.param] if e.param is not None else e.J, e.param)
            for e in self.edges
        ]
        return build_graph(self.n, edges, self.fields, params=params)

    def permuted(self, order: Sequence[int]) -> SpinGraph:
        """Relabel sites so that new site ``k`` is old site ``order[k]``."""
        if sorted(order) != list(range(self.n)):
            raise GraphError("order must be a permutation of the sites")
        new_of = {old: new for new, old in enumerate(order)}
        edges = [(new_of[e.u], new_of[e.v], e.J, e.param) for e in self.edges]
        fields = [self.fields[old] for old in order]
        return build_graph(self.n, edges, fields, params=self.params)


def _finite(x: float, what: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise GraphError(f"non-finite value in {what}")
    return x


def build_graph(
    n: int,
    edges: Iterable[Sequence],
    fields: Sequence[float] | None = None,
    params: Mapping[str, float | None] | None = None,
) -> SpinGraph:
    """Validate and normalize a graph.

    ``edges`` holds ``(u, v, J)`` or ``(u, v, J, param)`` tuples.  ``J`` may be
    ``None`` only for a parameter-bound edge whose parameter is unset.
    """
    if int(n) != n or n < 1:
        raise GraphError(f"vertex count must be a positive integer, got {n!r}")
    n = int(n)
    params = dict(params or {})
    seen: set[tuple[int, int]] = set()
    out: list[Edge] = []
    for raw in edges:
        if len(raw) not in (3, 4):
            raise GraphError(f"edge {raw!r} must be (u, v, J) or (u, v, J, param)")
        u, v, J = raw[0], raw[1], raw[2]
        param = raw[3] if len(raw) == 4 else None
        if int(u) != u or int(v) != v:
            raise GraphError(f"edge ({u}, {v}): indices must be integers")
        u, v = int(u), int(v)
        label = f"edge ({u}, {v})"
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"{label}: index out of range for n={n}")
        if u == v:
            raise GraphError(f"{label}: self-loop")
        a, b = min(u, v), max(u, v)
        if (a, b) in seen:
            raise GraphError(f"{label}: duplicate edge")
        seen.add((a, b))
        if param is not None:
            params.setdefault(param, None if J is None else float(J))
            if J is None:
                J = params[param]
        if J is not None:
            J = _finite(J, label)
            if J == 0.0:
                raise GraphError(f"{label}: zero coupling")
        elif param is None:
            raise GraphError(f"{label}: missing coupling")
        out.append(Edge(a, b, J, param))
    out.sort(key=lambda e: (e.u, e.v))
    if fields is None:
        fields_t = (0.0,) * n
    else:
        if len(fields) != n:
            raise GraphError(f"expected {n} fields, got {len(fields)}")
        fields_t = tuple(_finite(f, f"field {i}") for i, f in enumerate(fields))
    for k, val in params.items():
        if val is not None:
            params[k] = _finite(val, f"parameter {k!r}")
    used = {e.param for e in out if e.param is not None}
    unused = set(params) - used
    if unused:
        raise GraphError(f"parameters not used by any edge: {sorted(unused)}")
    return SpinGraph(n, tuple(out), fields_t, params)


def one_excitation_hamiltonian(g: SpinGraph) -> np.ndarray:
    """Dense one-excitation matrix: ``h[u, v] = J_uv`` and ``h[i, i] = B_i``."""
    if not g.is_bound:
        raise GraphError(f"graph has unbound parameters: {g.unknowns}")
    h = np.zeros((g.n, g.n))
    for e in g.edges:
        h[e.u, e.v] = h[e.v, e.u] = e.J
    h[np.diag_indices(g.n)] = g.fields
    return h


def is_bipartite(g: SpinGraph) -> list[str] | None:
    """Two-coloring with labels ``"A"``/``"B"``, or ``None`` for an odd cycle."""
    adj = g.adjacency()
    color: list[str | None] = [None] * g.n
    for root in range(g.n):
        if color[root] is not None:
            continue
        color[root] = "A"
        queue = deque([root])
        while queue:
            u = queue.popleft()
            other = "B" if color[u] == "A" else "A"
            for v in adj[u]:
                if color[v] is None:
                    color[v] = other
                    queue.append(v)
                elif color[v] == color[u]:
                    return None
    return color  # type: ignore[return-value]


def distances_from(g: SpinGraph, a: int) -> list[int | None]:
    adj = g.adjacency()
    dist: list[int | None] = [None] * g.n
    dist[a] = 0
    queue = deque([a])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] is None:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def graph_distance(g: SpinGraph, a: int, b: int) -> int:
    """Number of links on the shortest path between sites ``a`` and ``b``."""
    for s in (a, b):
        if not 0 <= s < g.n:
            raise GraphError(f"site {s} out of range for n={g.n}")
    d = distances_from(g, a)[b]
    if d is None:
        raise DisconnectedError(f"sites {a} and {b} are not connected")
    return d


def degree_constraint_check(g: SpinGraph) -> tuple[bool, list[tuple[int, int]]]:
    """No edge may join two sites that both have three or more links."""
    deg = g.degrees()
    bad = [(e.u, e.v) for e in g.edges if deg[e.u] >= 3 and deg[e.v] >= 3]
    return not bad, bad


# -- JSON documents ---------------------------------------------------------

_TOP_KEYS = {"version", "n", "edges", "fields", "params"}
_EDGE_KEYS = {"u", "v", "J", "param"}


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def graph_from_dict(doc: Mapping) -> SpinGraph:
    if not isinstance(doc, Mapping):
        raise GraphError("graph document must be a JSON object")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise GraphError(f"unknown keys: {sorted(extra)}")
    if doc.get("version") != SCHEMA_VERSION:
        raise GraphError(f"unsupported version {doc.get('version')!r}, expected {SCHEMA_VERSION}")
    n = doc.get("n")
    if not _is_int(n):
        raise GraphError("'n' must be an integer")
    raw_edges = doc.get("edges")
    if not isinstance(raw_edges, list):
        raise GraphError("'edges' must be a list")
    params: dict[str, float | None] = {}
    raw_params = doc.get("params", {})
    if not isinstance(raw_params, Mapping):
        raise GraphError("'params' must be an object")
    for k, val in raw_params.items():
        if val is not None and not _is_num(val):
            raise GraphError(f"parameter {k!r} must be a number or null")
        params[k] = None if val is None else float(val)
    edges = []
    for i, e in enumerate(raw_edges):
        if not isinstance(e, Mapping):
            raise GraphError(f"edge #{i} must be an object")
        extra = set(e) - _EDGE_KEYS
        if extra:
            raise GraphError(f"edge #{i}: unknown keys {sorted(extra)}")
        if not (_is_int(e.get("u")) and _is_int(e.get("v"))):
            raise GraphError(f"edge #{i}: 'u' and 'v' must be integers")
        has_j, has_p = "J" in e, "param" in e
        if has_j == has_p:
            raise GraphError(f"edge #{i}: exactly one of 'J' or 'param' is required")
        if has_j:
            if not _is_num(e["J"]):
                raise GraphError(f"edge #{i}: 'J' must be a number")
            edges.append((e["u"], e["v"], float(e["J"])))
        else:
            name = e["param"]
            if not isinstance(name, str) or not name:
                raise GraphError(f"edge #{i}: 'param' must be a non-empty string")
            params.setdefault(name, None)
            edges.append((e["u"], e["v"], params[name], name))
    fields = doc.get("fields")
    if fields is not None:
        if not isinstance(fields, list) or not all(_is_num(f) for f in fields):
            raise GraphError("'fields' must be a list of numbers")
    return build_graph(n, edges, fields, params=params)


def graph_to_dict(g: SpinGraph) -> dict:
    edges = []
    for e in g.edges:
        if e.param is not None:
            edges.append({"u": e.u, "v": e.v, "param": e.param})
        else:
            edges.append({"u": e.u, "v": e.v, "J": e.J})
    doc: dict = {"version": SCHEMA_VERSION, "n": g.n, "edges": edges, "fields": list(g.fields)}
    if g.params:
        doc["params"] = {k: g.params[k] for k in sorted(g.params)}
    return doc


def load_graph(path: str | Path) -> SpinGraph:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: malformed JSON ({exc})") from exc
    return graph_from_dict(doc)


def save_graph(g: SpinGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g), indent=2) + "\n", encoding="utf-8")
