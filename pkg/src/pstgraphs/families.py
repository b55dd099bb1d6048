"""Named graph families and their closed-form transfer parameters.

Site numbering (0-based) per family; sender is always site 0.

==================== ===========================================================
family               wiring
==================== ===========================================================
coutinho             0-1:x 1-2:z 2-3:z 3-4:x 1-5:y 3-5:y          (receiver 4)
tri_coutinho         coutinho + 1-6:w 3-6:w                        (receiver 4)
gen1                 0-1:x 1-2:z0 2-3:z0 3-4:x, bridge 5+j to 1,3  (receiver 4)
coutinho_n8          0-1:x 1-2:y 2-3:w 3-4:y 4-5:x 1-6:z 6-7:w 4-7:z (receiver 5)
gen3 / gen2          tails 0-1, (n+2)-(n+3); chain l on k parallel n-site paths
wheatstone           coutinho + 2-5:w                              (receiver 4)
bipartite_wheatstone 0-1:x 1-2:z 2-3:z 3-6:x 1-4:y 3-4:y 2-5:w 5-4:w (receiver 6)
key_graph            0-1:x 1-2:y 1-3:y 2-4:w 3-5:w 2-5:v 3-4:v 4-6:y 5-6:y 6-7:x
decorated8           path 0..6 (g1 v1 v2 v2 v1 g3), 3-7:g2
decorated11          path 0..8 (g1 v1 v2 v3 v3 v2 v1 g1), 3-9:g2 5-10:g2
==================== ===========================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .givens import ChainBlock
from .graph import GraphError, SpinGraph, build_graph
from .spectral import chain_pt_couplings


class FamilyError(ValueError):
    pass


def _nonzero(**kw) -> None:
    for k, v in kw.items():
        vals = v if isinstance(v, (list, tuple, np.ndarray)) else [v]
        for x in vals:
            if x == 0:
                raise FamilyError(f"coupling {k} must be nonzero")


def coutinho(x: float, y: float, z: float) -> SpinGraph:
    _nonzero(x=x, y=y, z=z)
    return build_graph(6, [(0, 1, x), (1, 2, z), (2, 3, z), (3, 4, x), (1, 5, y), (3, 5, y)])


def coutinho_pt_params(j: int, m: int) -> tuple[float, float]:
    """``(x, y^2 + z^2)`` giving transfer 0 -> 4 on the Coutinho graph."""
    if not (int(j) == j and int(m) == m and 0 <= j < m):
        raise FamilyError("need integers m > j >= 0")
    return 2.0 * (2 * j + 1), 2.0 * (4 * m * m - (2 * j + 1) ** 2)


def gen1(n: int, x: float, z0: float, z: Sequence[float]) -> SpinGraph:
    """Path 0-1-2-3-4 plus ``n`` two-link bridges between sites 1 and 3."""
    if n < 1 or len(z) != n:
        raise FamilyError("gen1 needs n >= 1 bridge couplings")
    _nonzero(x=x, z0=z0, z=z)
    edges = [(0, 1, x), (1, 2, z0), (2, 3, z0), (3, 4, x)]
    for k, zk in enumerate(z):
        edges += [(1, 5 + k, zk), (3, 5 + k, zk)]
    return build_graph(5 + n, edges)


def tri_coutinho(x: float, y: float, z: float, w: float) -> SpinGraph:
    return gen1(2, x, z, [y, w])


def gen3(k: int, n: int, x: float, y: Sequence[float], w: Sequence[float]) -> SpinGraph:
    """Two tails joined by ``k`` parallel ``n``-site chains.

    Chain ``l`` couples to both tail hubs with ``y[l]``; all chains share the
    internal couplings ``w``.  Chain 0 sits on sites ``2 .. n+1``, the far tail
    on ``n+2, n+3`` and chain ``l >= 1`` on ``n+4+(l-1)n ..``.
    """
    if k < 2 or n < 1:
        raise FamilyError("gen3 needs k >= 2 chains of n >= 1 sites")
    if len(y) != k or len(w) != n - 1:
        raise FamilyError("gen3 needs k couplings y and n-1 couplings w")
    _nonzero(x=x, y=y, w=w)
    hub1, hub2, recv = 1, n + 2, n + 3
    edges = [(0, hub1, x), (hub2, recv, x)]
    for l in range(k):
        start = 2 if l == 0 else n + 4 + (l - 1) * n
        sites = list(range(start, start + n))
        edges += [(hub1, sites[0], y[l]), (sites[-1], hub2, y[l])]
        edges += [(a, b, wi) for a, b, wi in zip(sites[:-1], sites[1:], w)]
    return build_graph(k * n + 4, edges)


def gen2(n: int, x: float, y: float, z: float, w: Sequence[float]) -> SpinGraph:
    if n < 2:
        raise FamilyError("gen2 needs n >= 2")
    return gen3(2, n, x, [y, z], w)


def coutinho_n8(x: float, y: float, z: float, w: float) -> SpinGraph:
    return gen2(2, x, y, z, [w])


def gen3_pt_couplings(k: int, n: int, rng: np.random.Generator | None = None):
    """Couplings ``(x, y, w)`` for gen3 that reduce to the ``n+4`` PT chain.

    The bridge total ``sum y_l^2`` is split at random over the ``k`` chains.
    """
    J = chain_pt_couplings(n + 4)
    rng = rng or np.random.default_rng(0)
    share = rng.uniform(0.2, 1.0, size=k)
    y = np.sqrt(J[1] ** 2 * share / share.sum())
    return J[0], [float(v) for v in y], J[2:n + 1]


def gen1_pt_couplings(n: int, rng: np.random.Generator | None = None):
    """``(x, z0, z)`` for gen1 with ``z0^2 + sum z^2 = 6`` and ``x = 2``."""
    rng = rng or np.random.default_rng(0)
    share = rng.uniform(0.2, 1.0, size=n + 1)
    vals = np.sqrt(6.0 * share / share.sum())
    return 2.0, float(vals[0]), [float(v) for v in vals[1:]]


def wheatstone(x: float, y: float, z: float, w: float) -> SpinGraph:
    _nonzero(x=x, y=y, z=z, w=w)
    return build_graph(
        6, [(0, 1, x), (1, 2, z), (2, 3, z), (3, 4, x), (1, 5, y), (3, 5, y), (2, 5, w)]
    )


def wheatstone_fields(x: float, y: float, z: float, w: float) -> tuple[float, ...]:
    """Closed-form diagonal of the reduced Wheatstone matrix."""
    S = y * y + z * z
    if S == 0:
        raise FamilyError("y^2 + z^2 must be nonzero")
    D = (y * y - z * z) ** 2
    den45 = w * w * D + S ** 3
    den56 = 4 * w ** 4 * y * y * z * z * D + w * w * x * x * (y ** 4 - z ** 4) ** 2 + x * x * S ** 5
    b3 = 2 * y * z * w / S
    b4 = -2 * w ** 3 * y * z * D / (S * den45)
    b5 = (
        4 * w ** 3 * y * z * D * S
        * (w * w * (x * x * D - 2 * y * y * z * z * S) + x * x * S ** 3)
        / (den45 * den56)
    )
    b6 = -2 * w * x * x * y * z * S * (2 * w * w * D + S ** 3) / den56
    return (0.0, 0.0, b3, b4, b5, b6)


def bipartite_wheatstone(x: float, y: float, z: float, w: float) -> SpinGraph:
    """Wheatstone bridge with a node inserted on the bridge; receiver is site 6."""
    _nonzero(x=x, y=y, z=z, w=w)
    return build_graph(
        7,
        [(0, 1, x), (1, 2, z), (2, 3, z), (3, 6, x), (1, 4, y), (3, 4, y), (2, 5, w), (4, 5, w)],
    )


def key_graph(x: float, y: float, v: float, w: float) -> SpinGraph:
    """Two-loop graph with rungs ``w`` and crossed bridges ``v``; receiver is site 7."""
    _nonzero(x=x, y=y, v=v, w=w)
    return build_graph(
        8,
        [
            (0, 1, x), (1, 2, y), (1, 3, y),
            (2, 4, w), (3, 5, w), (2, 5, v), (3, 4, v),
            (4, 6, y), (5, 6, y), (6, 7, x),
        ],
    )


def key_graph_params(j: int, k: int, m: int) -> tuple[float, float, float, float]:
    """``(x, y, v, w)`` whose reduced 6-chain has spectrum ``+-(2j+1), +-(2k+1), +-(2m+1)``."""
    if not all(int(a) == a for a in (j, k, m)) or not 0 <= j < k < m:
        raise FamilyError("need integers 0 <= j < k < m")
    d = 2 * (j + m - k) + 1
    rx = (2 * j + 1) * (2 * k + 1) * (2 * m + 1) / d
    ry = 4 * (j + m + 1) * (k - j) * (m - k) / d
    if rx < 0 or ry < 0:
        raise FamilyError("negative radicand")
    v = j + m - k + 0.5
    return math.sqrt(rx), math.sqrt(ry), v, v


def decorated8(g1: float, g2: float, g3: float, v1: float, v2: float) -> SpinGraph:
    _nonzero(g1=g1, g2=g2, g3=g3, v1=v1, v2=v2)
    return build_graph(
        8, [(0, 1, g1), (1, 2, v1), (2, 3, v2), (3, 4, v2), (4, 5, v1), (5, 6, g3), (3, 7, g2)]
    )


def decorated11(g1: float, g2: float, v1: float, v2: float, v3: float) -> SpinGraph:
    _nonzero(g1=g1, g2=g2, v1=v1, v2=v2, v3=v3)
    path = [g1, v1, v2, v3, v3, v2, v1, g1]
    edges = [(i, i + 1, J) for i, J in enumerate(path)] + [(3, 9, g2), (5, 10, g2)]
    return build_graph(11, edges)


def decorated8_reduced_general(v1: float, v2: float) -> ChainBlock:
    """Predicted 7-chain of ``decorated8(1, 1, 1, v1, v2)``."""
    if not (v1 > 0 and v2 > 0):
        raise FamilyError("v1 and v2 must be positive")
    r = math.sqrt(v2 * v2 + 1)
    J = (1.0, v1, v2, r, v1 * v2 / r, math.sqrt((v1 * v1 + v2 * v2 + 1) / (v2 * v2 + 1)))
    return ChainBlock.from_couplings(J)


# -- registry used by the CLI -------------------------------------------------


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: Mapping[str, float | list[float]] = field(default_factory=dict)
    sizes: Mapping[str, int] = field(default_factory=dict)


_SCALAR = {
    "coutinho": (coutinho, ("x", "y", "z")),
    "tri_coutinho": (tri_coutinho, ("x", "y", "z", "w")),
    "coutinho_n8": (coutinho_n8, ("x", "y", "z", "w")),
    "wheatstone": (wheatstone, ("x", "y", "z", "w")),
    "bipartite_wheatstone": (bipartite_wheatstone, ("x", "y", "z", "w")),
    "key_graph": (key_graph, ("x", "y", "v", "w")),
    "decorated8": (decorated8, ("g1", "g2", "g3", "v1", "v2")),
    "decorated11": (decorated11, ("g1", "g2", "v1", "v2", "v3")),
}

FAMILY_NAMES = tuple(sorted(list(_SCALAR) + ["gen1", "gen2", "gen3"]))

# Default receiver of each family, used by the CLI when --to is omitted.
RECEIVER: dict[str, Callable[[FamilySpec], int]] = {
    "coutinho": lambda s: 4,
    "tri_coutinho": lambda s: 4,
    "gen1": lambda s: 4,
    "wheatstone": lambda s: 4,
    "coutinho_n8": lambda s: 5,
    "gen2": lambda s: int(s.sizes["n"]) + 3,
    "gen3": lambda s: int(s.sizes["n"]) + 3,
    "bipartite_wheatstone": lambda s: 6,
    "key_graph": lambda s: 7,
    "decorated8": lambda s: 6,
    "decorated11": lambda s: 8,
}


def _scalar(spec: FamilySpec, key: str) -> float:
    if key not in spec.params:
        raise FamilyError(f"family {spec.name!r} needs parameter {key!r}")
    val = spec.params[key]
    if isinstance(val, (list, tuple)):
        if len(val) != 1:
            raise FamilyError(f"parameter {key!r} must be a single number")
        val = val[0]
    return float(val)


def _vector(spec: FamilySpec, key: str) -> list[float]:
    if key not in spec.params:
        raise FamilyError(f"family {spec.name!r} needs parameter {key!r}")
    val = spec.params[key]
    return [float(v) for v in (val if isinstance(val, (list, tuple)) else [val])]


def build_family(spec: FamilySpec) -> SpinGraph:
    """Construct a family member from named parameters (lists for vector ones)."""
    name = spec.name
    try:
        if name in _SCALAR:
            fn, keys = _SCALAR[name]
            extra = set(spec.params) - set(keys)
            if extra:
                raise FamilyError(f"unknown parameters for {name}: {sorted(extra)}")
            return fn(*(_scalar(spec, k) for k in keys))
        if name == "gen1":
            z = _vector(spec, "z")
            return gen1(int(spec.sizes.get("n", len(z))), _scalar(spec, "x"), _scalar(spec, "z0"), z)
        if name == "gen2":
            w = _vector(spec, "w")
            n = int(spec.sizes.get("n", len(w) + 1))
            return gen2(n, _scalar(spec, "x"), _scalar(spec, "y"), _scalar(spec, "z"), w)
        if name == "gen3":
            y = _vector(spec, "y")
            w = _vector(spec, "w") if "w" in spec.params else []
            k = int(spec.sizes.get("k", len(y)))
            n = int(spec.sizes.get("n", len(w) + 1))
            return gen3(k, n, _scalar(spec, "x"), y, w)
    except GraphError as exc:
        raise FamilyError(str(exc)) from exc
    raise FamilyError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")
