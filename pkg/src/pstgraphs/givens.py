"""Givens rotations and reduction of a symmetric matrix to linear chains.

Rotation convention: ``G(i, j)`` has ``G[i,i] = G[j,j] = c``, ``G[i,j] = s``,
``G[j,i] = -s`` so that ``(x_i, x_j) -> (c x_i + s x_j, -s x_i + c x_j)``.
A reduction applies ``h <- G h G^T`` one rotation at a time.

Pivot order is fixed: columns ``j = 0 .. n-3`` left to right and, inside a
column, rows ``i = n-1 .. j+2`` bottom-up, each entry zeroed by a rotation in
plane ``(j+1, i)``.  Such a rotation never touches row 0, so site 0 is mapped
onto chain site 0 and the leading chain is the Krylov chain seeded at site 0.
Different pivot orders give the same leading chain up to off-diagonal signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class GivensRotation:
    i: int
    j: int
    c: float
    s: float

    def __post_init__(self):
        if not self.i < self.j:
            raise ReductionError(f"rotation plane needs i < j, got ({self.i}, {self.j})")
        if abs(self.c * self.c + self.s * self.s - 1.0) > 1e-14:
            raise ReductionError("rotation is not orthogonal: c^2 + s^2 != 1")

    def matrix(self, n: int) -> np.ndarray:
        g = np.eye(n)
        g[self.i, self.i] = g[self.j, self.j] = self.c
        g[self.i, self.j] = self.s
        g[self.j, self.i] = -self.s
        return g


@dataclass(frozen=True)
class ChainBlock:
    """One decoupled chain of the reduced matrix (rows ``offset .. offset+length-1``)."""

    offset: int
    length: int
    diag: tuple[float, ...]
    offdiag: tuple[float, ...]
    null_block: bool = False

    def __post_init__(self):
        if self.length < 1:
            raise ReductionError("block length must be >= 1")
        if len(self.diag) != self.length or len(self.offdiag) != self.length - 1:
            raise ReductionError("block diag/offdiag sizes do not match its length")

    @classmethod
    def from_couplings(cls, couplings, fields=None, offset: int = 0) -> ChainBlock:
        couplings = tuple(float(x) for x in couplings)
        n = len(couplings) + 1
        diag = tuple(float(x) for x in fields) if fields is not None else (0.0,) * n
        null = not any(couplings) and not any(diag)
        return cls(offset, n, diag, couplings, null)

    def matrix(self) -> np.ndarray:
        off = np.asarray(self.offdiag, dtype=float)
        return np.diag(np.asarray(self.diag, dtype=float)) + np.diag(off, 1) + np.diag(off, -1)

    def to_dict(self) -> dict:
        return {
            "offset": self.offset,
            "length": self.length,
            "diag": list(self.diag),
            "offdiag": list(self.offdiag),
            "null_block": self.null_block,
        }


@dataclass(frozen=True)
class ReductionResult:
    """Output of :func:`tridiagonalize`.

    ``T = Q h Q^T`` holds for the raw Givens product ``Q``.  ``signs`` is the
    diagonal +-1 gauge that makes every chain coupling nonnegative; the
    canonical pair is ``(D T D, D Q)`` with ``D = diag(signs)``.
    """

    T: np.ndarray
    Q: np.ndarray
    rotations: tuple[GivensRotation, ...]
    blocks: tuple[ChainBlock, ...]
    signs: np.ndarray = field(repr=False)
    tol: float = 0.0

    @property
    def T_canonical(self) -> np.ndarray:
        return self.signs[:, None] * self.T * self.signs[None, :]

    @property
    def Q_canonical(self) -> np.ndarray:
        return self.signs[:, None] * self.Q

    def block_of(self, row: int) -> ChainBlock:
        for b in self.blocks:
            if b.offset <= row < b.offset + b.length:
                return b
        raise IndexError(row)

    @property
    def leading(self) -> ChainBlock:
        return self.blocks[0]

    def to_dict(self, emit_q: bool = False) -> dict:
        tc = self.T_canonical
        doc = {
            "T": {"diag": np.diag(tc).tolist(), "offdiag": np.diag(tc, 1).tolist()},
            "blocks": [b.to_dict() for b in self.blocks],
            "rotations": [{"i": r.i, "j": r.j, "c": r.c, "s": r.s} for r in self.rotations],
            "signs": [int(x) for x in self.signs],
        }
        if emit_q:
            doc["Q"] = self.Q_canonical.tolist()
        return doc


def rotation_zeroing(a: float, b: float, i: int, j: int) -> GivensRotation:
    """Rotation in plane ``(i, j)`` sending ``(a, b)`` to ``(r, 0)`` with ``r >= 0``."""
    if a == 0.0 and b == 0.0:
        raise ReductionError("rotation undefined for a zero vector")
    r = math.hypot(a, b)
    return GivensRotation(i, j, a / r, b / r)


def apply_similarity(h: np.ndarray, g: GivensRotation) -> np.ndarray:
    """Return ``G h G^T``; only rows and columns ``g.i``, ``g.j`` change."""
    out = np.array(h, dtype=np.float64, order="C", copy=True)
    n = out.shape[0]
    if not (0 <= g.i < n and 0 <= g.j < n):
        raise ReductionError(f"rotation plane ({g.i}, {g.j}) outside dimension {n}")
    kernels.rotate_similarity(out, g.i, g.j, g.c, g.s)
    return out


def default_tol(h: np.ndarray) -> float:
    return 1e-12 * float(np.max(np.abs(h))) if np.size(h) else 0.0


def tridiagonalize(h: np.ndarray, tol: float | None = None, backend=None) -> ReductionResult:
    """Reduce symmetric ``h`` to tridiagonal chains with Givens similarities.

    Entries no larger than ``tol`` (default ``1e-12 * max|h|``) count as zero.
    An input that is already tridiagonal comes back with no rotations and
    ``Q = I``.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] < 1:
        raise ReductionError("expected a nonempty square matrix")
    if not np.all(np.isfinite(h)):
        raise ReductionError("matrix has non-finite entries")
    if not np.array_equal(h, h.T):
        raise ReductionError("matrix is not symmetric")
    if tol is None:
        tol = default_tol(h)
    k = kernels if backend is None else backend
    T, Q, raw = k.tridiagonalize(h, float(tol))
    rots = tuple(GivensRotation(int(p), int(q), float(c), float(s)) for p, q, c, s in raw)
    blocks, signs = _split(T, tol)
    return ReductionResult(T, Q, rots, tuple(blocks), signs, float(tol))


def _split(T: np.ndarray, tol: float) -> tuple[list[ChainBlock], np.ndarray]:
    n = T.shape[0]
    off = np.diag(T, 1)
    diag = np.diag(T)
    signs = np.ones(n)
    cuts = [0] + [k + 1 for k in range(n - 1) if abs(off[k]) <= tol] + [n]
    blocks: list[ChainBlock] = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        for k in range(a, b - 1):
            signs[k + 1] = signs[k] * (1.0 if off[k] >= 0 else -1.0)
        d = tuple(float(x) for x in diag[a:b])
        o = tuple(abs(float(x)) for x in off[a:b - 1])
        null = b - a == 1 and abs(d[0]) <= tol
        if null and blocks and blocks[-1].null_block:
            prev = blocks.pop()
            blocks.append(
                ChainBlock(prev.offset, prev.length + 1, prev.diag + (0.0,), prev.offdiag + (0.0,), True)
            )
            continue
        if null:
            d = (0.0,)
        blocks.append(ChainBlock(a, b - a, d, o, null))
    return blocks, signs


def split_blocks(R: ReductionResult, tol: float | None = None) -> list[ChainBlock]:
    """Decoupled chains of ``R.T`` with nonnegative couplings.

    Rows split wherever ``|T[k, k+1]| <= tol``; consecutive all-zero rows are
    merged into one null block.
    """
    return _split(R.T, R.tol if tol is None else tol)[0]


def site_image(R: ReductionResult, i: int) -> tuple[np.ndarray, int | None]:
    """Image ``Q e_i`` of graph site ``i`` in the canonical chain basis.

    The second item is the chain site ``k`` when the image is ``+-e_k`` to
    within ``1e-10``, else ``None``.
    """
    Qc = R.Q_canonical
    if not 0 <= i < Qc.shape[0]:
        raise IndexError(f"site {i} out of range")
    v = Qc[:, i].copy()
    k = int(np.argmax(np.abs(v)))
    rest = np.delete(v, k)
    if abs(abs(v[k]) - 1.0) < 1e-10 and (rest.size == 0 or np.max(np.abs(rest)) < 1e-10):
        return v, k
    return v, None
