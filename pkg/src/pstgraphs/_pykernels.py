"""Pure-numpy kernels; fallback when the compiled core is unavailable.

Must stay call-compatible with ``_ckernels.pyx``.
"""

from __future__ import annotations

import math

import numpy as np


def rotate_similarity(a: np.ndarray, p: int, q: int, c: float, s: float) -> None:
    """In place ``a <- G a G^T`` for the rotation acting on sites ``p < q``.

    ``G`` maps ``(x_p, x_q)`` to ``(c x_p + s x_q, -s x_p + c x_q)``.
    The result is exactly symmetric.
    """
    app, aqq, apq = a[p, p], a[q, q], a[p, q]
    rp = a[p].copy()
    rq = a[q]
    newp = c * rp + s * rq
    newq = -s * rp + c * rq
    a[p, :] = newp
    a[q, :] = newq
    a[:, p] = newp
    a[:, q] = newq
    cs = c * s
    a[p, p] = c * c * app + 2.0 * cs * apq + s * s * aqq
    a[q, q] = s * s * app - 2.0 * cs * apq + c * c * aqq
    a[p, q] = a[q, p] = cs * (aqq - app) + (c * c - s * s) * apq


def rotate_rows(m: np.ndarray, p: int, q: int, c: float, s: float) -> None:
    rp = m[p].copy()
    m[p] = c * rp + s * m[q]
    m[q] = -s * rp + c * m[q]


def tridiagonalize(h: np.ndarray, tol: float):
    """Column sweep, plane ``(j+1, i)``, rows taken bottom-up.

    Returns ``(T, Q, rotations)`` with ``T = Q h Q^T`` and ``rotations`` an
    ``(m, 4)`` array of ``(p, q, c, s)`` rows in application order.
    """
    a = np.array(h, dtype=float, copy=True)
    n = a.shape[0]
    Q = np.eye(n)
    rots = []
    for j in range(n - 2):
        p = j + 1
        for i in range(n - 1, j + 1, -1):
            b = a[i, j]
            if b == 0.0:
                continue
            if abs(b) <= tol:
                a[i, j] = a[j, i] = 0.0
                continue
            r = math.hypot(a[p, j], b)
            c = a[p, j] / r
            s = b / r
            rotate_similarity(a, p, i, c, s)
            a[i, j] = a[j, i] = 0.0
            a[p, j] = a[j, p] = r
            rotate_rows(Q, p, i, c, s)
            rots.append((p, i, c, s))
    return a, Q, np.array(rots, dtype=float).reshape(-1, 4)


def transfer_grid(lam: np.ndarray, weight: np.ndarray, times: np.ndarray) -> np.ndarray:
    """``|sum_k weight_k exp(-i lam_k t)|^2`` for every ``t`` in ``times``."""
    phase = np.outer(times, lam)
    re = np.cos(phase) @ weight
    im = np.sin(phase) @ weight
    return re * re + im * im
