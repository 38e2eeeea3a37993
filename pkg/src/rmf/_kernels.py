"""Compiled inner loops for frame propagation.

Both kernels work on batches: ``B`` independent curves sharing one grid shape.
Frames are ``(B, m, n, n)`` with vectors stored row-wise.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _gram_schmidt(f):
    n = f.shape[0]
    for i in range(n):
        for j in range(i):
            d = 0.0
            for k in range(n):
                d += f[i, k] * f[j, k]
            for k in range(n):
                f[i, k] -= d * f[j, k]
        nrm = 0.0
        for k in range(n):
            nrm += f[i, k] * f[i, k]
        nrm = np.sqrt(nrm)
        for k in range(n):
            f[i, k] /= nrm


@njit(cache=True)
def _reflect_rows(f, v, c, first_row):
    n = f.shape[1]
    for j in range(first_row, f.shape[0]):
        d = 0.0
        for k in range(n):
            d += f[j, k] * v[k]
        d *= 2.0 / c
        for k in range(n):
            f[j, k] -= d * v[k]


@njit(cache=True)
def double_reflection(points, tangents, initial):
    """Returns ``(frames, bad)``; ``bad`` is the first degenerate step index or -1."""
    nb, m, n = points.shape
    out = np.empty((nb, m, n, n))
    v1 = np.empty(n)
    v2 = np.empty(n)
    cur = np.empty((n, n))
    for b in range(nb):
        cur[:, :] = initial[b]
        out[b, 0] = cur
        for i in range(m - 1):
            c1 = 0.0
            for k in range(n):
                v1[k] = points[b, i + 1, k] - points[b, i, k]
                c1 += v1[k] * v1[k]
            if c1 <= 1e-28:
                return out, i
            # row 0 carries the tangent through the first reflection
            _reflect_rows(cur, v1, c1, 0)
            c2 = 0.0
            for k in range(n):
                v2[k] = tangents[b, i + 1, k] - cur[0, k]
                c2 += v2[k] * v2[k]
            if c2 > 1e-30:
                _reflect_rows(cur, v2, c2, 1)
            for k in range(n):
                cur[0, k] = tangents[b, i + 1, k]
            _gram_schmidt(cur)
            out[b, i + 1] = cur
    return out, -1


@njit(cache=True)
def _rhs(f, k, d):
    n = f.shape[0]
    for c in range(n):
        acc = 0.0
        for j in range(n - 1):
            acc += k[j] * f[j + 1, c]
        d[0, c] = acc
        for j in range(n - 1):
            d[j + 1, c] = -k[j] * f[0, c]


@njit(cache=True)
def rk4_frames(s, table, initial, with_position, origin):
    """Classical RK4 for the RM system.

    ``table[i, stage, b]`` holds the curvatures at the start (0), midpoint (1)
    and end (2) of step ``i`` for batch member ``b``.
    """
    nb, n, _ = initial.shape
    m = s.shape[0]
    out = np.empty((nb, m, n, n))
    pos = np.zeros((nb, m, n))
    f1 = np.empty((n, n))
    f2 = np.empty((n, n))
    f3 = np.empty((n, n))
    f4 = np.empty((n, n))
    tmp = np.empty((n, n))
    cur = np.empty((n, n))
    for b in range(nb):
        cur[:, :] = initial[b]
        out[b, 0] = cur
        for k in range(n):
            pos[b, 0, k] = origin[k]
        for i in range(m - 1):
            h = s[i + 1] - s[i]
            _rhs(cur, table[i, 0, b], f1)
            tmp[:, :] = cur + 0.5 * h * f1
            _rhs(tmp, table[i, 1, b], f2)
            tmp[:, :] = cur + 0.5 * h * f2
            _rhs(tmp, table[i, 1, b], f3)
            tmp[:, :] = cur + h * f3
            _rhs(tmp, table[i, 2, b], f4)
            if with_position:
                for k in range(n):
                    pos[b, i + 1, k] = pos[b, i, k] + h / 6.0 * (
                        6.0 * cur[0, k] + h * (f1[0, k] + f2[0, k] + f3[0, k])
                    )
            cur += h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
            _gram_schmidt(cur)
            out[b, i + 1] = cur
    return out, pos
