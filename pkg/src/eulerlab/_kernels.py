"""Optional compiled inner loops.

Every routine here replicates, operation for operation, the numpy reference
path next to its call site: same pairwise power-of-two reduction tree, same
split real/imaginary arithmetic, so results are bit-identical whichever path
runs. Import failure (no numba installed) is fine; callers fall back.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def _next_pow2(m: int) -> int:
    p = 1
    while p < m:
        p *= 2
    return p


@njit(cache=True)
def _fold_inplace(re, im, m):  # pragma: no cover - compiled
    # power-of-two halving tree over the first m slots (rest must be zero),
    # mirroring pairwise_fold exactly
    size = len(re)
    while size > 1:
        half = size // 2
        for i in range(half):
            re[i] = re[i] + re[half + i]
            im[i] = im[i] + im[half + i]
        size = half
    return re[0], im[0]


@njit(cache=True)
def cauchy_rows(tx, ty, sx, sy, fwre, fwim, rmin2, out_re, out_im):  # pragma: no cover - compiled
    """Sum of (z-w)/(pi |z-w|^2) * fw over sources w, for each target z.

    Pairs closer than sqrt(rmin2) are skipped (the punctured singular cell).
    The per-target reduction uses the zero-padded power-of-two pairwise tree.
    """
    m = len(sx)
    p = 1
    while p < m:
        p *= 2
    buf_re = np.zeros(p, dtype=np.float64)
    buf_im = np.zeros(p, dtype=np.float64)
    inv_pi = 1.0 / np.pi
    for t in range(len(tx)):
        for j in range(m):
            dx = tx[t] - sx[j]
            dy = ty[t] - sy[j]
            r2 = dx * dx + dy * dy
            if r2 < rmin2:
                buf_re[j] = 0.0
                buf_im[j] = 0.0
            else:
                s = inv_pi / r2
                kre = dx * s
                kim = dy * s
                buf_re[j] = kre * fwre[j] - kim * fwim[j]
                buf_im[j] = kre * fwim[j] + kim * fwre[j]
        for j in range(m, p):
            buf_re[j] = 0.0
            buf_im[j] = 0.0
        size = p
        while size > 1:
            half = size // 2
            for i in range(half):
                buf_re[i] = buf_re[i] + buf_re[half + i]
                buf_im[i] = buf_im[i] + buf_im[half + i]
            size = half
        out_re[t] = buf_re[0]
        out_im[t] = buf_im[0]


@njit(cache=True)
def particle_velocities(px, py, wre, wim, delta2, out_re, out_im):  # pragma: no cover - compiled
    """Blob-kernel velocity at every particle from all other particles.

    u(z_t) = sum_j (z_t - z_j)/(pi (|z_t - z_j|^2 + delta^2)) * w_j, with the
    self term excluded. Reduction is the zero-padded pairwise tree.
    """
    m = len(px)
    p = 1
    while p < m:
        p *= 2
    buf_re = np.zeros(p, dtype=np.float64)
    buf_im = np.zeros(p, dtype=np.float64)
    inv_pi = 1.0 / np.pi
    for t in range(m):
        for j in range(m):
            if j == t:
                buf_re[j] = 0.0
                buf_im[j] = 0.0
            else:
                dx = px[t] - px[j]
                dy = py[t] - py[j]
                s = inv_pi / (dx * dx + dy * dy + delta2)
                kre = dx * s
                kim = dy * s
                buf_re[j] = kre * wre[j] - kim * wim[j]
                buf_im[j] = kre * wim[j] + kim * wre[j]
        for j in range(m, p):
            buf_re[j] = 0.0
            buf_im[j] = 0.0
        size = p
        while size > 1:
            half = size // 2
            for i in range(half):
                buf_re[i] = buf_re[i] + buf_re[half + i]
                buf_im[i] = buf_im[i] + buf_im[half + i]
            size = half
        out_re[t] = buf_re[0]
        out_im[t] = buf_im[0]


@njit(cache=True)
def velocities_at(tx, ty, px, py, wre, wim, delta2, out_re, out_im):  # pragma: no cover - compiled
    """Blob-kernel velocity at arbitrary targets (no self-exclusion)."""
    m = len(px)
    p = 1
    while p < m:
        p *= 2
    buf_re = np.zeros(p, dtype=np.float64)
    buf_im = np.zeros(p, dtype=np.float64)
    inv_pi = 1.0 / np.pi
    for t in range(len(tx)):
        for j in range(m):
            dx = tx[t] - px[j]
            dy = ty[t] - py[j]
            s = inv_pi / (dx * dx + dy * dy + delta2)
            kre = dx * s
            kim = dy * s
            buf_re[j] = kre * wre[j] - kim * wim[j]
            buf_im[j] = kre * wim[j] + kim * wre[j]
        for j in range(m, p):
            buf_re[j] = 0.0
            buf_im[j] = 0.0
        size = p
        while size > 1:
            half = size // 2
            for i in range(half):
                buf_re[i] = buf_re[i] + buf_re[half + i]
                buf_im[i] = buf_im[i] + buf_im[half + i]
            size = half
        out_re[t] = buf_re[0]
        out_im[t] = buf_im[0]
