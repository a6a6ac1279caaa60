"""Fused loops for the SiLU jet activation and its vector-Jacobian product.

The sigmoid itself is computed by numpy by the caller so the value component
is bit-identical whatever the jet order; the kernels only combine it.
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def _silu_derivs(z, s):
    q = s * (1.0 - s)
    s2 = q * (1.0 - 2.0 * s)
    s3 = q * (1.0 - 6.0 * q)
    s4 = s2 * (1.0 - 12.0 * q)
    f1 = s + z * q
    f2 = 2.0 * q + z * s2
    f3 = 3.0 * s2 + z * s3
    f4 = 4.0 * s3 + z * s4
    return f1, f2, f3, f4


@nb.njit(cache=True)
def silu_forward(z, s, out):
    K, M = z.shape
    for i in range(M):
        zv = z[0, i]
        si = s[i]
        out[0, i] = zv * si
        if K == 1:
            continue
        f1, f2, f3, _ = _silu_derivs(zv, si)
        zx = z[1, i]
        out[1, i] = f1 * zx
        if K == 2:
            continue
        zt = z[2, i]
        zxt = z[3, i]
        zxx = z[4, i]
        zxxt = z[5, i]
        zx2 = zx * zx
        out[2, i] = f1 * zt
        out[3, i] = f2 * zx * zt + f1 * zxt
        out[4, i] = f2 * zx2 + f1 * zxx
        out[5, i] = f3 * zx2 * zt + f2 * (2.0 * zx * zxt + zxx * zt) + f1 * zxxt


@nb.njit(cache=True)
def silu_vjp(z, s, g, gz):
    K, M = z.shape
    for i in range(M):
        zv = z[0, i]
        f1, f2, f3, f4 = _silu_derivs(zv, s[i])
        if K == 1:
            gz[0, i] = g[0, i] * f1
            continue
        zx = z[1, i]
        if K == 2:
            gz[0, i] = g[0, i] * f1 + g[1, i] * f2 * zx
            gz[1, i] = g[1, i] * f1
            continue
        zt = z[2, i]
        zxt = z[3, i]
        zxx = z[4, i]
        zxxt = z[5, i]
        gv = g[0, i]
        gx = g[1, i]
        gt = g[2, i]
        gxt = g[3, i]
        gxx = g[4, i]
        gxxt = g[5, i]
        zx2 = zx * zx
        gz[0, i] = (gv * f1 + gx * f2 * zx + gt * f2 * zt
                    + gxt * (f3 * zx * zt + f2 * zxt)
                    + gxx * (f3 * zx2 + f2 * zxx)
                    + gxxt * (f4 * zx2 * zt + f3 * (2.0 * zx * zxt + zxx * zt) + f2 * zxxt))
        gz[1, i] = (gx * f1 + gxt * f2 * zt + 2.0 * gxx * f2 * zx
                    + 2.0 * gxxt * (f3 * zx * zt + f2 * zxt))
        gz[2, i] = gt * f1 + gxt * f2 * zx + gxxt * (f3 * zx2 + f2 * zxx)
        gz[3, i] = gxt * f1 + 2.0 * gxxt * f2 * zx
        gz[4, i] = gxx * f1 + gxxt * f2 * zt
        gz[5, i] = gxxt * f1


def silu_stack(z: np.ndarray, s: np.ndarray) -> np.ndarray:
    K = z.shape[0]
    zf = np.ascontiguousarray(z).reshape(K, -1)
    out = np.empty_like(zf)
    silu_forward(zf, np.ascontiguousarray(s).reshape(-1), out)
    return out.reshape(z.shape)


def silu_stack_vjp(z: np.ndarray, s: np.ndarray, g: np.ndarray) -> np.ndarray:
    K = z.shape[0]
    zf = np.ascontiguousarray(z).reshape(K, -1)
    gz = np.empty_like(zf)
    silu_vjp(zf, np.ascontiguousarray(s).reshape(-1),
             np.ascontiguousarray(g).reshape(K, -1), gz)
    return gz.reshape(z.shape)
