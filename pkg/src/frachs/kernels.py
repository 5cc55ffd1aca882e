"""Hot pair-sum kernels for the singular-kernel double integrals.

Two implementations are kept in lockstep: numba @njit loops (default) and a
chunked pure-numpy path.  Selection happens per call through use_numba(),
which honours the FRACHS_NO_NUMBA environment variable and falls back to
numpy when numba is unavailable.  Both paths use a fixed traversal order:
the outer loop is embarrassingly parallel with per-row outputs, the inner
loop is sequential with compensated accumulation, and the final reduction is
a deterministic numpy sum, so results do not depend on the thread count.

benchmarks/bench_kernels.py times the two paths against each other.
"""

import os

import numpy as np

__all__ = ["use_numba", "backend_name", "pair_bilinear", "pair_commutator"]

_ENV_FLAG = "FRACHS_NO_NUMBA"

try:  # pragma: no cover - import guard
    if os.environ.get(_ENV_FLAG, "0") not in ("", "0"):
        raise ImportError("numba disabled by environment flag")
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # noqa: D103 - stub decorator
        def wrap(f):
            return f

        return wrap

    prange = range


def use_numba():
    if not _HAVE_NUMBA:
        return False
    return os.environ.get(_ENV_FLAG, "0") in ("", "0")


def backend_name():
    return "numba" if use_numba() else "numpy"


# ---------------------------------------------------------------- numba path


@njit(parallel=True, cache=True)
def _pair_bilinear_nb(coords, u, v, expo):
    nsup = coords.shape[0]
    ndim = coords.shape[1]
    pair = np.zeros(nsup)
    rowk = np.zeros(nsup)
    for i in prange(nsup):
        acc = 0.0
        acc_c = 0.0
        row = 0.0
        row_c = 0.0
        for j in range(nsup):
            if j == i:
                continue
            d2 = 0.0
            for a in range(ndim):
                diff = coords[i, a] - coords[j, a]
                d2 += diff * diff
            k = d2**-expo
            term = (u[i] - u[j]) * (v[i] - v[j]) * k
            y = term - acc_c
            t = acc + y
            acc_c = (t - acc) - y
            acc = t
            y = k - row_c
            t = row + y
            row_c = (t - row) - y
            row = t
        pair[i] = acc
        rowk[i] = row
    return pair, rowk


@njit(parallel=True, cache=True)
def _pair_commutator_nb(coords, u, phi, expo):
    nsup = coords.shape[0]
    ndim = coords.shape[1]
    out = np.zeros(nsup)
    for i in prange(nsup):
        acc = 0.0
        acc_c = 0.0
        for j in range(nsup):
            if j == i:
                continue
            d2 = 0.0
            for a in range(ndim):
                diff = coords[i, a] - coords[j, a]
                d2 += diff * diff
            dphi = phi[i] - phi[j]
            term = u[i] * u[j] * dphi * dphi * d2**-expo
            y = term - acc_c
            t = acc + y
            acc_c = (t - acc) - y
            acc = t
        out[i] = acc
    return out


# ---------------------------------------------------------------- numpy path

_CHUNK = 256


def _pair_bilinear_np(coords, u, v, expo):
    nsup = coords.shape[0]
    pair = np.zeros(nsup)
    rowk = np.zeros(nsup)
    for start in range(0, nsup, _CHUNK):
        stop = min(start + _CHUNK, nsup)
        block = coords[start:stop]
        d2 = ((block[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2)
        idx = np.arange(start, stop)
        d2[idx - start, idx] = 1.0  # placeholder, masked below
        k = d2**-expo
        k[idx - start, idx] = 0.0
        du = u[start:stop, None] - u[None, :]
        dv = v[start:stop, None] - v[None, :]
        pair[start:stop] = (du * dv * k).sum(axis=1)
        rowk[start:stop] = k.sum(axis=1)
    return pair, rowk


def _pair_commutator_np(coords, u, phi, expo):
    nsup = coords.shape[0]
    out = np.zeros(nsup)
    for start in range(0, nsup, _CHUNK):
        stop = min(start + _CHUNK, nsup)
        block = coords[start:stop]
        d2 = ((block[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2)
        idx = np.arange(start, stop)
        d2[idx - start, idx] = 1.0
        k = d2**-expo
        k[idx - start, idx] = 0.0
        dphi = phi[start:stop, None] - phi[None, :]
        out[start:stop] = (u[start:stop, None] * u[None, :] * dphi * dphi * k).sum(axis=1)
    return out


# ---------------------------------------------------------------- dispatch


def pair_bilinear(coords, u, v, expo):
    """Per-node pair sums over the support set.

    Returns (pair, rowk) where pair[i] = sum_j (u_i-u_j)(v_i-v_j) |x_i-x_j|^(-2 expo)
    and rowk[i] = sum_j |x_i-x_j|^(-2 expo), both over j != i within the
    support set.  expo is (n + 2s)/2 applied to squared distances.
    """
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    if use_numba():
        return _pair_bilinear_nb(coords, u, v, float(expo))
    return _pair_bilinear_np(coords, u, v, float(expo))


def pair_commutator(coords, u, phi, expo):
    """Per-node sums sum_j u_i u_j (phi_i - phi_j)^2 |x_i - x_j|^(-2 expo)."""
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    if use_numba():
        return _pair_commutator_nb(coords, u, phi, float(expo))
    return _pair_commutator_np(coords, u, phi, float(expo))
