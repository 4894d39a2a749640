"""Hot numeric kernels with numba and pure-numpy implementations.

The frequency-grid solves dominate runtime: every grid point needs an 8x8
complex solve plus a handful of small matrix products, and synthesis mixes
thousands of per-bin 4-vectors per segment. Each kernel exists twice, once
as a fused numba loop and once vectorized over numpy's batched linalg.

Backend selection: the environment variable ``OPTOLEV_BACKEND`` may be set
to ``numpy`` or ``numba``; default is numba when importable, else numpy.
``benchmarks/bench_kernels.py`` times both paths on representative sizes.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

_choice = os.environ.get("OPTOLEV_BACKEND", "").strip().lower()
if _choice not in ("", "numba", "numpy"):
    raise ValueError(f"OPTOLEV_BACKEND must be 'numba' or 'numpy', got {_choice!r}")
if _choice == "numba" and not _HAVE_NUMBA:
    raise ImportError("OPTOLEV_BACKEND=numba but numba is not importable")

USE_NUMBA = _HAVE_NUMBA and _choice != "numpy"


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# transfer_stack: X[k] = (-i w_k I - M)^-1 @ B


def _transfer_stack_numpy(M: np.ndarray, B: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    eye = np.eye(n)
    lhs = -1j * omegas[:, None, None] * eye - M
    return np.linalg.solve(lhs, np.broadcast_to(B, (omegas.size,) + B.shape))


if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _transfer_stack_numba(M, B, omegas):  # pragma: no cover - jitted
        n = M.shape[0]
        nc = B.shape[1]
        nw = omegas.shape[0]
        out = np.empty((nw, n, nc), dtype=np.complex128)
        Bc = B.astype(np.complex128)
        Mc = M.astype(np.complex128)
        for k in prange(nw):
            lhs = -Mc.copy()
            s = -1j * omegas[k]
            for i in range(n):
                lhs[i, i] += s
            out[k] = np.linalg.solve(lhs, Bc)
        return out


def transfer_stack(M: np.ndarray, B: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """Stack of frequency-domain solves ``(-i w I - M)^-1 B`` over a grid."""
    omegas = np.ascontiguousarray(omegas, dtype=float)
    M = np.ascontiguousarray(M, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    if USE_NUMBA:
        return _transfer_stack_numba(M, B, omegas)
    return _transfer_stack_numpy(M, B, omegas)


# ---------------------------------------------------------------------------
# pair_product: S[k] = G[k] @ W @ G[n-1-k].T  (two-frequency spectral pairing
# on a symmetric grid, where index n-1-k holds the mirror frequency -w_k)


def _pair_product_numpy(G: np.ndarray, W: np.ndarray) -> np.ndarray:
    GW = G @ W
    return np.einsum("kij,klj->kil", GW, G[::-1], optimize=True)


if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _pair_product_numba(G, W):  # pragma: no cover - jitted
        nw, r, c = G.shape
        out = np.empty((nw, r, r), dtype=np.complex128)
        for k in prange(nw):
            gw = G[k] @ W
            out[k] = gw @ G[nw - 1 - k].T.copy()
        return out


def pair_product(G: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Spectral matrices ``S(w) = G(w) W G(-w)^T`` on a symmetric grid."""
    G = np.ascontiguousarray(G, dtype=complex)
    W = np.ascontiguousarray(W, dtype=complex)
    if USE_NUMBA:
        return _pair_product_numba(G, W)
    return _pair_product_numpy(G, W)


# ---------------------------------------------------------------------------
# mix_bins: y[k] = L[k] @ z[k] for stacks of small factors (synthesis inner op)


def _mix_bins_numpy(L: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.einsum("kij,kj->ki", L, z)


if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _mix_bins_numba(L, z):  # pragma: no cover - jitted
        nb, r, _ = L.shape
        out = np.empty((nb, r), dtype=np.complex128)
        for k in prange(nb):
            for i in range(r):
                acc = 0.0 + 0.0j
                for j in range(r):
                    acc += L[k, i, j] * z[k, j]
                out[k, i] = acc
        return out


def mix_bins(L: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Batched small matrix-vector products ``y_k = L_k z_k``."""
    L = np.ascontiguousarray(L, dtype=complex)
    z = np.ascontiguousarray(z, dtype=complex)
    if USE_NUMBA:
        return _mix_bins_numba(L, z)
    return _mix_bins_numpy(L, z)


def warmup():
    """Trigger JIT compilation of all kernels on tiny inputs."""
    M = -np.eye(2)
    B = np.eye(2)
    w = np.array([-1.0, 1.0])
    X = transfer_stack(M, B, w)
    pair_product(X, np.eye(2, dtype=complex))
    mix_bins(np.repeat(np.eye(2, dtype=complex)[None], 2, axis=0),
             np.ones((2, 2), dtype=complex))
