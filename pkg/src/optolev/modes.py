"""Filtered propagating optical mode and joint covariance reconstruction.

Two routes to the 4x4 covariance of ``(Q_xi, P_xi, x_b, p_b)``:

* model route - frequency integrals of the model cross-spectra for the
  optical and cross blocks, Lyapunov solution for the mechanical block;
* direct route - a frequency-dependent linear map applied to a spectral
  correlation matrix (model-generated or measured), with the mechanical
  quadratures reconstructed from the cooling-tone output field.

The mode annihilation operator is ``a_xi = int xi(w) a_B(w) dw / 2pi`` with
a flat (rectangular) spectral envelope normalized to
``int |xi(w)|^2 dw / 2pi = 1``, which makes ``[a_xi, a_xi^dag] = 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import pi

import numpy as np

from .model import (
    DriftModel,
    bright_rotation,
    steady_covariance,
)
from .params import TWO_PI, SystemParams
from .spectra import (
    SpectralMatrix,
    model_rows_bright,
    noise_spectrum_full,
    susceptibility,
    symmetric_grid,
)

_P_MEAS_SIGN = -1.0  # p(w) = -i (w / Omega_b) x(w) under the e^{+iwt} transform


@dataclass(frozen=True)
class FilterMode:
    """Flat spectral window of width ``width`` centered at ``center`` (rad/s)."""

    center: float
    width: float
    shape: str = "rect"

    def __post_init__(self):
        if self.width <= 0.0:
            raise ValueError("filter width must be positive")
        if self.shape != "rect":
            raise ValueError(f"unsupported filter shape: {self.shape!r}")

    @property
    def lo(self) -> float:
        return self.center - 0.5 * self.width

    @property
    def hi(self) -> float:
        return self.center + 0.5 * self.width

    def amplitude(self, omega) -> np.ndarray:
        """Spectral amplitude xi(w); satisfies int |xi|^2 dw / 2pi = 1."""
        omega = np.asarray(omega, dtype=float)
        val = np.sqrt(TWO_PI / self.width)
        return np.where((omega >= self.lo) & (omega <= self.hi), val, 0.0)

    def norm_integral(self) -> float:
        """Analytic normalization integral (identically 1 for rect)."""
        return (TWO_PI / self.width) * self.width / TWO_PI


def make_rect_filter(center: float, width: float) -> FilterMode:
    return FilterMode(center=center, width=width, shape="rect")


@dataclass(frozen=True)
class CovMatrix:
    """4x4 real symmetric covariance matrix of two bosonic modes."""

    matrix: np.ndarray
    basis: tuple
    provenance: str
    params_digest: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("covariance matrix must be 4x4")
        if np.max(np.abs(m - m.T)) > 1e-9 * max(1.0, np.max(np.abs(m))):
            raise ValueError("covariance matrix must be symmetric")
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))

    def to_dict(self) -> dict:
        iu = np.triu_indices(4)
        return {
            "schema": "optolev-covmatrix/1",
            "basis": list(self.basis),
            "provenance": self.provenance,
            "params_digest": self.params_digest,
            "entries": [float(self.matrix[i, j]) for i, j in zip(*iu)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CovMatrix":
        if data.get("schema") != "optolev-covmatrix/1":
            raise ValueError("unsupported covariance schema")
        m = np.zeros((4, 4))
        iu = np.triu_indices(4)
        for (i, j), v in zip(zip(*iu), data["entries"]):
            m[i, j] = v
            m[j, i] = v
        return cls(
            matrix=m,
            basis=tuple(data["basis"]),
            provenance=data["provenance"],
            params_digest=data.get("params_digest", ""),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CovMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Integration helpers: trapezoid over contiguous masked runs so that band
# edges sitting on grid points are treated exactly.


def masked_trapz(grid: np.ndarray, values: np.ndarray, mask: np.ndarray) -> complex:
    """Trapezoid integral of ``values`` over the contiguous runs of ``mask``.

    Runs break on index gaps and on frequency gaps (grids made of disjoint
    bands carry a jump between the bands that must not be integrated over).
    """
    if not np.any(mask):
        return 0.0
    step = np.min(np.diff(grid))
    total = 0.0 + 0.0j
    idx = np.flatnonzero(mask)
    breaks = (np.diff(idx) > 1) | (np.diff(grid[idx]) > 1.5 * step)
    for run in np.split(idx, np.flatnonzero(breaks) + 1):
        if run.size >= 2:
            total += np.trapz(values[run], grid[run])
    return total


def _discrete_filter(filt: FilterMode, grid: np.ndarray):
    """Filter amplitude on a grid, renormalized so the discrete trapezoid
    norm over the band is exactly 1."""
    mask = (grid >= filt.lo - 1e-9 * filt.width) & (grid <= filt.hi + 1e-9 * filt.width)
    if mask.sum() < 3:
        raise ValueError("filter band not resolved by the frequency grid")
    xi = np.zeros(grid.size)
    xi[mask] = np.sqrt(TWO_PI / filt.width)
    norm = np.real(masked_trapz(grid, xi**2, mask)) / TWO_PI
    xi[mask] /= np.sqrt(norm)
    return xi, mask


def pair_grid(filt: FilterMode, step: float) -> np.ndarray:
    """Symmetric grid covering the filter band and its mirror image."""
    hi = max(abs(filt.lo), abs(filt.hi))
    lo = min(abs(filt.lo), abs(filt.hi))
    if filt.lo < 0.0 < filt.hi:
        raise ValueError("rect filter must not straddle zero frequency")
    k_lo = int(np.floor(lo / step))
    k_hi = int(np.ceil(hi / step))
    pos = step * np.arange(k_lo, k_hi + 1, dtype=float)
    return np.concatenate([-pos[::-1], pos])


def _pair_integrals(grid: np.ndarray, rows: np.ndarray, W: np.ndarray) -> np.ndarray:
    """All pairings ``I[i, j] = int f_i(w)^T W f_j(-w) dw / 2pi``.

    ``rows`` has shape (nz, n, nc); the grid must be symmetric so that the
    mirror of index k is index n-1-k. Band edges are handled by run-wise
    trapezoids over the joint support.
    """
    nz = rows.shape[0]
    out = np.zeros((nz, nz), dtype=complex)
    support = np.abs(rows).sum(axis=2) > 0.0  # (nz, n)
    rows_w = rows @ W
    rows_rev = rows[:, ::-1, :]
    for i in range(nz):
        for j in range(nz):
            mask = support[i] & support[j][::-1]
            if not np.any(mask):
                continue
            g = np.einsum("kl,kl->k", rows_w[i], rows_rev[j])
            out[i, j] = masked_trapz(grid, g, mask) / TWO_PI
    return out


def _symmetrized(I: np.ndarray) -> np.ndarray:
    return np.real(0.5 * (I + I.T))


# ---------------------------------------------------------------------------
# Model route


def covariance_model(
    model: DriftModel,
    filt: FilterMode,
    step: float = TWO_PI * 25.0,
    commutator_tol: float = 1e-6,
) -> CovMatrix:
    """Joint covariance of the filtered output mode and the bright mode,
    computed from the model's cross-spectra.

    Optical and optical-mechanical blocks come from frequency integrals over
    the filter band (the envelope confines every integrand there); the
    mechanical block is the Lyapunov solution rotated onto the bright
    coordinate. The recovered mode commutator is checked against 1.
    """
    grid = pair_grid(filt, step)
    rows6 = model_rows_bright(model, grid)  # (n, 6, 10)
    xi, _ = _discrete_filter(filt, grid)
    xi_rev = xi[::-1]
    theta = model.params.theta

    n = grid.size
    zrows = np.zeros((4, n, rows6.shape[2]), dtype=complex)
    a_row = rows6[:, 0, :]
    adag_row = rows6[:, 1, :]
    x_b = np.cos(theta) * rows6[:, 2, :] + np.sin(theta) * rows6[:, 4, :]
    p_b = np.cos(theta) * rows6[:, 3, :] + np.sin(theta) * rows6[:, 5, :]
    zrows[0] = xi[:, None] * a_row + xi_rev[:, None] * adag_row  # Q_xi
    zrows[1] = 1j * (xi_rev[:, None] * adag_row - xi[:, None] * a_row)  # P_xi
    zrows[2] = x_b
    zrows[3] = p_b

    W = noise_spectrum_full(model)
    I = _pair_integrals(grid, zrows, W)
    V = _symmetrized(I)

    # ladder moments for the commutator identity
    arows = np.zeros((2, n, rows6.shape[2]), dtype=complex)
    arows[0] = xi[:, None] * a_row
    arows[1] = xi_rev[:, None] * adag_row
    Ia = _pair_integrals(grid, arows, W)
    commutator = np.real(Ia[0, 1] - Ia[1, 0])
    if abs(commutator - 1.0) > commutator_tol:
        raise RuntimeError(
            f"filtered-mode commutator {commutator!r} deviates from 1; "
            "grid too coarse for this filter"
        )

    V8 = steady_covariance(model)
    R = bright_rotation(theta)
    V[2:, 2:] = (R @ V8 @ R.T)[2:, 2:]

    return CovMatrix(
        matrix=V,
        basis=("Q_xi", "P_xi", "x_b", "p_b"),
        provenance="model-route",
        params_digest=model.params.digest(),
        meta={"commutator": float(commutator), "filter_width": filt.width},
    )


# ---------------------------------------------------------------------------
# Direct route


def covariance_direct(
    spec: SpectralMatrix,
    filt: FilterMode,
    params: SystemParams,
    mech_band: float = TWO_PI * 60e3,
    chi_floor_rel: float = 1e-3,
) -> CovMatrix:
    """Model-independent covariance from a spectral correlation matrix.

    The optical rows carry the filter envelope on the squeezing-tone
    entries; the mechanical rows invert the cooling-tone output on windows
    of width ``mech_band`` around both bright-mode sidebands:

        x_meas(w) = a_A(w) / c_A(w),   p_meas(w) = -i (w / Omega_b) x_meas(w)

    with ``c_A(w)`` the known coefficient of the bright coordinate in the
    detected field. Works identically on model-generated and measured
    spectral matrices.
    """
    if params.g_a <= 0.0 or params.eta <= 0.0:
        raise ValueError("mechanical reconstruction requires g_a > 0 and eta > 0")
    grid = spec.grid
    n = grid.size

    xi, band_mask = _discrete_filter(filt, grid)
    if not band_mask.any():
        raise ValueError("spectral grid does not cover the filter band")
    xi_rev = xi[::-1]

    wb = abs(params.omega_b)
    win = (np.abs(grid - wb) <= 0.5 * mech_band) | (np.abs(grid + wb) <= 0.5 * mech_band)
    if win.sum() < 4:
        raise ValueError("spectral grid does not cover the mechanical band")

    chi = susceptibility(grid, params.kappa, params.delta_a)
    chi_abs = np.abs(chi)
    if chi_abs[win].min() < chi_floor_rel * chi_abs.max():
        raise ValueError(
            "cooling-tone susceptibility too small inside the mechanical band; "
            "shrink mech_band or raise the floor"
        )
    phi_a = spec.phases[0]
    c_a = (
        -1j
        * np.sqrt(params.eta * params.kappa)
        * params.g_a
        * chi
        * np.exp(1j * phi_a)
    )
    w_x = np.where(win, 1.0 / c_a, 0.0)

    K = np.zeros((4, n, 4), dtype=complex)
    K[0, :, 2] = xi
    K[0, :, 3] = xi_rev
    K[1, :, 2] = -1j * xi
    K[1, :, 3] = 1j * xi_rev
    K[2, :, 0] = w_x
    K[3, :, 0] = _P_MEAS_SIGN * 1j * (grid / wb) * w_x

    support = np.abs(K).sum(axis=2) > 0.0
    A = spec.values
    I = np.zeros((4, 4), dtype=complex)
    K_rev = K[:, ::-1, :]
    for i in range(4):
        KA = np.einsum("kl,klm->km", K[i], A)
        for j in range(4):
            mask = support[i] & support[j][::-1]
            if not np.any(mask):
                continue
            g = np.einsum("km,km->k", KA, K_rev[j])
            I[i, j] = masked_trapz(grid, g, mask) / TWO_PI
    V = _symmetrized(I)

    return CovMatrix(
        matrix=V,
        basis=("Q_xi", "P_xi", "x_meas", "p_meas"),
        provenance="direct-route",
        params_digest=params.digest(),
        meta={"mech_band": mech_band, "filter_width": filt.width,
              "spec_kind": spec.kind},
    )
