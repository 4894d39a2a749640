"""Linearized dynamics of two cavity tones coupled to two mechanical modes.

State ordering is ``u = (X_A, Y_A, X_B, Y_B, x_x, p_x, x_y, p_y)`` with
amplitude/phase quadratures ``X = a + a^dag``, ``Y = i(a^dag - a)`` and
mechanical quadratures normalized to zero-point units, ``[x, p] = 2i``.
Vacuum therefore has unit variance in every quadrature.

The equations of motion implemented by :func:`build_drift` are

    dX_a/dt = -(kappa/2) X_a - Delta_a Y_a
    dY_a/dt = Delta_a X_a - (kappa/2) Y_a - 2 sum_j g_aj x_j
    dx_j/dt = Omega_j p_j
    dp_j/dt = -Omega_j x_j - gamma_j p_j - 2 sum_a g_aj X_a

with projected couplings g_ax = g_a cos(theta), g_ay = g_a sin(theta).
In the rotating-wave limit this bilinear coupling reduces to a
beam-splitter interaction for the red-detuned tone and a two-mode-squeezing
interaction for the blue-detuned tone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .params import SystemParams

N_STATE = 8
N_PROC = 6  # process noise channels: 4 cavity input quadratures + 2 forces

# Indices into the state vector
IX_A, IY_A, IX_B, IY_B, IX_X, IP_X, IX_Y, IP_Y = range(8)


class UnstableModelError(RuntimeError):
    """Raised when an operation requires a Hurwitz drift matrix."""


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with unit blocks [[0, 1], [-1, 0]].

    With the vacuum-is-identity normalization used here the quantum
    uncertainty relation reads ``V + i*J >= 0`` and symplectic eigenvalues
    are ``|eig(i J V)|`` with vacuum pinned at 1.
    """
    j2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = j2
    return out


@dataclass(frozen=True)
class DriftModel:
    """Drift/diffusion description of the linear stochastic dynamics.

    ``M`` is the 8x8 drift, ``D`` the symmetrized diffusion and ``N_in`` the
    unsymmetrized complex input spectral matrix (white inputs):
    ``<n_i(t) n_j(t')> = N_in[i, j] delta(t - t')``. The symmetric part of
    ``N_in`` equals ``D`` and ``N_in - N_in^T`` carries the input commutators.
    """

    M: np.ndarray
    D: np.ndarray
    N_in: np.ndarray
    params: SystemParams = field(repr=False)

    def noise_input_matrix(self) -> np.ndarray:
        """8x6 map from process noise channels onto the state derivatives."""
        return _noise_input_matrix(self.params)

    def process_noise_spectrum(self) -> np.ndarray:
        """6x6 unsymmetrized spectral matrix of the white process inputs."""
        return _process_noise_spectrum(self.params)


def _coupling_pairs(params: SystemParams):
    ga_x = params.g_a * np.cos(params.theta)
    ga_y = params.g_a * np.sin(params.theta)
    gb_x = params.g_b * np.cos(params.theta)
    gb_y = params.g_b * np.sin(params.theta)
    return (ga_x, ga_y), (gb_x, gb_y)


def _force_noise_levels(params: SystemParams):
    dpx = 4.0 * params.Gamma_x + 2.0 * params.gamma_x * (2.0 * params.nbar_x + 1.0)
    dpy = 4.0 * params.Gamma_y + 2.0 * params.gamma_y * (2.0 * params.nbar_y + 1.0)
    return dpx, dpy


def _noise_input_matrix(params: SystemParams) -> np.ndarray:
    L = np.zeros((N_STATE, N_PROC))
    sk = np.sqrt(params.kappa)
    L[IX_A, 0] = sk
    L[IY_A, 1] = sk
    L[IX_B, 2] = sk
    L[IY_B, 3] = sk
    L[IP_X, 4] = 1.0
    L[IP_Y, 5] = 1.0
    return L


def _process_noise_spectrum(params: SystemParams) -> np.ndarray:
    """Vacuum cavity inputs keep their commutator; force noise is symmetric."""
    vac = np.array([[1.0, 1.0j], [-1.0j, 1.0]])
    W = np.zeros((N_PROC, N_PROC), dtype=complex)
    W[0:2, 0:2] = vac
    W[2:4, 2:4] = vac
    dpx, dpy = _force_noise_levels(params)
    W[4, 4] = dpx
    W[5, 5] = dpy
    return W


def build_drift(params: SystemParams) -> DriftModel:
    """Assemble the drift, diffusion and input spectral matrices."""
    params.validate()
    (ga_x, ga_y), (gb_x, gb_y) = _coupling_pairs(params)

    M = np.zeros((N_STATE, N_STATE))
    half_k = 0.5 * params.kappa

    for (ix, iy, delta, gx, gy) in (
        (IX_A, IY_A, params.delta_a, ga_x, ga_y),
        (IX_B, IY_B, params.delta_b, gb_x, gb_y),
    ):
        M[ix, ix] = -half_k
        M[ix, iy] = -delta
        M[iy, ix] = delta
        M[iy, iy] = -half_k
        M[iy, IX_X] = -2.0 * gx
        M[iy, IX_Y] = -2.0 * gy

    for (ixm, ipm, omega, gamma, gax, gbx) in (
        (IX_X, IP_X, params.omega_x, params.gamma_x, ga_x, gb_x),
        (IX_Y, IP_Y, params.omega_y, params.gamma_y, ga_y, gb_y),
    ):
        M[ixm, ipm] = omega
        M[ipm, ixm] = -omega
        M[ipm, ipm] = -gamma
        M[ipm, IX_A] = -2.0 * gax
        M[ipm, IX_B] = -2.0 * gbx

    L = _noise_input_matrix(params)
    W = _process_noise_spectrum(params)
    N_in = L @ W @ L.T
    D = np.real(0.5 * (N_in + N_in.T))
    return DriftModel(M=M, D=D, N_in=N_in, params=params)


def stability(model: DriftModel) -> tuple[bool, float]:
    """Hurwitz test of the drift; margin is minus the largest real part."""
    eig = np.linalg.eigvals(model.M)
    worst = float(np.max(eig.real))
    return worst < 0.0, -worst


def solve_lyapunov(M: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Solve ``M V + V M^T + D = 0`` and symmetrize the result."""
    V = solve_continuous_lyapunov(np.asarray(M, dtype=float), -np.asarray(D, dtype=float))
    return 0.5 * (V + V.T)


def steady_covariance(model: DriftModel) -> np.ndarray:
    """Stationary 8x8 covariance of the state vector.

    Raises :class:`UnstableModelError` when the drift is not Hurwitz.
    """
    ok, _ = stability(model)
    if not ok:
        raise UnstableModelError("unstable drift")
    return solve_lyapunov(model.M, model.D)


def bright_rotation(theta: float) -> np.ndarray:
    """4x8 map extracting (X_B, Y_B, x_b, p_b) from the full state."""
    R = np.zeros((4, N_STATE))
    R[0, IX_B] = 1.0
    R[1, IY_B] = 1.0
    R[2, IX_X] = np.cos(theta)
    R[2, IX_Y] = np.sin(theta)
    R[3, IP_X] = np.cos(theta)
    R[3, IP_Y] = np.sin(theta)
    return R


def intracavity_cov(model: DriftModel):
    """Joint covariance of the squeezing-tone intracavity field and the
    bright mechanical coordinate, ``(X_B, Y_B, x_b, p_b)``."""
    from .modes import CovMatrix  # local import to avoid a module cycle

    V8 = steady_covariance(model)
    R = bright_rotation(model.params.theta)
    V4 = R @ V8 @ R.T
    return CovMatrix(
        matrix=0.5 * (V4 + V4.T),
        basis=("X_B", "Y_B", "x_b", "p_b"),
        provenance="intracavity",
        params_digest=model.params.digest(),
    )


def bright_occupation(V8: np.ndarray, theta: float) -> float:
    """Phonon occupation of the bright mode from an 8x8 state covariance."""
    R = bright_rotation(theta)
    Vb = R @ V8 @ R.T
    return float((Vb[2, 2] + Vb[3, 3] - 2.0) / 4.0)


def mode_occupation(V8: np.ndarray, ix: int, ip: int) -> float:
    """Occupation of one harmonic mode given its quadrature indices."""
    return float((V8[ix, ix] + V8[ip, ip] - 2.0) / 4.0)
