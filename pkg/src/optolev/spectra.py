"""Frequency-domain solution: susceptibility, transfer matrices and the
4x4 spectral correlation matrix of the detected output fields.

Fourier convention ``f(w) = int f(t) exp(+i w t) dt``. Correlations are
defined through ``<a_i(w) a_j(w')> = 2 pi A_ij(w) delta(w + w')`` in the
ladder basis ``a = (a_A, a_A^dag, a_B, a_B^dag)`` of the two detected
output fields. With vacuum inputs the matrix reduces exactly to
``A_12 = A_34 = 1`` and zeros elsewhere, independent of detection loss.

The input-output chain applied here is

    a_out = sqrt(kappa) a_cav - a_in
    a_det = sqrt(eta) exp(i phi) a_out + sqrt(1 - eta) a_vac

where the passthrough coefficient ``kappa chi(w) - 1`` is unimodular (it is
the frequency-dependent reflection phase) and ``phi`` is the constant
detection reference phase per field.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import pi

import numpy as np

from . import _kernels
from .model import (
    N_PROC,
    N_STATE,
    DriftModel,
    UnstableModelError,
    stability,
)
from .params import TWO_PI, SystemParams

N_NOISE = N_PROC + 4  # process channels + two detection vacua

SPECTRA_CSV_SCHEMA = "optolev-spectra/1"


def susceptibility(omega, kappa: float, delta: float):
    """Cavity susceptibility ``chi(w) = 1 / (kappa/2 - i (w + Delta))``."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return 1.0 / (0.5 * kappa - 1j * (np.asarray(omega, dtype=float) + delta))


def transfer(omega: float, model: DriftModel) -> np.ndarray:
    """Frequency-domain propagator ``T(w) = (-i w I - M)^-1``.

    Maps white-noise inputs onto the state: ``u(w) = T(w) n(w)``.
    """
    lhs = -1j * omega * np.eye(N_STATE) - model.M
    try:
        return np.linalg.inv(lhs)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"transfer matrix singular at omega={omega!r}"
        ) from exc


@dataclass(frozen=True)
class SpectralMatrix:
    """Spectral correlation matrix on a symmetric frequency grid.

    ``values[k]`` is the 4x4 complex matrix at ``grid[k]``; the grid must
    satisfy ``grid[::-1] == -grid`` so that the mirror frequency of index
    ``k`` sits at index ``n-1-k``. ``phases`` records the constant detection
    phases the matrix was built with (zero for phase-rotated measured data).
    """

    grid: np.ndarray
    values: np.ndarray
    kind: str = "model"
    phases: tuple = (0.0, 0.0)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing 1-D")
        if not np.allclose(grid[::-1], -grid, atol=1e-6 * max(abs(grid[0]), 1.0)):
            raise ValueError("grid must be symmetric about zero")
        if values.shape != (grid.size, 4, 4):
            raise ValueError("values must have shape (len(grid), 4, 4)")
        if self.kind not in ("model", "measured"):
            raise ValueError("kind must be 'model' or 'measured'")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def mirror_index(self, k: int) -> int:
        return self.grid.size - 1 - k

    def band_mask(self, lo: float, hi: float) -> np.ndarray:
        return (self.grid >= lo) & (self.grid <= hi)


def symmetric_grid(w_max: float, step: float) -> np.ndarray:
    """Uniform grid over [-w_max, w_max] symmetric about zero."""
    if step <= 0 or w_max <= 0:
        raise ValueError("w_max and step must be positive")
    n_half = int(round(w_max / step))
    if n_half < 1:
        raise ValueError("grid span smaller than one step")
    return step * np.arange(-n_half, n_half + 1, dtype=float)


def default_grid(
    params: SystemParams,
    span: float = TWO_PI * 250e3,
    step: float = TWO_PI * 25.0,
) -> np.ndarray:
    """Symmetric grid covering both sideband regions with margin ``span``."""
    return symmetric_grid(abs(params.omega_b) + span, step)


def _quadrature_rotation(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


_U2 = 0.5 * np.array([[1.0, 1.0j], [1.0, -1.0j]])  # (a, a^dag) from (X, Y)


def noise_spectrum_full(model: DriftModel) -> np.ndarray:
    """10x10 unsymmetrized spectral matrix of all white inputs."""
    vac = np.array([[1.0, 1.0j], [-1.0j, 1.0]])
    W = np.zeros((N_NOISE, N_NOISE), dtype=complex)
    W[:N_PROC, :N_PROC] = model.process_noise_spectrum()
    W[6:8, 6:8] = vac
    W[8:10, 8:10] = vac
    return W


def _state_rows(model: DriftModel, grid: np.ndarray) -> np.ndarray:
    """Noise-coefficient rows of the state vector, shape (n, 8, 10)."""
    L10 = np.zeros((N_STATE, N_NOISE))
    L10[:, :N_PROC] = model.noise_input_matrix()
    return _kernels.transfer_stack(model.M, L10, grid)


def detected_ladder_rows(
    model: DriftModel,
    grid: np.ndarray,
    imprecision_free_a: bool = False,
) -> np.ndarray:
    """Noise-coefficient rows of the detected ladder operators.

    Returns shape (n, 4, 10) in the basis (a_A, a_A^dag, a_B, a_B^dag) of
    the detected fields. With ``imprecision_free_a`` the direct vacuum
    passthrough and detection vacuum of field A are dropped (backaction
    inside the dynamics is kept); this is a diagnostic mode for validating
    the mechanical reconstruction and deliberately breaks the field-A
    commutator.
    """
    p = model.params
    X = _state_rows(model, grid)  # (n, 8, 10)

    sk = np.sqrt(p.kappa)
    q_out = sk * X[:, 0:4, :]
    # vacuum passthrough -a_in per field
    q_out[:, 0, 0] -= 1.0
    q_out[:, 1, 1] -= 1.0
    q_out[:, 2, 2] -= 1.0
    q_out[:, 3, 3] -= 1.0

    se, sv = np.sqrt(p.eta), np.sqrt(1.0 - p.eta)
    rot = np.zeros((4, 4))
    rot[0:2, 0:2] = _quadrature_rotation(p.phi_a)
    rot[2:4, 2:4] = _quadrature_rotation(p.phi_b)
    q_det = se * np.einsum("ij,kjl->kil", rot, q_out)
    q_det[:, 0, 6] += sv
    q_det[:, 1, 7] += sv
    q_det[:, 2, 8] += sv
    q_det[:, 3, 9] += sv

    U4 = np.zeros((4, 4), dtype=complex)
    U4[0:2, 0:2] = _U2
    U4[2:4, 2:4] = _U2
    rows = np.einsum("ij,kjl->kil", U4, q_det)

    if imprecision_free_a:
        # Field A carries only its bright-coordinate signal term
        # c(w) x_b(w): every vacuum admixture (reflection, intracavity and
        # detection) is dropped while the backaction content inside x_b is
        # kept. Breaks the field-A commutator; diagnostic use only.
        chi = susceptibility(grid, p.kappa, p.delta_a)
        coef = -1j * se * p.g_a * sk * chi * np.exp(1j * p.phi_a)
        xb_row = np.cos(p.theta) * X[:, 4, :] + np.sin(p.theta) * X[:, 6, :]
        rows[:, 0, :] = coef[:, None] * xb_row
        rows[:, 1, :] = np.conj(coef[::-1, None] * xb_row[::-1])
    return rows


def output_spectral_matrix(
    grid: np.ndarray,
    model: DriftModel,
    imprecision_free_a: bool = False,
) -> SpectralMatrix:
    """Spectral correlation matrix of the detected output fields."""
    ok, _ = stability(model)
    if not ok:
        raise UnstableModelError("unstable drift")
    grid = np.asarray(grid, dtype=float)
    Ga = detected_ladder_rows(model, grid, imprecision_free_a=imprecision_free_a)
    W = noise_spectrum_full(model)
    values = _kernels.pair_product(Ga, W)
    return SpectralMatrix(
        grid=grid,
        values=values,
        kind="model",
        phases=(model.params.phi_a, model.params.phi_b),
        meta={"params_digest": model.params.digest(),
              "imprecision_free_a": imprecision_free_a},
    )


_FIELD_SLOT = {"A": (0, 1), "B": (2, 3)}


def heterodyne_psd(spec: SpectralMatrix, field: str) -> np.ndarray:
    """Measured-axis heterodyne PSD of one field on ``spec.grid``.

    The photocurrent PSD at absolute frequency ``Omega_LO + w`` equals the
    anti-normally ordered element ``A_12(w)`` (``A_34`` for field B); the
    lower sideband is the same function at negative ``w``, so the returned
    array covers both sidebands. Vacuum gives a flat floor of 1.
    """
    i, j = _FIELD_SLOT[field.upper()]
    return np.real(spec.values[:, i, j])


def model_rows_bright(model: DriftModel, grid: np.ndarray) -> np.ndarray:
    """Rows of (a_B_det, a_B_det^dag, x_x, p_x, x_y, p_y), shape (n, 6, 10)."""
    Ga = detected_ladder_rows(model, grid)
    X = _state_rows(model, grid)
    rows = np.empty((grid.size, 6, N_NOISE), dtype=complex)
    rows[:, 0:2, :] = Ga[:, 2:4, :]
    rows[:, 2:6, :] = X[:, 4:8, :]
    return rows


# ---------------------------------------------------------------------------
# Frequency-domain integration with asymptotic tail correction


def _tail_correction(M: np.ndarray, N: np.ndarray, w_max: float, order: int) -> np.ndarray:
    """Analytic integral of the spectral expansion over |w| > w_max.

    Expanding ``T(w) N T(-w)^T`` in powers of 1/w, odd orders cancel over the
    symmetric tail and even orders integrate in closed form. ``order`` is the
    highest included power m of 1/w^(2m+2).
    """
    n = M.shape[0]
    powers = [np.eye(n)]
    for _ in range(2 * order):
        powers.append(powers[-1] @ M)
    out = np.zeros((n, n), dtype=complex)
    for m in range(order + 1):
        term = np.zeros((n, n), dtype=complex)
        for j in range(2 * m + 1):
            k = 2 * m - j
            sign = -1.0 if (j + m) % 2 else 1.0
            term += sign * (powers[j] @ N @ powers[k].T)
        out += term / ((2 * m + 1) * pi * w_max ** (2 * m + 1))
    return out


def integrate_state_cov(
    model: DriftModel,
    w_max: float = TWO_PI * 400e3,
    step: float = TWO_PI * 10.0,
    tail_order: int = 3,
) -> np.ndarray:
    """8x8 stationary covariance by integrating the state spectra over
    frequency, cross-checking the Lyapunov route.

    Uses the trapezoid rule on a symmetric grid plus an asymptotic tail
    correction for |w| > w_max.
    """
    grid = symmetric_grid(w_max, step)
    L6 = model.noise_input_matrix()
    X = _kernels.transfer_stack(model.M, L6, grid)
    S = _kernels.pair_product(X, model.process_noise_spectrum())
    V = np.trapz(S, grid, axis=0) / TWO_PI
    V = V + _tail_correction(model.M, model.N_in, grid[-1], tail_order)
    V = np.real(V)
    return 0.5 * (V + V.T)


def detected_flux(model: DriftModel, field: str) -> float:
    """Normally-ordered photon flux of one detected output field.

    Equal-time identity: ``<a_out^dag a_out> = kappa <a^dag a>_cav`` (input
    cross terms vanish for vacuum inputs in normal order), scaled by the
    detection efficiency. Matches ``int A_43 dw / 2pi`` over an enclosing
    band.
    """
    from .model import steady_covariance

    V8 = steady_covariance(model)
    ix, iy = (0, 1) if field.upper() == "A" else (2, 3)
    n_cav = (V8[ix, ix] + V8[iy, iy] - 2.0) / 4.0
    return float(model.params.eta * model.params.kappa * n_cav)


def integrate_band(spec: SpectralMatrix, i: int, j: int, lo: float, hi: float) -> complex:
    """Trapezoid integral of one matrix element over [lo, hi], per 2 pi."""
    mask = spec.band_mask(lo, hi)
    if mask.sum() < 2:
        raise ValueError("band does not cover at least two grid points")
    return np.trapz(spec.values[mask, i, j], spec.grid[mask]) / TWO_PI


# ---------------------------------------------------------------------------
# Symmetry diagnostics


_BAR = np.array([1, 0, 3, 2])  # ladder-index swap a <-> a^dag


def symmetry_residuals(spec: SpectralMatrix) -> dict:
    """Residuals of the exact symmetries of a model spectral matrix.

    conjugation: ``A_ij(w) = conj(A_{jbar,ibar}(w))`` (adjoint pairing at the
    same frequency; this is what leaves 16 free real functions per bin)
    commutator:  ``A_12(w) - A_21(-w) = 1`` per field.
    """
    A = spec.values
    Arev = A[::-1]
    conj_res = 0.0
    for i in range(4):
        for j in range(4):
            res = A[:, i, j] - np.conj(A[:, _BAR[j], _BAR[i]])
            conj_res = max(conj_res, float(np.max(np.abs(res))))
    comm_a = np.max(np.abs(A[:, 0, 1] - Arev[:, 1, 0] - 1.0))
    comm_b = np.max(np.abs(A[:, 2, 3] - Arev[:, 3, 2] - 1.0))
    return {
        "conjugation": conj_res,
        "commutator_a": float(comm_a),
        "commutator_b": float(comm_b),
    }


# ---------------------------------------------------------------------------
# CSV interchange


def _csv_header() -> list[str]:
    cols = ["freq_hz"]
    for i in range(1, 5):
        for j in range(1, 5):
            cols.append(f"A_{i}{j}_re")
            cols.append(f"A_{i}{j}_im")
    return cols


def to_csv(spec: SpectralMatrix, path, include_psd: bool = False,
           convention: str = "two-sided") -> None:
    """Write the spectral matrix as CSV, one row per grid frequency in Hz.

    A leading comment line tags the schema, kind and frequency convention.
    """
    if convention not in ("two-sided", "one-sided"):
        raise ValueError("convention must be 'two-sided' or 'one-sided'")
    header = _csv_header()
    if include_psd:
        header += ["psd_a", "psd_b"]
    scale = 2.0 if convention == "one-sided" else 1.0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            f"# {SPECTRA_CSV_SCHEMA} kind={spec.kind} convention={convention} "
            f"phi_a={spec.phases[0]:.12g} phi_b={spec.phases[1]:.12g}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(header)
        psd_a = heterodyne_psd(spec, "A")
        psd_b = heterodyne_psd(spec, "B")
        for k, w in enumerate(spec.grid):
            row = [f"{w / TWO_PI:.10g}"]
            for i in range(4):
                for j in range(4):
                    v = spec.values[k, i, j] * scale
                    row.append(f"{v.real:.12g}")
                    row.append(f"{v.imag:.12g}")
            if include_psd:
                row.append(f"{psd_a[k] * scale:.12g}")
                row.append(f"{psd_b[k] * scale:.12g}")
            writer.writerow(row)


def from_csv(path) -> SpectralMatrix:
    """Read a spectral matrix written by :func:`to_csv` (two-sided only)."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith(f"# {SPECTRA_CSV_SCHEMA}"):
            raise ValueError("not an optolev spectra CSV")
        tags = dict(tok.split("=", 1) for tok in first.strip("#\n ").split()[1:])
        if tags.get("convention") != "two-sided":
            raise ValueError("only two-sided CSVs can be read back")
        reader = csv.reader(fh)
        header = next(reader)
        if header != _csv_header() and header[: len(_csv_header())] != _csv_header():
            raise ValueError("unexpected CSV header")
        freqs, mats = [], []
        for row in reader:
            freqs.append(float(row[0]) * TWO_PI)
            vals = np.array([float(x) for x in row[1:33]])
            mats.append((vals[0::2] + 1j * vals[1::2]).reshape(4, 4))
    return SpectralMatrix(
        grid=np.array(freqs),
        values=np.array(mats),
        kind=tags.get("kind", "model"),
        phases=(float(tags.get("phi_a", 0.0)), float(tags.get("phi_b", 0.0))),
    )
