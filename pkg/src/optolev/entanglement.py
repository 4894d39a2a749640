"""Gaussian two-mode entanglement measures.

Covariance matrices follow the vacuum-is-identity normalization,
``V_ij = 0.5 <{u_i, u_j}>`` with ``u = (Q_1, P_1, Q_2, P_2)``,
``Q = a + a^dag``, ``P = i(a^dag - a)``. The bona-fide-state condition is
``V + iJ >= 0`` with unit symplectic blocks ``[[0, 1], [-1, 0]]``; the
smallest symplectic eigenvalue of the partially transposed matrix is 1 for
uncorrelated vacua and drops below 1 exactly when the state is entangled.
"""

from __future__ import annotations

import numpy as np

from .model import symplectic_form

J4 = symplectic_form(2)
J2 = symplectic_form(1)

PHYS_TOL = 1e-9


def _check_square_sym(V: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.shape != (4, 4):
        raise ValueError("covariance matrix must be 4x4")
    if np.max(np.abs(V - V.T)) > tol * max(1.0, np.max(np.abs(V))):
        raise ValueError("covariance matrix must be symmetric")
    return 0.5 * (V + V.T)


def min_symplectic(V: np.ndarray) -> float:
    """Smallest symplectic eigenvalue ``min |eig(i J V)|`` (no transpose)."""
    V = _check_square_sym(V)
    ev = np.linalg.eigvals(1j * J4 @ V)
    return float(np.min(np.abs(ev)))


def validate_cm(V: np.ndarray, tol: float = PHYS_TOL) -> tuple[bool, float]:
    """Physicality check of a two-mode covariance matrix.

    Returns ``(ok, min_symplectic)`` where ``ok`` requires
    ``min eig(V + iJ) >= -tol``.
    """
    V = _check_square_sym(V)
    herm = V + 1j * J4
    ok = bool(np.min(np.linalg.eigvalsh(herm)) >= -tol)
    return ok, min_symplectic(V)


def nu_min_ppt(V: np.ndarray) -> float:
    """Smallest symplectic eigenvalue of the partially transposed matrix.

    Closed form through the two-mode block invariants: with blocks
    ``[[alpha, gamma], [gamma^T, beta]]`` and
    ``Dt = det alpha + det beta - 2 det gamma``,

        nu_minus = sqrt((Dt - sqrt(Dt^2 - 4 det V)) / 2).

    Equals the eigenvalue route ``min |eig(i J PT(V))|`` where the partial
    transpose flips the sign of the second mode's momentum.
    """
    V = _check_square_sym(V)
    ok, _ = validate_cm(V)
    if not ok:
        raise ValueError("covariance matrix violates the uncertainty relation")
    a = np.linalg.det(V[:2, :2])
    b = np.linalg.det(V[2:, 2:])
    c = np.linalg.det(V[:2, 2:])
    dt = a + b - 2.0 * c
    det_v = np.linalg.det(V)
    disc = dt * dt - 4.0 * det_v
    if disc < 0.0:
        if disc < -1e-12 * max(1.0, dt * dt):
            raise ValueError("invalid covariance matrix: negative discriminant")
        disc = 0.0
    nu_sq = 0.5 * (dt - np.sqrt(disc))
    if nu_sq < 0.0:
        if nu_sq < -1e-12 * max(1.0, dt):
            raise ValueError("invalid covariance matrix: negative nu^2")
        nu_sq = 0.0
    return float(np.sqrt(nu_sq))


def nu_min_ppt_eig(V: np.ndarray) -> float:
    """Brute-force oracle for :func:`nu_min_ppt` via the eigenvalue route."""
    V = _check_square_sym(V)
    P = np.diag([1.0, 1.0, 1.0, -1.0])
    vt = P @ V @ P
    ev = np.linalg.eigvals(1j * J4 @ vt)
    return float(np.min(np.abs(ev)))


def log_negativity(nu: float) -> float:
    """Logarithmic negativity ``max(0, -log2(nu))``."""
    if nu <= 0.0:
        raise ValueError("symplectic eigenvalue must be positive")
    return float(max(0.0, -np.log2(nu)))


def _rotation(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def duan_sum(V: np.ndarray, n_grid: int = 72) -> float:
    """Minimized EPR variance ``Var(Q1 - Q2') + Var(P1 + P2')`` over local
    phase rotations of both modes; below 4 signals entanglement.

    Coarse grid search over both angles followed by a fine refinement.
    """
    V = _check_square_sym(V)
    ok, _ = validate_cm(V)
    if not ok:
        raise ValueError("covariance matrix violates the uncertainty relation")

    def value(phi1, phi2):
        S = np.zeros((4, 4))
        S[:2, :2] = _rotation(phi1)
        S[2:, 2:] = _rotation(phi2)
        W = S @ V @ S.T
        return (W[0, 0] + W[2, 2] - 2.0 * W[0, 2]) + (W[1, 1] + W[3, 3] + 2.0 * W[1, 3])

    angles = np.linspace(0.0, 2.0 * np.pi, n_grid, endpoint=False)
    best = (np.inf, 0.0, 0.0)
    for p1 in angles:
        for p2 in angles:
            v = value(p1, p2)
            if v < best[0]:
                best = (v, p1, p2)
    span = 2.0 * np.pi / n_grid
    for _ in range(30):
        _, p1, p2 = best
        for q1 in (p1 - span, p1, p1 + span):
            for q2 in (p2 - span, p2, p2 + span):
                v = value(q1, q2)
                if v < best[0]:
                    best = (v, q1, q2)
        span *= 0.5
    return float(best[0])


def report(V: np.ndarray, provenance: str = "") -> dict:
    """Entanglement summary of a covariance matrix as a JSON-ready dict."""
    ok, _ = validate_cm(V)
    out = {"valid": ok, "provenance": provenance}
    if ok:
        nu = nu_min_ppt(V)
        out.update(
            nu_minus=nu,
            E_N=log_negativity(nu),
            duan_sum=duan_sum(V),
        )
    else:
        out.update(nu_minus=None, E_N=None, duan_sum=None)
    return out


# ---------------------------------------------------------------------------
# Random-state helpers used by property tests and the acceptance suite


def random_local_symplectic(rng: np.random.Generator, r_max: float = 1.0) -> np.ndarray:
    """Random single-mode symplectic: rotation, squeeze, rotation."""
    t1, t2 = rng.uniform(0.0, 2.0 * np.pi, size=2)
    r = rng.uniform(-r_max, r_max)
    sq = np.diag([np.exp(r), np.exp(-r)])
    return _rotation(t1) @ sq @ _rotation(t2)


def random_two_mode_cov(
    rng: np.random.Generator,
    nu_max: float = 4.0,
    r_max: float = 1.0,
) -> np.ndarray:
    """Random bona fide two-mode covariance matrix.

    A random thermal spectrum (symplectic eigenvalues >= 1) conjugated by a
    random symplectic built from local operations and a two-mode squeezer.
    """
    nu1, nu2 = rng.uniform(1.0, nu_max, size=2)
    V = np.diag([nu1, nu1, nu2, nu2])
    S = np.zeros((4, 4))
    S[:2, :2] = random_local_symplectic(rng, r_max)
    S[2:, 2:] = random_local_symplectic(rng, r_max)
    r = rng.uniform(-r_max, r_max)
    ch, sh = np.cosh(r), np.sinh(r)
    S2 = np.block(
        [
            [ch * np.eye(2), sh * np.diag([1.0, -1.0])],
            [sh * np.diag([1.0, -1.0]), ch * np.eye(2)],
        ]
    )
    S = S2 @ S
    return S @ V @ S.T


def two_mode_squeezed_cov(r: float) -> np.ndarray:
    """Two-mode squeezed vacuum; ``nu_minus = exp(-2 r)``."""
    ch, sh = np.cosh(2.0 * r), np.sinh(2.0 * r)
    V = np.zeros((4, 4))
    V[:2, :2] = ch * np.eye(2)
    V[2:, 2:] = ch * np.eye(2)
    V[:2, 2:] = sh * np.diag([1.0, -1.0])
    V[2:, :2] = sh * np.diag([1.0, -1.0])
    return V
