"""Closed-form Riccati kernel, protocol gain synthesis, and stability checks.

The stacked position/velocity plant factors as a 2x2 kernel tensored with the
axis identity, so the design Riccati equation is solved exactly on the 2x2
kernel and the full solution is kernel (x) I_n. All functions here are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidLambda2, NotHurwitz, NotPositiveDefinite


@dataclass
class PlantParams:
    """Damping constants and spatial dimension of the agent plant.

    The per-axis dynamics are  dp/dt = v,  dv/dt = alpha_p*p + alpha_v*v + u + w.
    """

    alpha_p: float
    alpha_v: float
    n_axes: int

    def __post_init__(self):
        if self.n_axes < 1:
            raise ValueError("n_axes must be a positive integer")


@dataclass
class RiccatiSolution:
    """2x2 Riccati kernel, its equation residual, and the synthesized gain row."""

    kernel: np.ndarray
    residual: float
    gain_row: np.ndarray


@dataclass
class HurwitzRecord:
    """Stability report for one interaction eigenvalue."""

    eigenvalue: complex
    closed_loop_eigenvalues: np.ndarray
    max_real_part: float
    stable: bool


def plant_kernel(params: PlantParams) -> tuple[np.ndarray, np.ndarray]:
    """2x2 state kernel [[0, 1], [alpha_p, alpha_v]] and input column [0, 1]."""
    a = np.array([[0.0, 1.0], [params.alpha_p, params.alpha_v]])
    b = np.array([0.0, 1.0])
    return a, b


def solve_are(params: PlantParams) -> np.ndarray:
    """Positive definite 2x2 kernel of the design Riccati equation.

    Solves  P A + A^T P - P b b^T P + I = 0  in closed form for
    A = [[0, 1], [a, b]] and input column [0, 1]:

        p2 = a + sqrt(a^2 + 1)
        p3 = b + sqrt(b^2 + 2 p2 + 1)
        p1 = p3 (p2 - a) - b p2

    with P = [[p1, p2], [p2, p3]]. The pair is controllable for every (a, b),
    so the stabilizing solution exists and is positive definite.
    """
    a = params.alpha_p
    b = params.alpha_v
    p2 = a + np.sqrt(a * a + 1.0)
    p3 = b + np.sqrt(b * b + 2.0 * p2 + 1.0)
    p1 = p3 * (p2 - a) - b * p2
    kernel = np.array([[p1, p2], [p2, p3]])
    if p1 <= 0 or p1 * p3 - p2 * p2 <= 0:
        raise NotPositiveDefinite(
            f"Riccati kernel not positive definite for alpha_p={a}, alpha_v={b}"
        )
    return kernel


def are_residual(kernel: np.ndarray, params: PlantParams) -> float:
    """Frobenius norm of  P A + A^T P - P b b^T P + I  for the 2x2 kernel."""
    a_mat, b_vec = plant_kernel(params)
    pb = kernel @ b_vec
    res = kernel @ a_mat + a_mat.T @ kernel - np.outer(pb, pb) + np.eye(2)
    return float(np.linalg.norm(res))


def gain(kernel: np.ndarray, lambda2_re: float, n_axes: int) -> tuple[np.ndarray, np.ndarray]:
    """Protocol gain row [k_p, k_v] and its full n x 2n matrix form.

    The row is the velocity row of the Riccati kernel scaled by the inverse
    real part of the second Laplacian eigenvalue; the full matrix is the row
    tensored with the axis identity.
    """
    if not lambda2_re > 0:
        raise InvalidLambda2(
            f"lambda2 real part must be positive, got {lambda2_re}; "
            "the topology probably lacks a spanning tree"
        )
    row = np.asarray(kernel)[1, :] / lambda2_re
    full = np.kron(row.reshape(1, 2), np.eye(n_axes))
    return row, full


def verify_hurwitz(
    kernel: np.ndarray,
    params: PlantParams,
    eigenvalues,
    lambda2_re: float | None = None,
    strict: bool = False,
) -> list[HurwitzRecord]:
    """Per-eigenvalue stability of the relative-motion modes.

    For each interaction eigenvalue lam, checks that the complex 2x2 matrix
    A - lam * b * [k_p, k_v] has both eigenvalues in the open left half
    plane, where the gain row is synthesized from ``lambda2_re`` (defaults to
    the real part of the first supplied eigenvalue). With ``strict`` a
    NotHurwitz error lists the offending eigenvalues.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    if lambda2_re is None:
        lambda2_re = float(eigenvalues[0].real)
    row, _ = gain(kernel, lambda2_re, 1)
    a_mat, b_vec = plant_kernel(params)

    records = []
    for lam in eigenvalues:
        closed = a_mat.astype(complex) - lam * np.outer(b_vec, row)
        cl_eigs = np.linalg.eigvals(closed)
        max_re = float(cl_eigs.real.max())
        records.append(
            HurwitzRecord(
                eigenvalue=complex(lam),
                closed_loop_eigenvalues=cl_eigs,
                max_real_part=max_re,
                stable=max_re < 0.0,
            )
        )
    if strict:
        offenders = [r.eigenvalue for r in records if not r.stable]
        if offenders:
            raise NotHurwitz(
                f"closed-loop modes unstable for eigenvalues {offenders}",
                offenders=offenders,
            )
    return records


def lyapunov_certificate(kernel: np.ndarray, lam_k: complex, lambda2_re: float) -> np.ndarray:
    """Quadratic-form derivative matrix of the per-mode Lyapunov argument.

    Returns the real symmetric matrix
    (1 - 2 Re(lam_k) / lambda2_re) * P b b^T P - I; negative definiteness is
    a sufficient (not necessary) condition for the corresponding mode of
    ``verify_hurwitz`` to be stable. Kept as a cross-check, not a design path.
    """
    b_vec = np.array([0.0, 1.0])
    pb = np.asarray(kernel) @ b_vec
    coeff = 1.0 - 2.0 * complex(lam_k).real / lambda2_re
    return coeff * np.outer(pb, pb) - np.eye(2)
