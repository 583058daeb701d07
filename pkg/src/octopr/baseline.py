"""Real-valued gradient-descent phase retrieval over concatenated channels.

The comparison method treats the 8 bands of a signal as one long real
vector: x in R^{8n}, real Gaussian sensing A in R^{m x 8n}, intensities
y = (A x)^2.  There is no coupling between bands beyond sharing
measurements, which is exactly the contrast the recovery experiments
exercise.  Initialization is a Lanczos estimate of the leading
eigenvector of the measurement-weighted covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import DivergenceError

__all__ = [
    "RealPrInstance",
    "real_objective",
    "real_gradient",
    "lanczos_init",
    "gd_solve",
]


@dataclass
class RealPrInstance:
    """Planted real phase-retrieval instance with y = (A x)^2."""

    x: np.ndarray
    A: np.ndarray
    y: np.ndarray

    @classmethod
    def from_signal(cls, x: np.ndarray, m: int, rng: np.random.Generator) -> "RealPrInstance":
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        A = rng.standard_normal((m, x.size))
        y = (A @ x) ** 2
        return cls(x=x, A=A, y=y)


def real_objective(v: np.ndarray, A: np.ndarray, y: np.ndarray) -> float:
    r = (A @ v) ** 2 - y
    return float(r @ r)


def real_gradient(v: np.ndarray, A: np.ndarray, y: np.ndarray, averaged: bool = False) -> np.ndarray:
    """Summed expression sum_l ((a_l x)^2 - y_l)(a_l x) a_l, a quarter of
    the analytic gradient."""
    q = A @ v
    g = A.T @ ((q * q - y) * q)
    if averaged:
        g /= A.shape[0]
    return g


def lanczos_init(A: np.ndarray, y: np.ndarray, iters: int = 100) -> np.ndarray:
    """Spectral initializer via Lanczos tridiagonalization.

    Estimates the leading eigenvector of (1/m) sum_l y_l a_l a_l^T
    without forming it, using ``iters`` Lanczos steps with full
    reorthogonalization (stopping early on Krylov breakdown, e.g. for
    exactly low-rank inputs), then scales the unit Ritz vector by
    sqrt(sum(y)/m).
    """
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m, d = A.shape
    if y.shape != (m,):
        raise ValueError(f"dimension mismatch: {y.shape} weights for {m} rows")
    if not np.any(y > 0):
        raise ValueError("degenerate measurements")
    if iters < 1:
        raise ValueError("iters must be >= 1")

    def matvec(v: np.ndarray) -> np.ndarray:
        return A.T @ (y * (A @ v)) / m

    k = min(iters, d)
    Q = np.zeros((d, k))
    alphas = np.zeros(k)
    betas = np.zeros(max(k - 1, 0))
    q = np.ones(d) / np.sqrt(d)
    Q[:, 0] = q
    u = matvec(q)
    alphas[0] = q @ u
    steps = 1
    for i in range(1, k):
        r = u - alphas[i - 1] * Q[:, i - 1]
        if i > 1:
            r -= betas[i - 2] * Q[:, i - 2]
        r -= Q[:, :i] @ (Q[:, :i].T @ r)  # full reorthogonalization
        beta = float(np.linalg.norm(r))
        if beta <= 1e-14 * max(1.0, abs(alphas[: i].max())):
            break
        q = r / beta
        Q[:, i] = q
        u = matvec(q)
        alphas[i] = q @ u
        betas[i - 1] = beta
        steps = i + 1
    T = np.diag(alphas[:steps])
    if steps > 1:
        T += np.diag(betas[: steps - 1], 1) + np.diag(betas[: steps - 1], -1)
    evals, evecs = np.linalg.eigh(T)
    w = Q[:, :steps] @ evecs[:, -1]
    w /= np.linalg.norm(w)
    return w * np.sqrt(y.sum() / m)


def gd_solve(
    inst: RealPrInstance,
    iters: int = 2000,
    step: float = 0.2,
    init: np.ndarray | None = None,
) -> np.ndarray:
    """Gradient descent on the quartic real objective.

    ``step`` plays the same role as the octonion solver's step_scale:
    the base update is step / mean(y) times the m-averaged gradient
    expression.  The step is safeguarded: whenever a candidate update
    would increase the objective it is halved (and regrown toward the
    base step after accepted moves), because the bare quartic blows up
    from a spectral start at low sampling ratios for any fixed step
    large enough to be useful when well sampled.  Defaults to the
    Lanczos initializer.  Raises DivergenceError if no acceptable step
    remains.
    """
    A, y = inst.A, inst.y
    sum_y = float(y.sum())
    if sum_y <= 0:
        raise ValueError("degenerate measurements")
    v = lanczos_init(A, y) if init is None else np.array(init, dtype=np.float64).reshape(-1)
    if v.shape != (A.shape[1],):
        raise ValueError(f"init shape {v.shape} does not match {A.shape[1]} unknowns")
    alpha_base = step * A.shape[0] / sum_y
    alpha = alpha_base
    f_cur = real_objective(v, A, y)
    for _ in range(iters):
        g = real_gradient(v, A, y, averaged=True)
        for _ in range(64):
            v_new = v - alpha * g
            f_new = real_objective(v_new, A, y)
            if np.isfinite(f_new) and f_new <= f_cur:
                break
            alpha *= 0.5
        else:
            raise DivergenceError("divergence: reduce step")
        v, f_cur = v_new, f_new
        alpha = min(alpha * 2.0, alpha_base)
    return v
