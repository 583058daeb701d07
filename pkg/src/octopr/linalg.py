"""Octonion vectors, matrices, their stacked real images, and the
power-method leading eigenvector used by spectral initialization.

Vectors store an (n, 8) coefficient array, matrices (m, n, 8).  The real
images stack per-entry blocks: ``vec_aleph`` flattens to 8n reals,
``mat_gimel`` builds the 8m x 8n block matrix whose (l, k) block is the
representation of entry (l, k).  The identity

    vec_aleph(A @ x) == mat_gimel(A) @ vec_aleph(x)

holds by construction and is cross-checked in the tests.
"""

from __future__ import annotations

import numpy as np

from .algebra import (
    GIMEL_BASIS,
    STRUCTURE,
    Octonion,
    conj_coeffs,
    mul_coeffs,
    norm_coeffs,
)

__all__ = [
    "OctVector",
    "OctMatrix",
    "vec_aleph",
    "vec_aleph_inv",
    "vec_gimel",
    "mat_gimel",
    "mat_vec",
    "herm_inner",
    "accumulate_spectral_matrix",
    "power_leading_eigvec",
    "ConjRowOp",
]


class OctVector:
    """Dense octonion vector backed by an (n, 8) coefficient array."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs) -> None:
        c = np.array(coeffs, dtype=np.float64)
        if c.ndim != 2 or c.shape[1] != 8:
            raise ValueError(f"expected an (n, 8) coefficient array, got {c.shape}")
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_octonions(cls, entries) -> "OctVector":
        return cls(np.stack([e.coeffs for e in entries]))

    @classmethod
    def zeros(cls, n: int) -> "OctVector":
        return cls(np.zeros((n, 8)))

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def __getitem__(self, k: int) -> Octonion:
        return Octonion(self.coeffs[k])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def entry_norms(self) -> np.ndarray:
        return norm_coeffs(self.coeffs)

    def right_scale(self, z: Octonion) -> "OctVector":
        """Entrywise product x_k * z (z applied on the right)."""
        return OctVector(mul_coeffs(self.coeffs, z.coeffs[None, :]))

    def __repr__(self) -> str:
        return f"OctVector(n={len(self)}, norm={self.norm():.6g})"


class OctMatrix:
    """Dense octonion matrix backed by an (m, n, 8) coefficient array."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs) -> None:
        c = np.array(coeffs, dtype=np.float64)
        if c.ndim != 3 or c.shape[2] != 8:
            raise ValueError(f"expected an (m, n, 8) coefficient array, got {c.shape}")
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def identity(cls, n: int) -> "OctMatrix":
        c = np.zeros((n, n, 8))
        c[np.arange(n), np.arange(n), 0] = 1.0
        return cls(c)

    @property
    def rows(self) -> int:
        return self.coeffs.shape[0]

    @property
    def cols(self) -> int:
        return self.coeffs.shape[1]

    def __getitem__(self, idx) -> Octonion:
        l, k = idx
        return Octonion(self.coeffs[l, k])

    def __repr__(self) -> str:
        return f"OctMatrix({self.rows}x{self.cols})"


def vec_aleph(x: OctVector) -> np.ndarray:
    """Stacked real image of a vector: 8n reals, entry k at [8k:8k+8]."""
    return x.coeffs.reshape(-1).copy()


def vec_aleph_inv(v: np.ndarray) -> OctVector:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size % 8:
        raise ValueError(f"expected a flat real vector of length 8n, got {v.shape}")
    return OctVector(v.reshape(-1, 8))


def vec_gimel(x: OctVector) -> np.ndarray:
    """Stacked (8n, 8) representation of a vector (one block per entry)."""
    return np.einsum("nc,crq->nrq", x.coeffs, GIMEL_BASIS).reshape(-1, 8)


def mat_gimel(A: OctMatrix) -> np.ndarray:
    """Real (8m, 8n) block image of an octonion matrix."""
    m, n = A.rows, A.cols
    blocks = np.einsum("mnc,crq->mrnq", A.coeffs, GIMEL_BASIS)
    return blocks.reshape(8 * m, 8 * n)


def mat_vec(A: OctMatrix, x: OctVector) -> OctVector:
    """Product A @ x with entrywise octonion products A_lk * x_k."""
    if A.cols != len(x):
        raise ValueError(f"dimension mismatch: {A.rows}x{A.cols} @ {len(x)}")
    out = np.einsum("mnc,nd,cdk->mk", A.coeffs, x.coeffs, STRUCTURE)
    return OctVector(out)


def herm_inner(x: OctVector, y: OctVector) -> Octonion:
    """Hermitian inner product sum_k conj(x_k) * y_k."""
    if len(x) != len(y):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(y)}")
    s = mul_coeffs(conj_coeffs(x.coeffs), y.coeffs).sum(axis=0)
    return Octonion(s)


class ConjRowOp:
    """Fast action of the stacked representation of a matrix's conjugated rows.

    For row l of A, let B_l be the (8, 8n) representation of the
    entrywise-conjugated row.  ``apply`` maps a flat 8n vector to the m
    stacked 8-vectors B_l v (i.e. the products a_l^* x), ``apply_t``
    applies the transpose.  Both are computed as eight (m, n) matrix
    products instead of one dense (8m, 8n) one, which keeps the memory
    traffic an eighth of the naive block matrix while remaining exactly
    the same linear map.
    """

    __slots__ = ("m", "n", "_comps")

    def __init__(self, A: OctMatrix) -> None:
        self.m, self.n = A.rows, A.cols
        ac = conj_coeffs(A.coeffs)
        self._comps = np.ascontiguousarray(ac.transpose(2, 0, 1))  # (8, m, n)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """(8n,) -> (m, 8); row l holds the coefficients of a_l^* x."""
        X = v.reshape(self.n, 8)
        out = np.zeros((self.m, 8))
        for i in range(8):
            out += self._comps[i] @ (X @ GIMEL_BASIS[i].T)
        return out

    def apply_t(self, Z: np.ndarray) -> np.ndarray:
        """(m, 8) -> (8n,): transpose of ``apply``."""
        out = np.zeros((self.n, 8))
        for i in range(8):
            out += self._comps[i].T @ (Z @ GIMEL_BASIS[i])
        return out.reshape(-1)

    def intensities(self, v: np.ndarray) -> np.ndarray:
        """Squared norms |a_l^* x|^2 for the signal with real image v."""
        U = self.apply(v)
        return np.einsum("ij,ij->i", U, U)


def accumulate_spectral_matrix(y: np.ndarray, A: OctMatrix) -> OctMatrix:
    """Measurement-weighted covariance (1/m) sum_l y_l a_l a_l^*.

    a_l is row l of A as a column vector, so entry (j, k) accumulates
    y_l * A_lj * conj(A_lk).  The result is Hermitian with a real
    diagonal.
    """
    y = np.asarray(y, dtype=np.float64)
    m, n = A.rows, A.cols
    if y.shape != (m,):
        raise ValueError(f"dimension mismatch: {y.shape} weights for {m} rows")
    if np.any(y < 0):
        raise ValueError("weights must be nonnegative")
    flat = A.coeffs.reshape(m, n * 8)
    flat_conj = conj_coeffs(A.coeffs).reshape(m, n * 8)
    gram = (y[:, None] * flat).T @ flat_conj / m
    gram = gram.reshape(n, 8, n, 8)
    return OctMatrix(np.einsum("jakb,abc->jkc", gram, STRUCTURE))


def power_leading_eigvec(
    Y: OctMatrix, iters: int = 200, tol: float = 1e-10
) -> tuple[OctVector, float]:
    """Leading eigenvector of a Hermitian octonion matrix.

    Runs plain normalized power iteration on the real 8n x 8n image of Y
    (which is symmetric for Hermitian Y) from the deterministic start
    vector aleph(all-ones * e0), and reads the iterate back blockwise.
    Stops after ``iters`` steps or once successive Rayleigh quotients
    differ by less than ``tol``.  The dominant eigenspace of a
    measurement covariance is degenerate (one copy per right phase);
    any vector in it is an equally good initializer.
    """
    if Y.rows != Y.cols:
        raise ValueError(f"expected a square matrix, got {Y.rows}x{Y.cols}")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    R = mat_gimel(Y)
    n = Y.rows
    v = np.zeros(8 * n)
    v[0::8] = 1.0 / np.sqrt(n)
    lam_prev = None
    for _ in range(iters):
        u = R @ v
        lam = float(v @ u)
        nu = float(np.linalg.norm(u))
        if nu == 0.0:
            raise ValueError("no dominant eigenvector")
        v = u / nu
        if lam_prev is not None and abs(lam - lam_prev) < tol:
            lam_prev = lam
            break
        lam_prev = lam
    return vec_aleph_inv(v), float(lam_prev)
