"""Octonion scalars over the basis (e0, ..., e7) and their real images.

The whole package uses one multiplication convention, fixed by the right
matrix representation ``gimel``: an octonion ``x`` maps to an 8x8 real
matrix such that the coefficient vector of a product is

    aleph(a * b) == gimel(a) @ aleph(b)

where ``aleph`` reads the 8 coefficients into a real vector.  Every other
operation (conjugation, norm identities, the unit product table) is
derived from that matrix, so there is no second convention to drift out
of sync.  The fast coefficient-space product used everywhere is an
einsum over the structure tensor extracted from ``gimel`` and is tested
against the matrix definition.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Octonion",
    "aleph",
    "aleph_inv",
    "gimel",
    "gimel_inv",
    "oct_mul",
    "conjugate",
    "sign_unit",
    "mul_coeffs",
    "conj_coeffs",
    "norm_coeffs",
    "gimel_coeffs",
    "unit_product_table",
    "GIMEL_BASIS",
    "STRUCTURE",
]

# gimel(x)[r, c] == _GIMEL_SIGN[r, c] * x[_GIMEL_INDEX[r, c]]
_GIMEL_INDEX = np.array(
    [
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 0, 3, 2, 5, 4, 7, 6],
        [2, 3, 0, 1, 6, 7, 4, 5],
        [3, 2, 1, 0, 7, 6, 5, 4],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 4, 7, 6, 1, 0, 3, 2],
        [6, 7, 4, 5, 2, 3, 0, 1],
        [7, 6, 5, 4, 3, 2, 1, 0],
    ],
    dtype=np.intp,
)
_GIMEL_SIGN = np.array(
    [
        [+1, -1, -1, -1, -1, -1, -1, -1],
        [+1, +1, +1, -1, +1, -1, -1, +1],
        [+1, -1, +1, +1, +1, +1, -1, -1],
        [+1, +1, -1, +1, +1, -1, +1, -1],
        [+1, -1, -1, -1, +1, +1, +1, +1],
        [+1, +1, -1, +1, -1, +1, -1, +1],
        [+1, +1, +1, -1, -1, +1, +1, -1],
        [+1, -1, +1, +1, -1, -1, +1, +1],
    ],
    dtype=np.float64,
)

# GIMEL_BASIS[i] == gimel(e_i); STRUCTURE[i, j] == aleph(e_i * e_j).
GIMEL_BASIS = (_GIMEL_INDEX[None, :, :] == np.arange(8)[:, None, None]) * _GIMEL_SIGN
GIMEL_BASIS.setflags(write=False)
STRUCTURE = np.ascontiguousarray(GIMEL_BASIS.transpose(0, 2, 1))
STRUCTURE.setflags(write=False)

_CONJ_SIGNS = np.array([1.0, -1, -1, -1, -1, -1, -1, -1])
_CONJ_SIGNS.setflags(write=False)


def mul_coeffs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficient-space octonion product on (..., 8) arrays, broadcasting."""
    return np.einsum("...i,...j,ijk->...k", a, b, STRUCTURE)


def conj_coeffs(a: np.ndarray) -> np.ndarray:
    """Conjugate on (..., 8) arrays: negate coefficients 1..7."""
    return np.asarray(a, dtype=np.float64) * _CONJ_SIGNS


def norm_coeffs(a: np.ndarray) -> np.ndarray:
    """Euclidean norm over the trailing coefficient axis."""
    return np.linalg.norm(a, axis=-1)


def gimel_coeffs(a: np.ndarray) -> np.ndarray:
    """Right-representation matrices for (..., 8) coefficient arrays."""
    return np.einsum("...i,irc->...rc", a, GIMEL_BASIS)


class Octonion:
    """Immutable octonion scalar holding 8 real coefficients.

    ``c[0]`` is the real part, ``c[1..7]`` the components along
    e1, ..., e7.  Arithmetic returns new instances; the coefficient
    array is frozen so instances are safe to share across threads.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs) -> None:
        c = np.array(coeffs, dtype=np.float64)
        if c.shape != (8,):
            raise ValueError(f"octonion needs 8 coefficients, got shape {c.shape}")
        c.setflags(write=False)
        self._c = c

    @classmethod
    def zero(cls) -> "Octonion":
        return cls(np.zeros(8))

    @classmethod
    def one(cls) -> "Octonion":
        return cls.unit(0)

    @classmethod
    def unit(cls, i: int) -> "Octonion":
        """Basis element e_i."""
        c = np.zeros(8)
        c[i] = 1.0
        return cls(c)

    @classmethod
    def from_real(cls, r: float) -> "Octonion":
        c = np.zeros(8)
        c[0] = float(r)
        return cls(c)

    @property
    def coeffs(self) -> np.ndarray:
        """Read-only coefficient view."""
        return self._c

    @property
    def real(self) -> float:
        return float(self._c[0])

    @property
    def imag(self) -> np.ndarray:
        return self._c[1:]

    def norm(self) -> float:
        return float(np.linalg.norm(self._c))

    def conjugate(self) -> "Octonion":
        return Octonion(conj_coeffs(self._c))

    def inverse(self) -> "Octonion":
        n2 = float(self._c @ self._c)
        if n2 == 0.0:
            raise ZeroDivisionError("zero octonion has no inverse")
        return Octonion(conj_coeffs(self._c) / n2)

    def __add__(self, other: "Octonion") -> "Octonion":
        return Octonion(self._c + other._c)

    def __sub__(self, other: "Octonion") -> "Octonion":
        return Octonion(self._c - other._c)

    def __neg__(self) -> "Octonion":
        return Octonion(-self._c)

    def __mul__(self, other):
        if isinstance(other, Octonion):
            return Octonion(mul_coeffs(self._c, other._c))
        return Octonion(self._c * float(other))

    def __rmul__(self, other) -> "Octonion":
        # only reached for real scalars; Octonion * Octonion hits __mul__
        return Octonion(self._c * float(other))

    def __truediv__(self, other):
        if isinstance(other, Octonion):
            return self * other.inverse()
        return Octonion(self._c / float(other))

    def __abs__(self) -> float:
        return self.norm()

    def __eq__(self, other) -> bool:
        return isinstance(other, Octonion) and bool(np.array_equal(self._c, other._c))

    def __hash__(self) -> int:
        return hash(self._c.tobytes())

    def allclose(self, other: "Octonion", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._c, other._c, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        body = ", ".join(f"{v:g}" for v in self._c)
        return f"Octonion([{body}])"


def aleph(x: Octonion) -> np.ndarray:
    """Real 8-vector image of an octonion (a fresh, writable copy)."""
    return np.array(x.coeffs)


def aleph_inv(v: np.ndarray) -> Octonion:
    """Octonion with the given real 8-vector of coefficients."""
    return Octonion(v)


def gimel(x: Octonion) -> np.ndarray:
    """8x8 right-representation matrix of an octonion."""
    return gimel_coeffs(x.coeffs)


def gimel_inv(mat: np.ndarray) -> Octonion:
    """Recover the octonion from its representation matrix (column 0)."""
    m = np.asarray(mat, dtype=np.float64)
    if m.shape != (8, 8):
        raise ValueError(f"expected an 8x8 matrix, got shape {m.shape}")
    return Octonion(m[:, 0])


def oct_mul(a: Octonion, b: Octonion) -> Octonion:
    """Octonion product a * b."""
    return Octonion(mul_coeffs(a.coeffs, b.coeffs))


def conjugate(x: Octonion) -> Octonion:
    """Octonion conjugate: keep the real part, negate e1..e7."""
    return x.conjugate()


def sign_unit(x: Octonion) -> Octonion:
    """Unit octonion parallel to x, i.e. x / |x|."""
    n = x.norm()
    if n == 0.0:
        raise ValueError("zero octonion has no sign")
    return Octonion(x.coeffs / n)


def unit_product_table() -> list[list[tuple[int, int]]]:
    """All unit products e_i * e_j as (sign, index) pairs.

    Generated from the representation matrix, never hand-written;
    entry [i][j] == (s, k) means e_i * e_j == s * e_k.
    """
    table = []
    for i in range(8):
        row = []
        for j in range(8):
            p = STRUCTURE[i, j]
            k = int(np.argmax(np.abs(p)))
            s = int(round(p[k]))
            if abs(p[k]) != 1.0 or np.count_nonzero(p) != 1:
                raise AssertionError("unit product is not a signed basis element")
            row.append((s, k))
        table.append(row)
    return table
