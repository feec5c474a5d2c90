"""Dense square-matrix arithmetic over complex floats and exact rationals.

One carrier type, two pathways.  ``floating`` wraps a complex128 numpy
array; ``exact`` wraps a grid of :class:`fractions.Fraction` (real
rationals, never rounded).  The exact pathway is what the canonical-form
machinery runs on; the floating pathway carries everything consimilarity
related.  Spectral primitives (eigenvalues, numerical nullspace, rank) are
floating-only and backed by LAPACK through numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

#: Interactive-scale cap for the spectral routines.
DESK_SCALE = 16

#: Default seed for every routine in the package that draws randomness.
DEFAULT_SEED = 0xC0571F


class MatrixError(ValueError):
    """Base class for matrix-level failures."""


class DimensionMismatch(MatrixError):
    pass


class PathwayMismatch(MatrixError):
    pass


class SingularMatrix(MatrixError):
    pass


class ConvergenceFailure(MatrixError):
    pass


class UnsupportedSize(MatrixError):
    """Input outside the supported (desk-scale or parity) envelope."""


@dataclass(frozen=True)
class Tolerance:
    """Absolute + relative tolerance; effective bound is abs + rel*(1+ref)."""

    abs: float = 1e-8
    rel: float = 1e-8

    def __post_init__(self):
        if self.abs < 0 or self.rel < 0:
            raise ValueError("tolerance components must be nonnegative")

    def bound(self, ref: float) -> float:
        return self.abs + self.rel * (1.0 + ref)


#: Rank / nullspace decisions (singular-value threshold).
RANK_TOL = Tolerance(1e-10, 1e-10)

#: Default certification tolerance.
DEFAULT_TOL = Tolerance(1e-8, 1e-8)


@dataclass(frozen=True)
class Polynomial:
    """Monic polynomial f(x) = x^m - a1*x^(m-1) - ... - am.

    Only the trailing coefficients are stored, sign-flipped, i.e.
    ``a = (a1, ..., am)``.  Exact polynomials carry Fractions, floating
    ones Python complex/float.
    """

    a: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        if len(self.a) < 1:
            raise ValueError("polynomial must have degree >= 1")

    @property
    def m(self) -> int:
        return len(self.a)

    def monic_coeffs(self) -> list:
        """Standard descending coefficients [1, -a1, ..., -am]."""
        one = Fraction(1) if self.is_exact() else 1.0
        return [one] + [-c for c in self.a]

    def is_exact(self) -> bool:
        return all(isinstance(c, (Fraction, int)) for c in self.a)

    def __call__(self, x):
        acc = x * 0 + 1
        for c in self.a:
            acc = acc * x - c
        return acc

    @classmethod
    def from_monic_coeffs(cls, coeffs: Sequence) -> "Polynomial":
        """Build from [1, c1, ..., cm] (descending, monic)."""
        lead = coeffs[0]
        if lead != 1:
            raise ValueError("polynomial must be monic")
        return cls(tuple(-c for c in coeffs[1:]))

    @classmethod
    def from_roots(cls, roots: Sequence) -> "Polynomial":
        coeffs = [roots[0] * 0 + 1]
        for r in roots:
            coeffs = [c for c in coeffs] + [coeffs[0] * 0]
            for i in range(len(coeffs) - 1, 0, -1):
                coeffs[i] = coeffs[i] - r * coeffs[i - 1]
        return cls.from_monic_coeffs(coeffs)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise PathwayMismatch(f"exact pathway requires rational entries, got {x!r}")


class Matrix:
    """Square matrix; ``pathway`` is ``"exact"`` or ``"floating"``."""

    __slots__ = ("n", "pathway", "_d")

    def __init__(self, n: int, pathway: str, data):
        self.n = n
        self.pathway = pathway
        self._d = data

    # -- constructors -------------------------------------------------

    @classmethod
    def floating(cls, rows) -> "Matrix":
        arr = np.array(rows, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"expected square array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise MatrixError("non-finite entry")
        return cls(arr.shape[0], "floating", arr)

    @classmethod
    def exact(cls, rows) -> "Matrix":
        grid = tuple(tuple(_as_fraction(x) for x in row) for row in rows)
        n = len(grid)
        if any(len(r) != n for r in grid):
            raise DimensionMismatch("expected square grid")
        return cls(n, "exact", grid)

    @classmethod
    def identity(cls, n: int, pathway: str = "floating") -> "Matrix":
        if pathway == "exact":
            return cls.exact([[Fraction(int(i == j)) for j in range(n)] for i in range(n)])
        return cls.floating(np.eye(n))

    @classmethod
    def zeros(cls, n: int, pathway: str = "floating") -> "Matrix":
        if pathway == "exact":
            return cls.exact([[Fraction(0)] * n for _ in range(n)])
        return cls.floating(np.zeros((n, n)))

    @classmethod
    def diag(cls, values: Sequence, pathway: str = "floating") -> "Matrix":
        n = len(values)
        if pathway == "exact":
            return cls.exact(
                [[values[i] if i == j else Fraction(0) for j in range(n)] for i in range(n)]
            )
        return cls.floating(np.diag(np.asarray(values, dtype=np.complex128)))

    # -- access --------------------------------------------------------

    def __getitem__(self, ij):
        i, j = ij
        if self.pathway == "exact":
            return self._d[i][j]
        return complex(self._d[i, j])

    def rows(self) -> list:
        if self.pathway == "exact":
            return [list(r) for r in self._d]
        return [[complex(x) for x in row] for row in self._d]

    def to_array(self) -> np.ndarray:
        """complex128 view of either pathway (copies)."""
        if self.pathway == "exact":
            return np.array([[float(x) for x in row] for row in self._d], dtype=np.complex128)
        return self._d.copy()

    def to_floating(self) -> "Matrix":
        return Matrix.floating(self.to_array())

    def rationalize(self, bits: int = 41) -> "Matrix":
        """Dyadic rounding of a (nearly) real floating matrix.

        Entries become k / 2^bits (error <= 2^-(bits+1), i.e. ~5e-13 at the
        default); power-of-two denominators keep the downstream exact
        arithmetic cheap.
        """
        if self.pathway == "exact":
            return self
        arr = self._d
        scale = 1 << bits
        return Matrix.exact(
            [
                [Fraction(round(float(arr[i, j].real) * scale), scale) for j in range(self.n)]
                for i in range(self.n)
            ]
        )

    # -- arithmetic -----------------------------------------------------

    def _check(self, other: "Matrix"):
        if not isinstance(other, Matrix):
            raise TypeError("expected Matrix")
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} vs {other.n}")
        if self.pathway != other.pathway:
            raise PathwayMismatch(f"{self.pathway} vs {other.pathway}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.pathway == "exact":
            return Matrix(
                self.n,
                "exact",
                tuple(
                    tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self._d, other._d)
                ),
            )
        return Matrix(self.n, "floating", self._d + other._d)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.pathway == "exact":
            return Matrix(
                self.n,
                "exact",
                tuple(
                    tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self._d, other._d)
                ),
            )
        return Matrix(self.n, "floating", self._d - other._d)

    def __neg__(self) -> "Matrix":
        if self.pathway == "exact":
            return Matrix(self.n, "exact", tuple(tuple(-a for a in r) for r in self._d))
        return Matrix(self.n, "floating", -self._d)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        n = self.n
        if self.pathway == "exact":
            # skipping zero terms pays off on the block-sparse matrices the
            # canonical pipelines produce
            bcols = list(zip(*other._d))
            zero = Fraction(0)
            return Matrix(
                n,
                "exact",
                tuple(
                    tuple(
                        sum((a * b for a, b in zip(row, col) if a and b), zero)
                        for col in bcols
                    )
                    for row in self._d
                ),
            )
        return Matrix(n, "floating", self._d @ other._d)

    def __mul__(self, scalar) -> "Matrix":
        if self.pathway == "exact":
            s = _as_fraction(scalar)
            return Matrix(self.n, "exact", tuple(tuple(s * a for a in r) for r in self._d))
        return Matrix(self.n, "floating", self._d * scalar)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix) or self.n != other.n or self.pathway != other.pathway:
            return False
        if self.pathway == "exact":
            return self._d == other._d
        return bool(np.array_equal(self._d, other._d))

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return f"Matrix(n={self.n}, pathway={self.pathway!r})"

    # -- structural ops --------------------------------------------------

    def conj(self) -> "Matrix":
        """Entrywise complex conjugate."""
        if self.pathway == "exact":
            return self
        return Matrix(self.n, "floating", np.conj(self._d))

    def transpose(self) -> "Matrix":
        if self.pathway == "exact":
            return Matrix(self.n, "exact", tuple(zip(*self._d)))
        return Matrix(self.n, "floating", self._d.T.copy())

    def trace(self):
        if self.pathway == "exact":
            return sum(self._d[i][i] for i in range(self.n))
        return complex(np.trace(self._d))

    def frobenius_norm(self) -> float:
        if self.pathway == "exact":
            return float(np.sqrt(sum(float(x) ** 2 for row in self._d for x in row)))
        return float(np.linalg.norm(self._d, "fro"))

    def max_abs(self) -> float:
        if self.pathway == "exact":
            return max((abs(float(x)) for row in self._d for x in row), default=0.0)
        return float(np.max(np.abs(self._d))) if self.n else 0.0

    def is_zero(self, tol: Tolerance | None = None) -> bool:
        if self.pathway == "exact":
            return all(x == 0 for row in self._d for x in row)
        t = tol or RANK_TOL
        return self.max_abs() <= t.bound(0.0)

    def is_real(self, tol: float = 0.0) -> bool:
        if self.pathway == "exact":
            return True
        return float(np.max(np.abs(self._d.imag))) <= tol

    def real_part(self) -> "Matrix":
        if self.pathway == "exact":
            return self
        return Matrix.floating(self._d.real)

    def inverse(self, tol: Tolerance | None = None) -> "Matrix":
        """Inverse by Gaussian elimination with partial pivoting.

        Exact pathway: bit-exact; raises SingularMatrix on a zero pivot.
        Floating pathway: raises SingularMatrix when the best pivot falls
        below the rank tolerance.
        """
        n = self.n
        if self.pathway == "exact":
            aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(self._d)]
            for col in range(n):
                piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
                if piv is None:
                    raise SingularMatrix("exact pivot is zero")
                aug[col], aug[piv] = aug[piv], aug[col]
                inv_p = 1 / aug[col][col]
                aug[col] = [x * inv_p if x else x for x in aug[col]]
                for r in range(n):
                    if r != col and aug[r][col] != 0:
                        f = aug[r][col]
                        aug[r] = [x - f * y if y else x for x, y in zip(aug[r], aug[col])]
            return Matrix.exact([row[n:] for row in aug])

        t = tol or RANK_TOL
        thresh = t.bound(self.max_abs())
        a = self._d.copy()
        inv = np.eye(n, dtype=np.complex128)
        for col in range(n):
            piv = col + int(np.argmax(np.abs(a[col:, col])))
            if abs(a[piv, col]) < thresh:
                raise SingularMatrix(f"pivot {abs(a[piv, col]):.3e} below tolerance")
            if piv != col:
                a[[col, piv]] = a[[piv, col]]
                inv[[col, piv]] = inv[[piv, col]]
            f = a[col, col]
            a[col] /= f
            inv[col] /= f
            for r in range(n):
                if r != col and a[r, col] != 0:
                    g = a[r, col]
                    a[r] -= g * a[col]
                    inv[r] -= g * inv[col]
        return Matrix(n, "floating", inv)

    def char_poly(self) -> Polynomial:
        """Characteristic polynomial via the Faddeev-LeVerrier recurrence.

        Exact on the exact pathway (the recurrence only divides by
        integers), floating otherwise.
        """
        n = self.n
        if self.pathway == "exact":
            ident = Matrix.identity(n, "exact")
            b = ident
            coeffs = [Fraction(1)]
            for k in range(1, n + 1):
                ab = self @ b
                c = -ab.trace() / k
                coeffs.append(c)
                b = ab + c * ident
            return Polynomial.from_monic_coeffs(coeffs)
        ident = Matrix.identity(n, "floating")
        b = ident
        coeffs = [1.0 + 0j]
        for k in range(1, n + 1):
            ab = self @ b
            c = -ab.trace() / k
            coeffs.append(c)
            b = ab + c * ident
        return Polynomial.from_monic_coeffs(coeffs)


# -- free-function surface -------------------------------------------------


def conj(a: Matrix) -> Matrix:
    return a.conj()


def inverse(a: Matrix, tol: Tolerance | None = None) -> Matrix:
    return a.inverse(tol)


def char_poly(a: Matrix) -> Polynomial:
    return a.char_poly()


def direct_sum(*mats: Matrix) -> Matrix:
    """Block-diagonal direct sum; all parts must share a pathway."""
    if not mats:
        raise ValueError("direct_sum of nothing")
    pathway = mats[0].pathway
    if any(m.pathway != pathway for m in mats):
        raise PathwayMismatch("mixed pathways in direct_sum")
    n = sum(m.n for m in mats)
    if pathway == "exact":
        grid = [[Fraction(0)] * n for _ in range(n)]
        off = 0
        for m in mats:
            for i in range(m.n):
                for j in range(m.n):
                    grid[off + i][off + j] = m._d[i][j]
            off += m.n
        return Matrix.exact(grid)
    arr = np.zeros((n, n), dtype=np.complex128)
    off = 0
    for m in mats:
        arr[off : off + m.n, off : off + m.n] = m._d
        off += m.n
    return Matrix(n, "floating", arr)


def close(a: Matrix, b: Matrix, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Frobenius-norm closeness at tol.bound(||b||_F)."""
    return (a - b).frobenius_norm() <= tol.bound(b.frobenius_norm())


def eigenvalues(a: Matrix, tol: Tolerance | None = None, max_n: int = DESK_SCALE) -> list[complex]:
    """Eigenvalues with multiplicity (floating pathway, desk scale).

    Backed by LAPACK's Hessenberg + shifted-QR driver; non-convergence is
    reported as ConvergenceFailure.  `tol` is accepted for interface
    symmetry with the other spectral routines; the QR driver manages its
    own convergence thresholds.
    """
    if a.pathway != "floating":
        raise PathwayMismatch("eigenvalues requires the floating pathway")
    if a.n > max_n:
        raise UnsupportedSize(f"n={a.n} exceeds desk-scale bound {max_n}")
    try:
        vals = np.linalg.eigvals(a._d)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK cap
        raise ConvergenceFailure(str(exc)) from exc
    return [complex(v) for v in vals]


def real_linear_nullspace(op_matrix: np.ndarray, tol: Tolerance = RANK_TOL) -> list[np.ndarray]:
    """Orthonormal kernel basis of a real operator matrix at the rank tolerance.

    The operator is expected to encode a real-linear map on the stacked
    real coordinates of a complex unknown (2n^2 of them for an n-by-n
    matrix), but any real 2-D array is accepted.
    """
    op = np.asarray(op_matrix, dtype=float)
    if op.ndim != 2:
        raise DimensionMismatch("operator matrix must be 2-D")
    u, s, vh = np.linalg.svd(op)
    smax = float(s[0]) if len(s) else 0.0
    thresh = tol.abs + tol.rel * smax
    ncols = op.shape[1]
    rank = int(np.sum(s > thresh))
    return [vh[i].copy() for i in range(rank, ncols)]


def numerical_rank(arr: np.ndarray, tol: Tolerance = RANK_TOL) -> int:
    s = np.linalg.svd(np.asarray(arr, dtype=complex), compute_uv=False)
    if len(s) == 0:
        return 0
    thresh = tol.abs + tol.rel * float(s[0])
    return int(np.sum(s > thresh))


# -- JSON wire format -------------------------------------------------------


def matrix_to_json(a: Matrix) -> dict:
    """{"n":., "pathway":., "entries": row-major [[re,im],...] or "p/q"}."""
    if a.pathway == "exact":
        entries = [str(a._d[i][j]) for i in range(a.n) for j in range(a.n)]
    else:
        entries = [[float(a._d[i, j].real), float(a._d[i, j].imag)] for i in range(a.n) for j in range(a.n)]
    return {"n": a.n, "pathway": a.pathway, "entries": entries}


def matrix_from_json(d: dict) -> Matrix:
    try:
        n = int(d["n"])
        pathway = d["pathway"]
        entries = d["entries"]
    except (KeyError, TypeError) as exc:
        raise MatrixError(f"malformed matrix JSON: {exc}") from exc
    if n < 1:
        raise MatrixError("matrix JSON requires n >= 1")
    if len(entries) != n * n:
        raise MatrixError(f"expected {n * n} entries, got {len(entries)}")
    if pathway == "exact":
        vals = [Fraction(e) for e in entries]
        return Matrix.exact([vals[i * n : (i + 1) * n] for i in range(n)])
    if pathway == "floating":
        vals = [complex(float(e[0]), float(e[1])) for e in entries]
        return Matrix.floating(np.array([vals[i * n : (i + 1) * n] for i in range(n)]))
    raise MatrixError(f"unknown pathway {pathway!r}")
