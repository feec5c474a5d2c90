from fractions import Fraction as F

import numpy as np
import pytest

from coninv import (
    Matrix,
    Polynomial,
    Tolerance,
    char_poly,
    direct_sum,
    eigenvalues,
    matrix_from_json,
    matrix_to_json,
    real_linear_nullspace,
)
from coninv.matcore import (
    DimensionMismatch,
    PathwayMismatch,
    RANK_TOL,
    SingularMatrix,
    UnsupportedSize,
)

from conftest import random_complex


class TestArith:
    def test_additive_inverse(self):
        eye = Matrix.identity(2)
        assert (eye + (-eye)).is_zero()

    def test_rotation_square(self):
        j = Matrix.floating([[0, 1], [-1, 0]])
        assert (j @ j) == Matrix.floating(-np.eye(2))

    def test_conj_product_of_involutory(self):
        # oracle: direct 2x2 multiplication of conj(C) C by hand
        c = [[1, 1], [0, -1]]
        expect = [
            [c[0][0] * c[0][0] + c[0][1] * c[1][0], c[0][0] * c[0][1] + c[0][1] * c[1][1]],
            [c[1][0] * c[0][0] + c[1][1] * c[1][0], c[1][0] * c[0][1] + c[1][1] * c[1][1]],
        ]
        assert expect == [[1, 0], [0, 1]]
        m = Matrix.floating(c)
        assert (m.conj() @ m) == Matrix.identity(2)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Matrix.identity(2) @ Matrix.identity(3)

    def test_pathway_mismatch(self):
        with pytest.raises(PathwayMismatch):
            Matrix.identity(2) + Matrix.identity(2, "exact")

    def test_exact_arithmetic_is_exact(self):
        a = Matrix.exact([[F(1, 3), F(2, 7)], [F(-5, 11), F(1)]])
        b = a + a - a
        assert b == a
        third = (a * F(1, 3)) * 3
        assert third == a


class TestConj:
    def test_imag_flip(self):
        assert Matrix.floating([[1j]]).conj() == Matrix.floating([[-1j]])

    def test_real_fixed(self):
        a = Matrix.floating([[1, 2], [3, 4]])
        assert a.conj() == a

    def test_involution_and_multiplicativity(self, rng):
        for _ in range(10):
            a = random_complex(rng, 4)
            b = random_complex(rng, 4)
            assert a.conj().conj() == a
            assert ((a @ b).conj() - a.conj() @ b.conj()).frobenius_norm() < 1e-12


class TestInverse:
    def test_identity(self):
        assert Matrix.identity(3).inverse() == Matrix.identity(3)

    def test_diag(self):
        inv = Matrix.diag([2, -1], "exact").inverse()
        assert inv == Matrix.diag([F(1, 2), F(-1)], "exact")

    def test_unitriangular_multiply_back(self):
        a = Matrix.floating([[1, 1], [0, 1]])
        inv = a.inverse()
        assert (a @ inv - Matrix.identity(2)).frobenius_norm() < 1e-14
        assert np.allclose(inv.to_array(), [[1, -1], [0, 1]])

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            Matrix.zeros(2).inverse()
        with pytest.raises(SingularMatrix):
            Matrix.exact([[1, 1], [1, 1]]).inverse()

    def test_random_multiply_back(self, rng):
        for _ in range(20):
            a = random_complex(rng, 5)
            if np.linalg.cond(a.to_array()) > 1e6:
                continue
            res = (a @ a.inverse() - Matrix.identity(5)).frobenius_norm()
            assert res <= Tolerance().bound(1.0)


class TestCharPoly:
    def test_companion_round_trip(self):
        from coninv import companion

        f = Polynomial((F(5), F(-6)))  # x^2 - 5x + 6
        assert companion(f).char_poly() == f

    def test_nilpotent(self):
        assert Matrix.zeros(2, "exact").char_poly() == Polynomial((F(0), F(0)))

    def test_diag_product_of_linears(self):
        f = Matrix.diag([2, 3], "exact").char_poly()
        assert f == Polynomial((F(5), F(-6)))

    def test_cayley_hamilton_exact(self, rng):
        for _ in range(5):
            n = int(rng.integers(2, 5))
            a = Matrix.exact(
                [[F(int(rng.integers(-6, 7)), int(rng.integers(1, 4))) for _ in range(n)] for _ in range(n)]
            )
            f = a.char_poly()
            acc = Matrix.identity(n, "exact")
            for coeff in f.a:
                acc = acc @ a - coeff * Matrix.identity(n, "exact")
            assert acc.is_zero()


class TestEigenvalues:
    def test_diag(self):
        vals = eigenvalues(Matrix.diag([1, 2, 3]))
        assert sorted(v.real for v in vals) == pytest.approx([1, 2, 3])

    def test_rotation_spectrum(self):
        vals = eigenvalues(Matrix.floating([[0, 1], [-1, 0]]))
        assert sorted(v.imag for v in vals) == pytest.approx([-1, 1])
        assert max(abs(v.real) for v in vals) < 1e-12

    def test_triangular_repeat(self):
        vals = eigenvalues(Matrix.floating([[2, 1], [0, 2]]))
        assert [v.real for v in vals] == pytest.approx([2, 2])

    def test_matches_char_poly_roots(self, rng):
        for n in range(2, 9):
            a = random_complex(rng, n)
            vals = sorted(eigenvalues(a), key=lambda z: (z.real, z.imag))
            roots = sorted(np.roots(a.char_poly().monic_coeffs()), key=lambda z: (z.real, z.imag))
            for v, r in zip(vals, roots):
                assert abs(v - r) < 1e-6

    def test_guards(self):
        with pytest.raises(PathwayMismatch):
            eigenvalues(Matrix.identity(2, "exact"))
        with pytest.raises(UnsupportedSize):
            eigenvalues(Matrix.identity(17))


class TestRealLinearNullspace:
    def test_identity_operator_empty(self):
        assert real_linear_nullspace(np.eye(2)) == []

    def test_zero_operator_full(self):
        basis = real_linear_nullspace(np.zeros((2, 2)))
        assert len(basis) == 2

    def test_conjugation_fixed_points(self):
        # solutions of conj(S) * 1 = 1 * S for 1x1 S = x + iy reduce to y = 0
        op = np.array([[0.0, 0.0], [0.0, 2.0]])
        basis = real_linear_nullspace(op)
        assert len(basis) == 1
        assert abs(basis[0][1]) < 1e-12

    def test_basis_maps_below_tolerance(self, rng):
        op = rng.standard_normal((8, 8))
        op[:, 0] = op[:, 1]  # force a kernel
        for v in real_linear_nullspace(op):
            assert np.linalg.norm(op @ v) <= RANK_TOL.bound(np.linalg.norm(op, 2))


class TestJson:
    def test_floating_round_trip(self, rng):
        a = random_complex(rng, 3)
        assert matrix_from_json(matrix_to_json(a)) == a

    def test_exact_round_trip(self):
        a = Matrix.exact([[F(1, 3), F(-2)], [F(0), F(7, 5)]])
        doc = matrix_to_json(a)
        assert doc["pathway"] == "exact"
        assert doc["entries"][0] == "1/3"
        assert matrix_from_json(doc) == a

    def test_malformed(self):
        with pytest.raises(Exception):
            matrix_from_json({"n": 2, "pathway": "floating", "entries": [[0, 0]]})


class TestTolerance:
    def test_bound_form(self):
        t = Tolerance(1e-8, 1e-8)
        assert t.bound(0.0) == pytest.approx(2e-8)
        assert t.bound(9.0) == pytest.approx(1e-8 + 1e-7)

    def test_nonnegative(self):
        with pytest.raises(ValueError):
            Tolerance(-1.0, 0.0)


def test_direct_sum_layout():
    a = direct_sum(Matrix.identity(1), Matrix.floating([[0, 1], [-1, 0]]))
    assert np.allclose(a.to_array(), [[1, 0, 0], [0, 0, 1], [0, -1, 0]])


def test_close_helper():
    from coninv.matcore import close

    a = Matrix.identity(3)
    b = Matrix.floating(np.eye(3) + 1e-12)
    assert close(a, b)
    assert not close(a, Matrix.floating(2 * np.eye(3)))


def test_polynomial_from_roots():
    f = Polynomial.from_roots([F(2), F(3)])
    assert f == Polynomial((F(5), F(-6)))
    assert f(F(2)) == 0 and f(F(3)) == 0 and f(F(0)) == 6
