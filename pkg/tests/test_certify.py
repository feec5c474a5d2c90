import json

import numpy as np
import pytest

from coninv import (
    Decomposition,
    Matrix,
    is_coninvolutory,
    is_skew_coninvolutory,
    oracle_consim_invariant,
    oracle_involutory_trace,
    skew_base,
    verify_decomposition,
)
from coninv.certify import (
    KIND_CONINV_SUM,
    KIND_INV_DIAG,
    KIND_SKEW_SUM,
    certificate_to_json,
    decomposition_from_json,
    decomposition_to_json,
)

from conftest import well_conditioned


class TestPredicates:
    def test_identity_is_coninvolutory(self):
        assert is_coninvolutory(Matrix.identity(3))

    def test_displayed_summand(self):
        # c = 2 instance of the +-i pair: [[2, i], [-3i, 2]]
        k = Matrix.floating([[2, 1j], [-3j, 2]])
        assert is_coninvolutory(k)

    def test_scaled_identity_is_not(self):
        assert not is_coninvolutory(Matrix.floating(2 * np.eye(2)))

    def test_skew_unit(self):
        assert is_skew_coninvolutory(Matrix.floating([[0, -1j], [1j, 0]]))

    def test_odd_dimension_always_false(self):
        assert not is_skew_coninvolutory(Matrix.identity(3))
        assert not is_skew_coninvolutory(Matrix.floating(np.diag([1j, 1j, 1j])))

    def test_skew_base(self):
        assert is_skew_coninvolutory(skew_base(2))


class TestVerify:
    def test_zero_sum_pair(self):
        k = skew_base(1)
        cert = verify_decomposition(
            Matrix.zeros(2), Decomposition(KIND_SKEW_SUM, [k, -k])
        )
        assert cert.passed and cert.count == 2

    def test_four_summand_pass(self):
        from coninv import coninvolutory_sum

        a = Matrix.diag([3, 1])
        d = coninvolutory_sum(a)
        cert = verify_decomposition(a, d)
        assert cert.passed and cert.count <= 4

    def test_wrong_sum_fails(self):
        eye = Matrix.identity(2)
        cert = verify_decomposition(eye, Decomposition(KIND_CONINV_SUM, [eye, eye]))
        assert not cert.passed
        assert cert.sum_residual > 1.0

    def test_bad_summand_fails(self):
        a = Matrix.floating(3 * np.eye(2))
        cert = verify_decomposition(
            a, Decomposition(KIND_CONINV_SUM, [Matrix.identity(2), Matrix.floating(2 * np.eye(2))])
        )
        assert not cert.passed

    def test_count_bound_enforced(self):
        eye = Matrix.identity(2)
        summands = [eye, eye, eye, -eye, -eye, eye - eye + eye][:5]
        summands = [eye, -eye, eye, -eye, eye]  # sums to I, all coninvolutory
        cert = verify_decomposition(eye, Decomposition(KIND_CONINV_SUM, summands))
        assert not cert.passed  # n = 2 allows at most 4

    def test_reproducible_bit_for_bit(self, rng):
        from coninv import coninvolutory_sum

        a = Matrix.floating(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        d = coninvolutory_sum(a)
        c1 = certificate_to_json(verify_decomposition(a, d))
        c2 = certificate_to_json(verify_decomposition(a, d))
        assert json.dumps(c1, sort_keys=True) == json.dumps(c2, sort_keys=True)


class TestOracles:
    def test_involutory_trace_frozen(self):
        v = Matrix.exact([[1, -3], [0, -1]])
        d = Decomposition(KIND_INV_DIAG, [v, Matrix.zeros(2, "exact") - v])
        assert oracle_involutory_trace(d)

    def test_involutory_trace_diag(self):
        v = Matrix.diag([1, 1, -1])
        d = Decomposition(KIND_INV_DIAG, [v, -v])
        assert oracle_involutory_trace(d)

    def test_involutory_trace_rejects_half(self):
        v = Matrix.diag([0.5, 0.0])
        d = Decomposition(KIND_INV_DIAG, [v, -v])
        assert not oracle_involutory_trace(d)

    def test_consim_invariant_identity(self, rng):
        assert oracle_consim_invariant(Matrix.identity(2), well_conditioned(rng, 2))

    def test_consim_invariant_h_block(self, rng):
        a = Matrix.floating([[0, 1], [-2, 0]])
        assert oracle_consim_invariant(a, well_conditioned(rng, 2))

    def test_invariant_distinguishes(self, rng):
        from coninv import concanonical_form

        f1 = concanonical_form(Matrix.diag([1, 2]))
        f2 = concanonical_form(Matrix.diag([1, 3]))
        from coninv.certify import _same_block_multiset

        assert not _same_block_multiset(f1.blocks, f2.blocks, 1e-6)


def test_decomposition_json_round_trip(rng):
    from coninv import skew_coninvolutory_sum

    a = Matrix.floating(rng.standard_normal((2, 2)))
    d = skew_coninvolutory_sum(a)
    doc = decomposition_to_json(d)
    assert "flags" in doc
    back = decomposition_from_json(doc)
    assert back.kind == d.kind and back.count == d.count
    cert = verify_decomposition(a, back)
    assert cert.passed
