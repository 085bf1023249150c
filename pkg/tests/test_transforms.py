"""Extension-calculus tests: transforms, regularization, direct sums,
relation compression, and comparison verdicts."""
from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from weylkit.errors import NotStrictError, ValidationError
from weylkit.linalg import HermitianMatrix, fro_norm, im_part, re_part
from weylkit.measures import OperatorMeasure
from weylkit.nevanlinna import (
    Conjugation,
    DirectSum,
    IntegralModel,
    KreinTransform,
    RegularizedSqrtModel,
    Sandwich,
    SqrtModel,
    evaluate,
    multiplicity_profile,
)
from weylkit.transforms import (
    ComparisonVerdict,
    SelfAdjointRelation,
    compare_extensions,
    conjugate,
    direct_sum,
    krein_transform,
    regularize,
    relation_from_json,
    relation_project,
    relation_to_json,
)


def H1(x: float) -> HermitianMatrix:
    return HermitianMatrix(np.array([[x]], dtype=complex))


def scalar_integral(c0=0.0, c1=0.0, atoms=(), pieces=()) -> IntegralModel:
    measure = OperatorMeasure(
        1,
        atoms=[(t, H1(w)) for t, w in atoms],
        ac_pieces=[(a, b, H1(d)) for a, b, d in pieces],
    )
    return IntegralModel(H1(c0), H1(c1), measure)


def random_z(rng, n):
    return [
        complex(rng.uniform(-6.0, 6.0), 10.0 ** rng.uniform(-2.0, 0.5))
        for _ in range(n)
    ]


class TestKreinTransform:
    def test_inverse_residual(self):
        b = HermitianMatrix.diagonal([1.0, -1.0])
        f = SqrtModel(HermitianMatrix.diagonal([0.0, 1.0]))
        mb = krein_transform(f, b)
        z = 1j
        lhs = (b.mat - evaluate(f, z)) @ evaluate(mb, z)
        assert fro_norm(lhs - np.eye(2)) <= 1e-10

    def test_inverse_residual_random(self, rng):
        for _ in range(3):
            n = int(rng.integers(1, 5))
            t = HermitianMatrix((lambda a: a @ a.conj().T)(
                rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            ))
            b = HermitianMatrix((lambda a: (a + a.conj().T) / 2)(
                rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            ))
            f = SqrtModel(t)
            mb = krein_transform(f, b)
            for z in random_z(rng, 5):
                lhs = (b.mat - evaluate(f, z)) @ evaluate(mb, z)
                assert fro_norm(lhs - np.eye(n)) <= 1e-10

    def test_node_type_and_mismatch(self):
        f = SqrtModel(H1(0.0))
        assert isinstance(krein_transform(f, H1(0.0)), KreinTransform)
        with pytest.raises(ValidationError):
            krein_transform(f, HermitianMatrix.diagonal([1.0, 2.0]))


class TestConjugate:
    def test_identity_leaves_values(self, rng):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        g = conjugate(f, np.eye(2), np.zeros((2, 2)))
        for z in random_z(rng, 4):
            assert fro_norm(evaluate(g, z) - evaluate(f, z)) <= 1e-14

    def test_scalar_hand_value(self):
        g = conjugate(SqrtModel(H1(0.0)), np.array([[2.0]]), np.array([[1.0]]))
        want = 4.0 * 1j * cmath.sqrt(1j) + 1.0
        assert abs(evaluate(g, 1j)[0, 0] - want) <= 1e-13

    def test_profile_invariance(self, rng):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        r = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) + 3 * np.eye(2)
        r0 = rng.standard_normal((2, 2))
        g = conjugate(f, r, (r0 + r0.conj().T) / 2)
        grid = np.array([2.0, 5.0])
        assert list(multiplicity_profile(f, grid).d) == [1, 2]
        assert list(multiplicity_profile(g, grid).d) == [1, 2]

    def test_singular_r_rejected(self):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        with pytest.raises(ValidationError):
            conjugate(f, np.array([[1.0, 1.0], [1.0, 1.0]]), np.zeros((2, 2)))


class TestRegularize:
    def test_scalar_affine(self):
        f = scalar_integral(c0=3.0, c1=2.0)
        ft, r, q = regularize(f)
        assert abs(q.mat[0, 0] - 3.0) <= 1e-12
        assert abs(r[0, 0] - math.sqrt(2.0)) <= 1e-12
        assert abs(evaluate(ft, 1j)[0, 0] - 1j) <= 1e-9

    def test_fixed_point_and_factors(self, rng):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        t = HermitianMatrix(a @ a.conj().T)
        f = SqrtModel(t)
        ft, r, q = regularize(f)
        fi = evaluate(f, 1j)
        assert fro_norm(ft(1j) - 1j * np.eye(3)) <= 1e-9
        assert fro_norm(r @ r - im_part(fi)) <= 1e-10
        assert fro_norm(q.mat - re_part(fi)) <= 1e-12
        assert isinstance(ft, Conjugation)

    def test_matches_renormalized_model(self, rng):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        t = HermitianMatrix(a @ a.conj().T)
        ft, _, _ = regularize(SqrtModel(t))
        closed = RegularizedSqrtModel(t)
        for z in random_z(rng, 20):
            assert fro_norm(evaluate(ft, z) - evaluate(closed, z)) <= 1e-9

    def test_idempotent(self, rng):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        ft, _, _ = regularize(SqrtModel(HermitianMatrix(a @ a.conj().T)))
        _, r2, q2 = regularize(ft)
        assert fro_norm(r2 - np.eye(2)) <= 1e-8
        assert fro_norm(q2.mat) <= 1e-8

    def test_not_strict_rejected(self):
        flat = IntegralModel(
            HermitianMatrix(np.eye(2)),
            HermitianMatrix.diagonal([1.0, 0.0]),
            OperatorMeasure(2),
        )
        with pytest.raises(NotStrictError):
            regularize(flat)


class TestDirectSum:
    def test_auto_regularized_fixed_point(self):
        f = direct_sum([SqrtModel(H1(0.0)), SqrtModel(H1(1.0))], auto_regularize=True)
        assert fro_norm(evaluate(f, 1j) - 1j * np.eye(2)) <= 1e-9

    def test_plain_is_block_node(self):
        f = direct_sum([SqrtModel(H1(0.0)), SqrtModel(H1(1.0))])
        assert isinstance(f, DirectSum)
        v = evaluate(f, 2j)
        assert v[0, 1] == 0 and v[1, 0] == 0
        assert abs(v[0, 0] - 1j * cmath.sqrt(2j)) <= 1e-13

    def test_additivity_survives_regularization(self):
        terms = [SqrtModel(H1(0.5)), SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))]
        f = direct_sum(terms, auto_regularize=True)
        grid = np.array([0.75, 2.0, 5.0])
        assert list(multiplicity_profile(f, grid).d) == [1, 2, 3]

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            direct_sum([])


class TestSelfAdjointRelation:
    def test_from_operator(self):
        b = HermitianMatrix.diagonal([1.0, -2.0])
        theta = SelfAdjointRelation.from_operator(b)
        assert theta.dim == 2 and theta.op_dim == 2 and not theta.is_trivial
        assert fro_norm(theta.op_basis - np.eye(2)) == 0.0

    def test_trivial(self):
        theta = SelfAdjointRelation.trivial(3)
        assert theta.dim == 3 and theta.op_dim == 0 and theta.is_trivial

    def test_partial_span(self):
        basis = np.array([[1.0], [0.0]])
        theta = SelfAdjointRelation(2, basis, H1(0.5))
        assert theta.op_dim == 1 and not theta.is_trivial

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ValidationError):
            SelfAdjointRelation(2, np.array([[1.0], [1.0]]), H1(0.0))

    def test_operator_block_size_must_match(self):
        basis = np.array([[1.0], [0.0]])
        with pytest.raises(ValidationError):
            SelfAdjointRelation(2, basis, HermitianMatrix.diagonal([1.0, 2.0]))

    def test_row_count_must_match_dim(self):
        with pytest.raises(ValidationError):
            SelfAdjointRelation(3, np.array([[1.0], [0.0]]), H1(0.0))

    def test_json_round_trip(self):
        basis = np.array([[1.0], [0.0]])
        theta = SelfAdjointRelation(2, basis, H1(0.5))
        again = relation_from_json(relation_to_json(theta))
        assert again.dim == 2 and again.op_dim == 1
        assert fro_norm(again.op_basis - basis) == 0.0
        assert again.b_op.mat[0, 0] == 0.5

    def test_json_strict_keys(self):
        obj = relation_to_json(SelfAdjointRelation.trivial(2))
        obj["extra"] = 1
        with pytest.raises(ValidationError):
            relation_from_json(obj)


class TestRelationProject:
    def test_full_span_keeps_values(self, rng):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        theta = SelfAdjointRelation.from_operator(HermitianMatrix.diagonal([0.0, 0.0]))
        g = relation_project(theta, f)
        for z in random_z(rng, 3):
            assert fro_norm(evaluate(g, z) - evaluate(f, z)) <= 1e-14

    def test_trivial_span_is_zero_dim(self):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        g = relation_project(SelfAdjointRelation.trivial(2), f)
        assert g.dim == 0
        assert evaluate(g, 1j).shape == (0, 0)

    def test_coordinate_compression(self):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        theta = SelfAdjointRelation(2, np.array([[1.0], [0.0]]), H1(0.0))
        g = relation_project(theta, f)
        assert isinstance(g, Sandwich) and g.dim == 1
        assert abs(evaluate(g, 2j)[0, 0] - 1j * cmath.sqrt(2j - 1.0)) <= 1e-13

    def test_dim_mismatch(self):
        with pytest.raises(ValidationError):
            relation_project(SelfAdjointRelation.trivial(3), SqrtModel(H1(0.0)))


class TestCompareExtensions:
    def test_reflexive_equivalent(self):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        b = HermitianMatrix(np.eye(2))
        v = compare_extensions(f, b, b, (0.0, 10.0), grid_points=51)
        assert v.relation == "equivalent"

    def test_reference_vs_operator_equivalent(self):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        v = compare_extensions(f, None, HermitianMatrix(np.eye(2)), (0.0, 10.0), grid_points=201)
        assert v.relation == "equivalent"
        # grid step 0.05 lands exactly on both eigenvalues of T
        assert 20 in v.excluded and 80 in v.excluded
        assert v.d1[20] == -1 and v.d2[20] == -1
        req = [i for i in range(201) if i not in v.excluded]
        assert all(v.d1[i] == v.d2[i] >= 0 for i in req)

    def test_compressed_side_inside_band(self):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        theta = SelfAdjointRelation(2, np.array([[1.0], [0.0]]), H1(0.0))
        v = compare_extensions(f, theta, None, (1.5, 3.5), grid_points=21)
        assert v.relation == "equivalent"
        assert all(x == 1 for x in v.d1) and all(x == 1 for x in v.d2)

    def test_compressed_side_subordinate_on_wide_window(self):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        theta = SelfAdjointRelation(2, np.array([[1.0], [0.0]]), H1(0.0))
        v = compare_extensions(f, theta, None, (1.5, 8.0), grid_points=27)
        assert v.relation == "first-subordinate"
        w = compare_extensions(f, None, theta, (1.5, 8.0), grid_points=27)
        assert w.relation == "second-subordinate"

    def test_trivial_relation_means_reference(self):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        v = compare_extensions(f, SelfAdjointRelation.trivial(2), None, (1.5, 3.5), grid_points=11)
        assert v.relation == "equivalent"
        assert all(x == 1 for x in v.d1)

    def test_incomparable_supports(self):
        left = scalar_integral(pieces=[(0.0, 2.0, 1.0 / math.pi)])
        right = scalar_integral(pieces=[(1.0, 3.0, 1.0 / math.pi)])
        f = DirectSum((left, right))
        ta = SelfAdjointRelation(2, np.array([[1.0], [0.0]]), H1(5.0))
        tb = SelfAdjointRelation(2, np.array([[0.0], [1.0]]), H1(5.0))
        v = compare_extensions(f, ta, tb, (0.2, 2.8), grid_points=15)
        assert v.relation == "incomparable"

    def test_pole_on_grid_is_inconclusive(self):
        f = SqrtModel(H1(0.0))
        v = compare_extensions(f, None, H1(-1.0), (-2.0, 0.0), grid_points=3)
        assert v.relation == "inconclusive"
        assert v.excluded == (2,)
        assert v.d2[1] == -1 and v.d1[1] == 0

    def test_discrete_scalar_all_zero(self):
        f = scalar_integral(atoms=[(0.0, 1.0)])
        v = compare_extensions(f, None, H1(1.0), (-0.5, 0.7), grid_points=4)
        assert v.relation == "equivalent"
        assert list(v.d1) == [0, 0, 0, 0] and list(v.d2) == [0, 0, 0, 0]

    def test_not_strict_function_rejected(self):
        flat = IntegralModel(
            HermitianMatrix(np.eye(2)),
            HermitianMatrix.diagonal([1.0, 0.0]),
            OperatorMeasure(2),
        )
        with pytest.raises(NotStrictError):
            compare_extensions(flat, None, HermitianMatrix(np.eye(2)), (0.0, 1.0), grid_points=3)

    def test_verdict_json_shape(self):
        f = SqrtModel(HermitianMatrix.diagonal([1.0, 4.0]))
        v = compare_extensions(f, None, HermitianMatrix(np.eye(2)), (0.0, 10.0), grid_points=21)
        obj = v.to_json()
        assert set(obj) == {"verdict", "grid", "d1", "d2", "excluded", "config"}
        assert obj["verdict"] == "equivalent"
        assert len(obj["grid"]) == 21 and len(obj["d1"]) == 21 and len(obj["d2"]) == 21
        assert set(obj["config"]) == {
            "y0", "ratio", "limit_tol", "max_steps", "rank_tol", "excl_eps", "grid_points",
        }
        assert obj["config"]["grid_points"] == 21
        assert isinstance(v, ComparisonVerdict)

    def test_window_validation(self):
        f = SqrtModel(H1(0.0))
        with pytest.raises(ValidationError):
            compare_extensions(f, None, None, (1.0, 1.0), grid_points=5)
        with pytest.raises(ValidationError):
            compare_extensions(f, None, None, (0.0, 1.0), grid_points=1)
