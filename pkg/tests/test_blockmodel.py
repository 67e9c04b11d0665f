import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projgeo.blockmodel import (
    BlockOperator,
    DiagonalSequence,
    DichotomyCase,
    SPECTRAL_GAP,
    block_identity,
    block_zero,
    evaluate_block_geodesic,
    existence_dichotomy,
    lift_geodesic,
    lift_projection,
    minimal_norm_lift,
    quotient,
    quotient_geodesic,
    truncated_index_pairs,
)
from projgeo.errors import (
    BlockDimMismatch,
    NoGeodesic,
    NormTooLarge,
    NoSpectralGap,
    NotCodiagonal,
    NotProjection,
    NotSelfadjoint,
)
from projgeo.geodesics import GeodesicSegment, evaluate, minimal_exponent
from projgeo.numkernel import op_norm
from projgeo.projections import index_pair, pair_with_dims, random_projection
from projgeo.suites import classify_by_truncation, random_projection_blocks


def random_block_operator(rng, d, n_exceptional):
    def block():
        return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return BlockOperator(d, tuple(block() for _ in range(n_exceptional)), block())


class TestBlockAlgebra:
    def test_additive_identity(self):
        rng = np.random.default_rng(0)
        a = random_block_operator(rng, 3, 2)
        total = a + block_zero(3)
        assert np.array_equal(total.tail, a.tail)
        assert all(
            np.array_equal(x, y) for x, y in zip(total.exceptional, a.exceptional)
        )

    def test_product_adjoint_identity(self):
        rng = np.random.default_rng(1)
        a = random_block_operator(rng, 2, 3)
        b = random_block_operator(rng, 2, 1)
        left = (a * b).adjoint()
        right = b.adjoint() * a.adjoint()
        # the two sides run through different BLAS accumulation orders, so
        # equality holds up to matrix-arithmetic rounding only
        assert (left - right).norm() <= 1e-13 * max(a.norm() * b.norm(), 1.0)

    def test_norm_is_max_block_norm(self):
        a = BlockOperator(
            2,
            (np.diag([5.0, 0.0]).astype(complex),),
            np.diag([1.0, 0.0]).astype(complex),
        )
        assert a.norm() == 5.0

    def test_normal_form_absorbs_tail_blocks(self):
        tail = np.diag([1.0, 0.0]).astype(complex)
        a = BlockOperator(2, (tail.copy(), tail.copy()), tail)
        assert len(a.exceptional) == 0

    def test_block_dim_mismatch(self):
        with pytest.raises(BlockDimMismatch):
            block_identity(2) + block_identity(3)

    def test_ideal_property(self):
        rng = np.random.default_rng(2)
        a = random_block_operator(rng, 3, 2)
        compact = BlockOperator(
            3,
            (rng.standard_normal((3, 3)) + 0j,),
            np.zeros((3, 3), dtype=complex),
        )
        assert (a * compact).is_compact()
        assert (compact * a).is_compact()

    def test_exceptional_cap(self):
        tail = np.zeros((1, 1), dtype=complex)
        blocks = tuple(np.array([[float(i + 1)]], dtype=complex) for i in range(65))
        with pytest.raises(ValueError):
            BlockOperator(1, blocks, tail)


class TestQuotient:
    def test_compact_maps_to_zero(self):
        a = BlockOperator(2, (np.eye(2, dtype=complex),), np.zeros((2, 2), complex))
        assert np.all(quotient(a) == 0)
        assert a.is_compact()

    def test_star_homomorphism_exact(self):
        rng = np.random.default_rng(3)
        for trial in range(100):
            a = random_block_operator(rng, 2, 3)
            b = random_block_operator(rng, 2, 2)
            assert np.array_equal(quotient(a * b), quotient(a) @ quotient(b))
            assert np.array_equal(quotient(a + b), quotient(a) + quotient(b))
            assert np.array_equal(quotient(a.adjoint()), quotient(a).conj().T)

    def test_quotient_norm_dominated(self):
        rng = np.random.default_rng(4)
        for trial in range(100):
            a = random_block_operator(rng, 3, int(rng.integers(0, 4)))
            assert op_norm(quotient(a)) <= a.norm()


class TestLiftProjection:
    def test_projection_fixed(self):
        p = random_projection(3, 1, 5)
        t = BlockOperator(3, (p,), p)
        lifted = lift_projection(t)
        assert op_norm(lifted.tail - p) <= 1e-12

    def test_thresholding(self):
        t = BlockOperator(
            2,
            (np.diag([0.9, 0.1]).astype(complex),),
            np.diag([1.0, 0.0]).astype(complex),
        )
        lifted = lift_projection(t)
        assert np.allclose(lifted.block_at(0), np.diag([1.0, 0.0]))
        # the thresholded block coincides with the tail, so it is absorbed
        assert len(lifted.exceptional) == 0

    def test_no_spectral_gap(self):
        t = BlockOperator(
            2,
            (np.diag([0.5, 0.0]).astype(complex),),
            np.diag([1.0, 0.0]).astype(complex),
        )
        with pytest.raises(NoSpectralGap):
            lift_projection(t)

    def test_gap_boundary(self):
        value = 0.5 + SPECTRAL_GAP + 1e-3
        t = BlockOperator(
            2,
            (np.diag([value, 0.0]).astype(complex),),
            np.diag([1.0, 0.0]).astype(complex),
        )
        lifted = lift_projection(t)
        assert np.allclose(lifted.block_at(0), np.diag([1.0, 0.0]))

    def test_rejects_asymmetric(self):
        t = BlockOperator(
            2,
            (np.array([[1.0, 1.0], [0.0, 0.0]], dtype=complex),),
            np.diag([1.0, 0.0]).astype(complex),
        )
        with pytest.raises(NotSelfadjoint):
            lift_projection(t)

    def test_rejects_non_projection_tail(self):
        t = BlockOperator(2, (), np.diag([0.7, 0.0]).astype(complex))
        with pytest.raises(NotProjection):
            lift_projection(t)

    def test_quotient_commutes(self):
        rng = np.random.default_rng(6)
        p = random_projection(4, 2, 9)
        noise = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        noise = 1e-12 * (noise + noise.conj().T)
        t = BlockOperator(4, (random_projection(4, 1, 10),), p + noise)
        lifted = lift_projection(t)
        assert op_norm(quotient(lifted) - p) <= 1e-10


class TestDiagonalSequence:
    def test_value_indexing(self):
        d = DiagonalSequence((5.0, -3.0), (1.0, 0.5))
        assert [d.value_at(i) for i in range(6)] == [5.0, -3.0, 1.0, 0.5, 1.0, 0.5]

    def test_limsup_ignores_prefix(self):
        d = DiagonalSequence((100.0,), (0.25,))
        assert d.limsup_abs() == 0.25
        assert d.sup_abs() == 100.0

    def test_add_aligns_cycles(self):
        a = DiagonalSequence((1.0,), (1.0, 2.0))
        b = DiagonalSequence((), (10.0, 20.0, 30.0))
        total = a + b
        for n in range(12):
            assert total.value_at(n) == a.value_at(n) + b.value_at(n)

    def test_empty_cycle_rejected(self):
        with pytest.raises(ValueError):
            DiagonalSequence((1.0,), ())


class TestMinimalNormLift:
    def test_worked_example(self):
        d = DiagonalSequence((5.0, -3.0), (1.0, 0.5))
        k0 = minimal_norm_lift(d)
        assert k0.prefix == (-4.0, 2.0)
        assert k0.tail_cycle == (0.0, 0.0)
        assert (d + k0).sup_abs() == 1.0

    def test_no_clipping_needed(self):
        d = DiagonalSequence((0.2,), (1.0,))
        assert minimal_norm_lift(d).prefix == (0.0,)

    def test_empty_prefix(self):
        d = DiagonalSequence((), (2.0, -1.0))
        k0 = minimal_norm_lift(d)
        assert k0.prefix == ()
        assert (d + k0).sup_abs() == 2.0

    @settings(max_examples=200, deadline=None)
    @given(
        prefix=st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), max_size=8
        ),
        cycle=st.lists(
            st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
            min_size=1,
            max_size=6,
        ),
    )
    def test_exact_norm_equality(self, prefix, cycle):
        d = DiagonalSequence(tuple(prefix), tuple(cycle))
        k0 = minimal_norm_lift(d)
        assert all(v == 0.0 for v in k0.tail_cycle)
        assert (d + k0).sup_abs() == d.limsup_abs()

    def test_competitors_never_beat_it(self):
        rng = np.random.default_rng(7)
        for trial in range(50):
            prefix = tuple(float(x) for x in rng.uniform(-10, 10, rng.integers(0, 8)))
            cycle = tuple(float(x) for x in rng.uniform(-5, 5, rng.integers(1, 5)))
            d = DiagonalSequence(prefix, cycle)
            level = d.limsup_abs()
            for _ in range(100):
                comp = DiagonalSequence(
                    tuple(float(x) for x in rng.uniform(-20, 20, rng.integers(0, 10))),
                    (0.0,),
                )
                assert (d + comp).sup_abs() >= level - 1e-15


class TestLiftGeodesic:
    def setup_pair(self, seed=0):
        theta = np.pi / 3
        c, s = np.cos(theta), np.sin(theta)
        p = np.diag([1.0, 0.0]).astype(complex)
        q = np.array([[c * c, c * s], [c * s, s * s]], dtype=complex)
        z = minimal_exponent(p, q).exponent
        return p, q, z

    def test_zero_exponent(self):
        p = np.diag([1.0, 0.0]).astype(complex)
        lift = BlockOperator(2, (), p)
        z = lift_geodesic(p, np.zeros((2, 2), complex), lift)
        assert z.norm() == 0.0

    def test_norm_equality_and_quotient(self):
        p, q, z = self.setup_pair()
        lift = BlockOperator(2, (np.diag([0.0, 1.0]).astype(complex),), p)
        big = lift_geodesic(p, z, lift)
        assert abs(big.norm() - op_norm(z)) <= 1e-12
        assert np.array_equal(quotient(big), z)
        assert abs(op_norm(z) - np.pi / 3) <= 1e-12

    def test_curve_projects_to_quotient_curve(self):
        p, q, z = self.setup_pair()
        lift = BlockOperator(2, (np.diag([0.0, 1.0]).astype(complex),), p)
        big = lift_geodesic(p, z, lift)
        curve = evaluate_block_geodesic(lift, big)
        small = GeodesicSegment(base=p, exponent=z)
        for t in (0.25, 0.5, 1.0):
            assert np.array_equal(quotient(curve(t)), evaluate(small, t))

    def test_codiagonal_per_block(self):
        p, q, z = self.setup_pair()
        rng = np.random.default_rng(8)
        lift = BlockOperator(2, random_projection_blocks(rng, 2, 3), p)
        big = lift_geodesic(p, z, lift)
        for i in range(4):
            bp, bz = lift.block_at(i), big.block_at(i)
            eye = np.eye(2)
            assert op_norm(bp @ bz @ bp) <= 1e-10
            assert op_norm((eye - bp) @ bz @ (eye - bp)) <= 1e-10

    def test_fiber_freedom(self):
        p, q, z = self.setup_pair()
        rng = np.random.default_rng(9)
        for trial in range(10):
            lift = BlockOperator(
                2, random_projection_blocks(rng, 2, int(rng.integers(0, 4))), p
            )
            big = lift_geodesic(p, z, lift)
            assert abs(big.norm() - op_norm(z)) <= 1e-12

    def test_rejects_oversized_exponent(self):
        p = np.diag([1.0, 0.0]).astype(complex)
        z = 2.0 * np.array([[0, -1], [1, 0]], dtype=complex)
        with pytest.raises(NormTooLarge):
            lift_geodesic(p, z, BlockOperator(2, (), p))

    def test_rejects_non_codiagonal(self):
        p = np.diag([1.0, 0.0]).astype(complex)
        z = np.array([[1j, 0], [0, 0]], dtype=complex)
        with pytest.raises(NotCodiagonal):
            lift_geodesic(p, z, BlockOperator(2, (), p))

    def test_rejects_wrong_fiber(self):
        p = np.diag([1.0, 0.0]).astype(complex)
        other = np.diag([0.0, 1.0]).astype(complex)
        z = np.zeros((2, 2), complex)
        with pytest.raises(NotProjection):
            lift_geodesic(p, z, BlockOperator(2, (), other))


class TestExistenceDichotomy:
    def test_equal_pair_finite(self):
        p = random_projection(3, 1, 11)
        result = existence_dichotomy(p, p)
        assert result.exists and result.case is DichotomyCase.FINITE_FINITE

    def test_crossed_pair_infinite(self):
        p = np.diag([1.0, 0.0]).astype(complex)
        q = np.diag([0.0, 1.0]).astype(complex)
        result = existence_dichotomy(p, q)
        assert result.exists and result.case is DichotomyCase.INFINITE_INFINITE

    def test_nested_pair_mixed(self):
        p = np.diag([1.0, 1.0, 0.0]).astype(complex)
        q = np.diag([1.0, 0.0, 0.0]).astype(complex)
        result = existence_dichotomy(p, q)
        assert not result.exists
        assert result.case is DichotomyCase.MIXED
        assert result.witnesses is None

    def test_rejects_non_projection(self):
        with pytest.raises(NotProjection):
            existence_dichotomy(np.diag([0.5, 0.0]), np.diag([1.0, 0.0]))

    def test_surgery_balances_witnesses(self):
        rng = np.random.default_rng(12)
        p = random_projection(4, 2, 13)
        q = random_projection(4, 2, 14)
        if index_pair(p, q) != (0, 0):
            pytest.skip("sampled pair is not generic")
        # exceptional blocks with mismatched crossed dimensions
        bad_p = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
        bad_q = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)
        lifts = (BlockOperator(4, (bad_p,), p), BlockOperator(4, (bad_q,), q))
        assert truncated_index_pairs(*lifts, [8])[0].d_plus != truncated_index_pairs(
            *lifts, [8]
        )[0].d_minus
        result = existence_dichotomy(p, q, lifts=lifts)
        assert result.case is DichotomyCase.FINITE_FINITE
        final = truncated_index_pairs(*result.witnesses, [8])[0]
        assert final.d_plus == final.d_minus
        # surgery must not move the class modulo the ideal
        assert np.array_equal(result.witnesses[0].tail, p)
        assert np.array_equal(result.witnesses[1].tail, q)

    def test_truncation_oracle_agreement(self):
        rng = np.random.default_rng(15)
        cases = {
            (1, 1, 0, 0, 0): DichotomyCase.FINITE_FINITE,
            (0, 0, 1, 1, 0): DichotomyCase.INFINITE_INFINITE,
            (0, 1, 1, 0, 0): DichotomyCase.MIXED,
            (1, 0, 0, 2, 2): DichotomyCase.MIXED,
            (0, 0, 2, 1, 2): DichotomyCase.INFINITE_INFINITE,
        }
        for dims, expected in cases.items():
            d11, d00, d10, d01, g = dims
            angles = rng.uniform(0.3, 1.2, g // 2)
            p, q = pair_with_dims(d11, d00, d10, d01, g, angles, seed=17)
            result = existence_dichotomy(p, q)
            assert result.case is expected
            probe = result.witnesses or (
                BlockOperator(p.shape[0], (), p),
                BlockOperator(q.shape[0], (), q),
            )
            assert classify_by_truncation(*probe) is expected


class TestQuotientGeodesic:
    def test_equal_pair(self):
        p = random_projection(3, 2, 19)
        result = quotient_geodesic(p, p)
        assert op_norm(result.segment.exponent) <= 1e-12
        assert result.case is DichotomyCase.FINITE_FINITE
        assert result.lift_commutation_error <= 1e-9

    def test_generic_angle(self):
        theta = np.pi / 4
        p, q = pair_with_dims(0, 0, 0, 0, 2, [theta], seed=21)
        result = quotient_geodesic(p, q)
        assert abs(op_norm(result.segment.exponent) - theta) <= 1e-9
        assert result.unique

    def test_uniqueness_flag_from_gap(self):
        p, q = pair_with_dims(1, 1, 0, 0, 2, [0.8], seed=23)
        b1 = p + q - np.eye(p.shape[0])
        assert float(np.linalg.svd(b1, compute_uv=False)[-1]) >= 0.1
        assert quotient_geodesic(p, q).unique

    def test_balanced_crossed_quotient(self):
        p = np.diag([1.0, 0.0]).astype(complex)
        q = np.diag([0.0, 1.0]).astype(complex)
        result = quotient_geodesic(p, q)
        assert result.case is DichotomyCase.INFINITE_INFINITE
        assert not result.unique
        assert abs(op_norm(result.segment.exponent) - np.pi / 2) <= 1e-12

    def test_mixed_raises(self):
        p = np.diag([1.0, 1.0, 0.0]).astype(complex)
        q = np.diag([1.0, 0.0, 0.0]).astype(complex)
        with pytest.raises(NoGeodesic):
            quotient_geodesic(p, q)

    def test_unbalanced_infinite_raises(self):
        # both crossed nullities positive but unequal: the dichotomy holds,
        # yet no block-periodic pairing exists
        p, q = pair_with_dims(0, 0, 2, 1, 0, [], seed=25)
        assert existence_dichotomy(p, q).exists
        with pytest.raises(NoGeodesic):
            quotient_geodesic(p, q)
