from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triplekit import jordan
from triplekit import numeric as nm
from triplekit.errors import NotIdempotent, NotTripotent, ShapeMismatch
from triplekit.jordan import RankOneOperator
from triplekit.numeric import Matrix

from conftest import E

A = Matrix([[1, 2], [3, 4]])


class TestRankOneOperator:
    def test_embed_is_outer_product(self):
        op = RankOneOperator.functional([1, 1, 0], [1, 0, 0])
        assert op.embed() == Matrix([[1, 0, 0], [1, 0, 0], [0, 0, 0]])

    def test_hilbert_conjugates_second_slot(self):
        op = RankOneOperator.hilbert([1, 0], [nm.I_UNIT, 0])
        assert op.embed() == E(2, 1, 1) * (-nm.I_UNIT)

    def test_trace_and_rank(self):
        op = RankOneOperator.functional([2, 1], [1, -1])
        assert op.trace() == 1
        assert nm.rank(op.embed()) == 1

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            RankOneOperator.functional([0, 0], [1, 0])

    def test_shape_check(self):
        with pytest.raises(ShapeMismatch):
            RankOneOperator(nm.column([1, 2]), nm.row([1, 2, 3]))


class TestPredicates:
    @pytest.mark.parametrize(
        "m, expected",
        [(nm.identity(3), True), (nm.diag([1, -1, 0]), True), (E(2, 1, 2), False), (nm.zeros(2), True)],
    )
    def test_is_tripotent(self, m, expected):
        assert jordan.is_tripotent(m) is expected

    def test_is_idempotent(self):
        assert jordan.is_idempotent(E(2, 1, 1) + E(2, 2, 1))
        assert not jordan.is_idempotent(nm.diag([1, -1]))

    def test_rejects_rectangular(self):
        with pytest.raises(ShapeMismatch):
            jordan.is_tripotent(nm.zeros(2, 3))


class TestTripleProducts:
    def test_aba_identity(self):
        assert jordan.triple_aba(nm.identity(2), A) == A

    def test_aba_matrix_unit(self):
        assert jordan.triple_aba(E(2, 1, 1), A) == Matrix([[1, 0], [0, 0]])

    @pytest.mark.parametrize("seed", range(5))
    def test_aba_rank_one(self, seed):
        rng = np.random.default_rng(seed)
        x, f = nm.random_matrix(3, rng)[:, :1], nm.random_matrix(3, rng)[:1, :]
        x, f = Matrix(x), Matrix(f)
        b = nm.random_matrix(3, rng)
        p = x @ f
        assert jordan.triple_aba(p, b) == p * (f @ b @ x)[0, 0]

    def test_sym_collapses(self):
        b = nm.random_matrix(3, np.random.default_rng(4))
        a = nm.random_matrix(3, np.random.default_rng(5))
        assert jordan.sym_triple(a, b, a) == jordan.triple_aba(a, b)
        assert jordan.sym_triple(nm.identity(3), b, nm.identity(3)) == b

    def test_sym_units(self):
        # E12 E21 E11 = E11 and E11 E21 E12 = 0
        assert jordan.sym_triple(E(2, 1, 2), E(2, 2, 1), E(2, 1, 1)) == E(2, 1, 1) * Fraction(1, 2)

    def test_jordan_product(self):
        assert jordan.jordan_product(E(2, 1, 2), E(2, 2, 1)) == nm.identity(2)


class TestOrder:
    def test_leq(self):
        assert jordan.leq(nm.zeros(2), E(2, 1, 1))
        assert jordan.leq(E(2, 1, 1), nm.identity(2))
        assert jordan.leq(E(3, 1, 1), E(3, 1, 1) + E(3, 2, 2))
        assert not jordan.leq(E(3, 1, 1) + E(3, 2, 2), E(3, 1, 1))

    def test_leq_needs_idempotents(self):
        with pytest.raises(NotIdempotent):
            jordan.leq(E(2, 1, 2), nm.identity(2))

    @pytest.mark.parametrize(
        "p, q, expected",
        [(E(2, 1, 1), E(2, 2, 2), True), (E(2, 1, 1), E(2, 1, 1), False), (E(2, 1, 1), E(2, 1, 2), False)],
    )
    def test_mutually_orthogonal(self, p, q, expected):
        assert jordan.mutually_orthogonal(p, q) is expected


class TestSplit:
    def test_diag(self):
        s = jordan.tripotent_split(nm.diag([1, -1, 0]))
        assert s.p1 == nm.diag([1, 0, 0]) and s.p2 == nm.diag([0, 1, 0])

    def test_idempotent_and_negative(self):
        p = E(2, 1, 1) + E(2, 2, 1)
        assert jordan.tripotent_split(p).p2 == nm.zeros(2)
        assert jordan.tripotent_split(p).p1 == p
        s = jordan.tripotent_split(-p)
        assert s.p1 == nm.zeros(2) and s.p2 == p

    def test_rejects(self):
        with pytest.raises(NotTripotent):
            jordan.tripotent_split(E(2, 1, 2))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 4), st.data())
    def test_recovers_generator(self, n, data):
        plus = data.draw(st.integers(0, n))
        minus = data.draw(st.integers(0, n - plus))
        seed = data.draw(st.integers(0, 10**6))
        r, gen = jordan.random_tripotent(n, plus, minus, seed)
        s = jordan.tripotent_split(r)
        assert s.p1 == gen.p1 and s.p2 == gen.p2
        assert nm.rank(r) == plus + minus


class TestBlocks:
    def test_identity_corner(self):
        assert jordan.block_compress(nm.identity(2), A) == A

    def test_top_left_corner(self):
        a = Matrix([[1, 2, 0], [3, 4, 0], [0, 0, 0]])
        assert jordan.block_compress(E(3, 1, 1) + E(3, 2, 2), a) == a

    def test_unit_corner(self):
        assert jordan.block_compress(E(2, 1, 1), A) == Matrix([[1, 0], [0, 0]])


def test_orthogonal_family(backend):
    ps = jordan.random_orthogonal_idempotents(4, [1, 2, 1], 3, backend)
    for i, p in enumerate(ps):
        assert jordan.is_idempotent(p)
        for q in ps[i + 1:]:
            assert jordan.mutually_orthogonal(p, q)
    assert nm.equal(sum(ps[1:], ps[0]), nm.identity(4, backend))


def test_unit_tripotents_are_rank_one_idempotents():
    probes = jordan.rank_one_tripotents_from_units(3)
    assert len(probes) == 3 + 2 * 6
    for p in probes:
        assert jordan.is_idempotent(p) and nm.rank(p) == 1
