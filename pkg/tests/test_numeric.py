from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triplekit import numeric as nm
from triplekit.errors import BackendMismatch, SchemaError, ShapeMismatch, Singular
from triplekit.numeric import FLOAT, GaussianRational, Matrix

from conftest import E

small = st.integers(-20, 20)
dens = st.integers(1, 12)
gaussians = st.builds(lambda a, b, d: GaussianRational(Fraction(a, d), Fraction(b, d)), small, small, dens)


class TestGaussianRational:
    def test_reduced_storage(self):
        z = GaussianRational(Fraction(2, 4), Fraction(6, 4))
        assert z.parts == (1, 3, 2)
        assert z.re == Fraction(1, 2) and z.im == Fraction(3, 2)

    def test_i_squared(self):
        assert nm.I_UNIT * nm.I_UNIT == -1

    def test_inverse(self):
        z = GaussianRational(3, 4)
        assert z.inverse() == GaussianRational(Fraction(3, 25), Fraction(-4, 25))
        with pytest.raises(ZeroDivisionError):
            nm.ZERO.inverse()

    def test_refuses_floats(self):
        with pytest.raises(BackendMismatch):
            nm.ONE + 0.5
        with pytest.raises(BackendMismatch):
            GaussianRational(0.5)

    @given(gaussians, gaussians, gaussians)
    def test_field_laws(self, x, y, z):
        assert (x + y) * z == x * z + y * z
        assert (x * y) * z == x * (y * z)
        assert (x * y).conjugate() == x.conjugate() * y.conjugate()
        if x:
            assert x * x.inverse() == 1

    @given(gaussians)
    def test_hash_agrees_with_eq(self, x):
        assert hash(x) == hash(GaussianRational(x.re, x.im))


class TestMatrixArithmetic:
    def test_add_identity(self, backend):
        a = nm.random_matrix(3, np.random.default_rng(0), backend)
        assert a + nm.zeros(3, backend=backend) == a

    def test_units_sum_to_identity(self):
        assert E(2, 1, 1) + E(2, 2, 2) == nm.diag([1, 1])

    def test_entrywise_sum(self):
        assert Matrix([[1, 2], [3, 4]]) + Matrix([[4, 3], [2, 1]]) == Matrix([[5, 5], [5, 5]])

    def test_unit_products(self):
        assert E(2, 1, 2) @ E(2, 2, 1) == E(2, 1, 1)
        assert nm.is_zero(E(2, 1, 2) @ E(2, 1, 2))
        a = nm.random_matrix(3, np.random.default_rng(1))
        assert nm.identity(3) @ a == a

    def test_transpose_and_conj(self):
        assert nm.transpose(E(2, 1, 2)) == E(2, 2, 1)
        assert nm.conj(Matrix([[nm.I_UNIT]])) == Matrix([[-nm.I_UNIT]])

    def test_conj_transpose_composes(self, backend):
        a = nm.random_matrix(4, np.random.default_rng(2), backend)
        assert nm.conj_transpose(a) == nm.conj(nm.transpose(a))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            nm.identity(2) + nm.identity(3)
        with pytest.raises(ShapeMismatch):
            nm.identity(2) @ nm.zeros(3, 1)

    def test_backend_mismatch(self):
        with pytest.raises(BackendMismatch):
            nm.identity(2) + nm.identity(2, FLOAT)
        with pytest.raises(BackendMismatch):
            nm.scale(0.5, nm.identity(2))
        with pytest.raises(BackendMismatch):
            nm.diag([1.0, 2.0])
        assert nm.diag([1.0, 2.0], FLOAT).to_backend(nm.EXACT) == nm.diag([1, 2])

    def test_immutable(self):
        a = nm.identity(2)
        with pytest.raises(ValueError):
            a.data[0, 0] = nm.ZERO


class TestRank:
    @pytest.mark.parametrize(
        "m, expected",
        [
            (nm.zeros(3), 0),
            (nm.diag([1, -1, 0]), 2),
            (nm.column([1, 2, 3]) @ nm.row([nm.I_UNIT, 0, 5]), 1),
            (nm.identity(4), 4),
        ],
    )
    def test_oracles(self, m, expected):
        assert nm.rank(m) == expected
        assert nm.rank(m.to_backend(FLOAT)) == expected

    def test_float_threshold(self):
        assert nm.rank(nm.diag([1.0, 1e-12], FLOAT)) == 1
        assert nm.rank(nm.diag([1.0, 1e-6], FLOAT)) == 2

    def test_random_invertible_full_rank(self, backend):
        assert nm.rank(nm.random_invertible(4, 11, backend)) == 4

    def test_random_invertible_deterministic(self, backend):
        assert nm.random_invertible(3, 5, backend) == nm.random_invertible(3, 5, backend)
        m = nm.random_invertible(1, 0, backend)
        assert m.shape == (1, 1) and not nm.is_zero(m)


class TestInvert:
    def test_identity(self, backend):
        assert nm.invert(nm.identity(3, backend)) == nm.identity(3, backend)

    def test_diag(self):
        assert nm.invert(nm.diag([1, 2])) == nm.diag([1, Fraction(1, 2)])

    @pytest.mark.parametrize("seed", range(5))
    def test_residual(self, seed, backend):
        t = nm.random_invertible(4, seed, backend)
        assert nm.equal(nm.invert(t) @ t, nm.identity(4, backend))

    def test_singular(self, backend):
        with pytest.raises(Singular):
            nm.invert(nm.diag([1, 0], backend))


class TestJson:
    @pytest.mark.parametrize("seed", range(3))
    def test_round_trip(self, seed, backend):
        a = nm.random_matrix(3, np.random.default_rng(seed), backend)
        assert nm.matrix_from_json(nm.matrix_to_json(a)) == a

    def test_exact_strings(self):
        doc = nm.matrix_to_json(Matrix([[GaussianRational(Fraction(1, 2), -3)]]))
        assert doc["entries"] == [["1/2", "-3/1"]]

    @pytest.mark.parametrize(
        "doc",
        [
            [],
            {"backend": "exact", "rows": 1, "cols": 1},
            {"backend": "quad", "rows": 1, "cols": 1, "entries": [["1", "0"]]},
            {"backend": "exact", "rows": 1, "cols": 2, "entries": [["1", "0"]]},
            {"backend": "exact", "rows": 1, "cols": 1, "entries": [[1, 0]]},
            {"backend": "float", "rows": 1, "cols": 1, "entries": [["1", "0"]]},
        ],
    )
    def test_schema_errors(self, doc):
        with pytest.raises(SchemaError):
            nm.matrix_from_json(doc)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6))
def test_float_and_exact_agree(n, seed):
    rng = np.random.default_rng(seed)
    a, b = nm.random_matrix(n, rng), nm.random_matrix(n, rng)
    exact = (a @ b + a).to_backend(FLOAT)
    approx = a.to_backend(FLOAT) @ b.to_backend(FLOAT) + a.to_backend(FLOAT)
    assert nm.equal(exact, approx)
