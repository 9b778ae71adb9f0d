"""Idempotents, tripotents and Jordan triple products on ``M_n``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import numeric as nm
from .errors import NotIdempotent, NotTripotent, ShapeMismatch
from .numeric import DEFAULT_TOL, Matrix, TolerancePolicy


def _half(backend: str):
    return nm.GaussianRational(Fraction(1, 2)) if backend == nm.EXACT else 0.5


def _square(a: Matrix) -> None:
    if a.rows != a.cols:
        raise ShapeMismatch(f"expected a square matrix, got {a.shape}")


def _same_square(*ms: Matrix) -> None:
    for m in ms:
        _square(m)
    if len({m.rows for m in ms}) > 1:
        raise ShapeMismatch("operands must share the same dimension")


@dataclass(frozen=True)
class RankOneOperator:
    """The operator ``x (x) f`` acting by ``z -> f(z) x``.

    ``x`` is an ``n x 1`` column and ``f`` a ``1 x n`` row (a linear
    functional).  Use :meth:`hilbert` for the inner-product form
    ``z -> <z, y> x``, which stores ``f = y^*``.
    """

    x: Matrix
    f: Matrix

    def __post_init__(self):
        if self.x.cols != 1 or self.f.rows != 1 or self.x.rows != self.f.cols:
            raise ShapeMismatch("x must be n x 1 and f must be 1 x n")
        if nm.is_zero(self.x) or nm.is_zero(self.f):
            raise ValueError("rank-one operator needs nonzero x and f")

    @classmethod
    def functional(cls, x, f, backend: str = nm.EXACT) -> "RankOneOperator":
        return cls(nm.column(x, backend), nm.row(f, backend))

    @classmethod
    def hilbert(cls, x, y, backend: str = nm.EXACT) -> "RankOneOperator":
        return cls(nm.column(x, backend), nm.conj_transpose(nm.column(y, backend)))

    @property
    def n(self) -> int:
        return self.x.rows

    def embed(self) -> Matrix:
        return self.x @ self.f

    def trace(self):
        """``f(x)``; the operator is a tripotent iff this squares to 1."""
        return (self.f @ self.x)[0, 0]


@dataclass(frozen=True)
class TripotentSplit:
    """Mutually orthogonal idempotents with ``R = p1 - p2``."""

    p1: Matrix
    p2: Matrix

    @property
    def tripotent(self) -> Matrix:
        return self.p1 - self.p2


def is_idempotent(p: Matrix, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    _square(p)
    return nm.equal(p @ p, p, tol)


def is_tripotent(r: Matrix, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    _square(r)
    return nm.equal(r @ r @ r, r, tol)


def triple_aba(a: Matrix, b: Matrix) -> Matrix:
    _same_square(a, b)
    return a @ b @ a


def sym_triple(a: Matrix, b: Matrix, c: Matrix) -> Matrix:
    """Symmetrized Jordan triple product ``(ABC + CBA) / 2``."""
    _same_square(a, b, c)
    return (a @ b @ c + c @ b @ a) * _half(a.backend)


def jordan_product(a: Matrix, b: Matrix) -> Matrix:
    """``AB + BA`` (unnormalized)."""
    _same_square(a, b)
    return a @ b + b @ a


def leq(p: Matrix, q: Matrix, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Idempotent order: ``P <= Q`` iff ``PQ = QP = P``."""
    _same_square(p, q)
    if not (is_idempotent(p, tol) and is_idempotent(q, tol)):
        raise NotIdempotent("leq is only defined on idempotents")
    return nm.equal(p @ q, p, tol) and nm.equal(q @ p, p, tol)


def mutually_orthogonal(p: Matrix, q: Matrix, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    _same_square(p, q)
    scale = max(nm.max_abs(p), nm.max_abs(q)) ** 2
    return nm.is_zero(p @ q, tol, scale) and nm.is_zero(q @ p, tol, scale)


def tripotent_split(r: Matrix, tol: TolerancePolicy = DEFAULT_TOL) -> TripotentSplit:
    """Write a tripotent as ``P1 - P2`` with ``P1 = (R^2 + R)/2``, ``P2 = (R^2 - R)/2``."""
    if not is_tripotent(r, tol):
        raise NotTripotent("R^3 != R")
    r2 = r @ r
    h = _half(r.backend)
    return TripotentSplit((r2 + r) * h, (r2 - r) * h)


def block_compress(p: Matrix, a: Matrix) -> Matrix:
    """``P A P``; ``A`` lives in the corner cut out by ``P`` iff this returns ``A``."""
    _same_square(p, a)
    return p @ a @ p


# -- random instances --------------------------------------------------------


def random_orthogonal_idempotents(
    n: int, ranks: list[int], seed: int, backend: str = nm.EXACT
) -> list[Matrix]:
    """Mutually orthogonal idempotents ``S D_k S^{-1}`` of the requested ranks.

    The ``D_k`` are disjoint diagonal 0/1 blocks, so the family also sums
    to an idempotent.
    """
    if sum(ranks) > n or any(r < 0 for r in ranks):
        raise ValueError("ranks must be non-negative and sum to at most n")
    s = nm.random_invertible(n, seed, backend)
    s_inv = nm.invert(s)
    out, start = [], 0
    for r in ranks:
        d = [1 if start <= i < start + r else 0 for i in range(n)]
        out.append(s @ nm.diag(d, backend) @ s_inv)
        start += r
    return out


def random_tripotent(
    n: int, plus: int, minus: int, seed: int, backend: str = nm.EXACT
) -> tuple[Matrix, TripotentSplit]:
    """A tripotent with ``plus`` eigenvalues 1 and ``minus`` eigenvalues -1.

    Returns the tripotent together with the pair it was built from.
    """
    p1, p2 = random_orthogonal_idempotents(n, [plus, minus], seed, backend)
    return p1 - p2, TripotentSplit(p1, p2)


def random_rank_one_idempotent_pair(n: int, seed: int, backend: str = nm.EXACT) -> tuple[Matrix, Matrix]:
    p, q = random_orthogonal_idempotents(n, [1, 1], seed, backend)
    return p, q


def rank_one_tripotents_from_units(n: int, backend: str = nm.EXACT) -> list[Matrix]:
    """Rank-one idempotents built from matrix units.

    ``E_pp`` together with ``(e_p + e_q) (x) e_p = E_pp + E_qp`` and
    ``e_p (x) (e_p + e_q) = E_pp + E_pq`` for ``p != q``.
    """
    out = [nm.unit(n, p, p, backend) for p in range(n)]
    for p in range(n):
        for q in range(n):
            if p != q:
                out.append(nm.unit(n, p, p, backend) + nm.unit(n, q, p, backend))
                out.append(nm.unit(n, p, p, backend) + nm.unit(n, p, q, backend))
    return out


def random_unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)
