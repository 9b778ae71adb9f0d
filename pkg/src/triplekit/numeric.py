"""Scalar and matrix arithmetic over two backends.

The ``exact`` backend stores Gaussian rationals (complex numbers with
rational real and imaginary parts) and is used to certify identities.
The ``float`` backend stores ``complex128`` entries and compares under a
:class:`TolerancePolicy`.  The two never mix implicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import BackendMismatch, GenerationFailed, SchemaError, ShapeMismatch, Singular

EXACT = "exact"
FLOAT = "float"
BACKENDS = (EXACT, FLOAT)


class GaussianRational:
    """Exact complex number ``(a + b i) / d`` with integer ``a, b`` and ``d > 0``.

    The triple is kept reduced (``gcd(a, b, d) == 1``), so the derived
    components :attr:`re` and :attr:`im` are fractions in lowest terms.

    >>> z = GaussianRational(1, Fraction(1, 2))
    >>> z * z
    GaussianRational('3/4', '1')
    """

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, re=0, im=0):
        re = _as_fraction(re)
        im = _as_fraction(im)
        d = re.denominator * im.denominator // math.gcd(re.denominator, im.denominator)
        self._set(re.numerator * (d // re.denominator), im.numerator * (d // im.denominator), d)

    def _set(self, a: int, b: int, d: int) -> None:
        g = math.gcd(a, b, d)
        if g != 1:
            a //= g
            b //= g
            d //= g
        self._a = a
        self._b = b
        self._d = d

    @classmethod
    def _raw(cls, a: int, b: int, d: int) -> "GaussianRational":
        obj = object.__new__(cls)
        obj._set(a, b, d)
        return obj

    @classmethod
    def from_complex(cls, z: complex) -> "GaussianRational":
        """Exact rational value of a binary floating point complex number."""
        z = complex(z)
        return cls(Fraction(z.real), Fraction(z.imag))

    @property
    def re(self) -> Fraction:
        return Fraction(self._a, self._d)

    @property
    def im(self) -> Fraction:
        return Fraction(self._b, self._d)

    @property
    def parts(self) -> tuple[int, int, int]:
        """The reduced integer triple ``(a, b, d)``."""
        return self._a, self._b, self._d

    def conjugate(self) -> "GaussianRational":
        obj = object.__new__(GaussianRational)
        obj._a, obj._b, obj._d = self._a, -self._b, self._d
        return obj

    def abs2(self) -> Fraction:
        return Fraction(self._a * self._a + self._b * self._b, self._d * self._d)

    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if self._d == o._d:
            return GaussianRational._raw(self._a + o._a, self._b + o._b, self._d)
        return GaussianRational._raw(
            self._a * o._d + o._a * self._d, self._b * o._d + o._b * self._d, self._d * o._d
        )

    __radd__ = __add__

    def __neg__(self):
        obj = object.__new__(GaussianRational)
        obj._a, obj._b, obj._d = -self._a, -self._b, self._d
        return obj

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        a, b, c, e = self._a, self._b, o._a, o._b
        return GaussianRational._raw(a * c - b * e, a * e + b * c, self._d * o._d)

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        n = self._a * self._a + self._b * self._b
        if n == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational._raw(self._a * self._d, -self._b * self._d, n)

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self._a == other._a and self._b == other._b and self._d == other._d
        if isinstance(other, (int, Rational)):
            return self._b == 0 and Fraction(self._a, self._d) == other
        return NotImplemented

    def __hash__(self):
        if self._b == 0:
            return hash(Fraction(self._a, self._d))
        return hash((self._a, self._b, self._d))

    def __bool__(self):
        return self._a != 0 or self._b != 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({_frac_str(self.re)!r}, {_frac_str(self.im)!r})"

    def __str__(self):
        if self._b == 0:
            return _frac_str(self.re)
        if self._a == 0:
            return f"{_frac_str(self.im)}i"
        sign = "+" if self._b > 0 else "-"
        return f"{_frac_str(self.re)}{sign}{_frac_str(abs(self.im))}i"


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _as_fraction(x) -> Fraction:
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, np.integer):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, complex, np.floating, np.complexfloating)):
        raise BackendMismatch(f"refusing to mix floating value {x!r} into the exact backend")
    raise TypeError(f"cannot build a rational from {type(x).__name__}")


def _coerce(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Rational, np.integer)):
        return GaussianRational(x)
    if isinstance(x, (float, complex, np.floating, np.complexfloating)):
        raise BackendMismatch(f"cannot combine exact scalar with floating value {x!r}")
    return NotImplemented


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I_UNIT = GaussianRational(0, 1)

Scalar = Union[GaussianRational, complex]


@dataclass(frozen=True)
class TolerancePolicy:
    """Comparison thresholds for the float backend (ignored by the exact one)."""

    rel_eps: float = 1e-9
    rank_eps: float = 1e-9

    def __post_init__(self):
        if not (self.rel_eps > 0 and self.rank_eps > 0):
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = TolerancePolicy()


def scalar_backend(x) -> str:
    if isinstance(x, GaussianRational):
        return EXACT
    if isinstance(x, (float, complex, np.floating, np.complexfloating)):
        return FLOAT
    if isinstance(x, (int, Rational, np.integer)):
        return EXACT
    raise TypeError(f"not a scalar: {x!r}")


def to_scalar(x, backend: str) -> Scalar:
    if backend == EXACT:
        if isinstance(x, GaussianRational):
            return x
        return GaussianRational(x)  # floats raise BackendMismatch; convert with from_complex
    return complex(x)


class Matrix:
    """Immutable dense complex matrix tagged with its backend.

    Exact matrices hold a numpy object array of :class:`GaussianRational`;
    float matrices hold a ``complex128`` array.
    """

    __slots__ = ("_data", "backend")

    def __init__(self, rows, backend: str | None = None):
        if isinstance(rows, Matrix):
            arr, src = rows._data, rows.backend
        else:
            arr, src = _build_array(rows)
        backend = backend or src
        if backend not in BACKENDS:
            raise ValueError(f"unknown backend {backend!r}")
        if backend != src:
            arr = _convert(arr, backend)
        self._init(arr, backend)

    def _init(self, arr: np.ndarray, backend: str) -> None:
        if arr.ndim != 2:
            raise ShapeMismatch("matrix data must be two dimensional")
        arr.flags.writeable = False
        self._data = arr
        self.backend = backend

    @classmethod
    def _wrap(cls, arr: np.ndarray, backend: str) -> "Matrix":
        obj = object.__new__(cls)
        obj._init(arr, backend)
        return obj

    @property
    def data(self) -> np.ndarray:
        """Read-only view of the underlying numpy array."""
        return self._data

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def exact(self) -> bool:
        return self.backend == EXACT

    def entries(self) -> list:
        return list(self._data.ravel())

    def __getitem__(self, idx):
        return self._data[idx]

    def __add__(self, other: "Matrix") -> "Matrix":
        return mat_add(self, other)

    def __sub__(self, other: "Matrix") -> "Matrix":
        _check_same(self, other)
        return Matrix._wrap(self._data - other._data, self.backend)

    def __neg__(self) -> "Matrix":
        return Matrix._wrap(-self._data, self.backend)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def __mul__(self, s) -> "Matrix":
        if isinstance(s, Matrix):
            return NotImplemented
        return scale(s, self)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.backend == other.backend
            and self.shape == other.shape
            and bool(np.all(self._data == other._data))
        )

    __hash__ = None

    def transpose(self) -> "Matrix":
        return transpose(self)

    def conj(self) -> "Matrix":
        return conj(self)

    def conj_transpose(self) -> "Matrix":
        return conj_transpose(self)

    def to_backend(self, backend: str) -> "Matrix":
        return Matrix(self, backend)

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in row) for row in self._data)
        return f"Matrix[{self.backend}]({body})"


def _build_array(rows) -> tuple[np.ndarray, str]:
    if isinstance(rows, np.ndarray) and rows.dtype != object:
        return np.array(rows, dtype=np.complex128), FLOAT
    rows = [list(r) for r in rows]
    flat = [x for r in rows for x in r]
    if any(isinstance(x, (float, complex, np.floating, np.complexfloating)) for x in flat):
        return np.array(rows, dtype=np.complex128), FLOAT
    arr = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, r in enumerate(rows):
        if len(r) != arr.shape[1]:
            raise ShapeMismatch("ragged matrix rows")
        for j, x in enumerate(r):
            arr[i, j] = to_scalar(x, EXACT)
    return arr, EXACT


def _convert(arr: np.ndarray, backend: str) -> np.ndarray:
    if backend == FLOAT:
        return np.array([[complex(x) for x in r] for r in arr], dtype=np.complex128).reshape(arr.shape)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = GaussianRational.from_complex(x)
    return out


def _check_backend(*ms: Matrix) -> None:
    b = ms[0].backend
    for m in ms[1:]:
        if m.backend != b:
            raise BackendMismatch(f"backend {m.backend!r} mixed with {b!r}")


def _check_same(a: Matrix, b: Matrix) -> None:
    _check_backend(a, b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes {a.shape} and {b.shape} differ")


def zeros(rows: int, cols: int | None = None, backend: str = EXACT) -> Matrix:
    cols = rows if cols is None else cols
    if backend == EXACT:
        arr = np.full((rows, cols), ZERO, dtype=object)
    else:
        arr = np.zeros((rows, cols), dtype=np.complex128)
    return Matrix._wrap(arr, backend)


def identity(n: int, backend: str = EXACT) -> Matrix:
    return diag([1] * n, backend)


def diag(values: Sequence, backend: str = EXACT) -> Matrix:
    n = len(values)
    if backend == EXACT:
        arr = np.full((n, n), ZERO, dtype=object)
    else:
        arr = np.zeros((n, n), dtype=np.complex128)
    for i, v in enumerate(values):
        arr[i, i] = to_scalar(v, backend)
    return Matrix._wrap(arr, backend)


def unit(n: int, p: int, q: int, backend: str = EXACT) -> Matrix:
    """Matrix unit ``E_pq`` (zero-based indices) in ``M_n``."""
    if backend == EXACT:
        arr = np.full((n, n), ZERO, dtype=object)
        arr[p, q] = ONE
    else:
        arr = np.zeros((n, n), dtype=np.complex128)
        arr[p, q] = 1.0
    return Matrix._wrap(arr, backend)


def column(values: Iterable, backend: str = EXACT) -> Matrix:
    return Matrix([[v] for v in values], backend)


def row(values: Iterable, backend: str = EXACT) -> Matrix:
    return Matrix([list(values)], backend)


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    _check_same(a, b)
    return Matrix._wrap(a._data + b._data, a.backend)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    _check_backend(a, b)
    if a.cols != b.rows:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    if a.exact and (a.cols == 0):
        return zeros(a.rows, b.cols, EXACT)
    return Matrix._wrap(a._data @ b._data, a.backend)


def scale(s, a: Matrix) -> Matrix:
    if a.exact:
        if scalar_backend(s) != EXACT:
            raise BackendMismatch("floating scalar applied to an exact matrix")
        return Matrix._wrap(a._data * _coerce(s), EXACT)
    if isinstance(s, GaussianRational):
        raise BackendMismatch("exact scalar applied to a float matrix")
    return Matrix._wrap(a._data * complex(s), FLOAT)


def transpose(a: Matrix) -> Matrix:
    return Matrix._wrap(a._data.T.copy(), a.backend)


def conj(a: Matrix) -> Matrix:
    if a.exact:
        out = np.empty(a.shape, dtype=object)
        for idx, x in np.ndenumerate(a._data):
            out[idx] = x.conjugate()
        return Matrix._wrap(out, EXACT)
    return Matrix._wrap(np.conj(a._data), FLOAT)


def conj_transpose(a: Matrix) -> Matrix:
    return transpose(conj(a))


def max_abs(a: Matrix) -> float:
    """Largest entry modulus, as a float (exact entries are converted)."""
    if a._data.size == 0:
        return 0.0
    if a.exact:
        return max(math.sqrt(float(x.abs2())) for x in a._data.ravel())
    return float(np.max(np.abs(a._data)))


def is_zero(a: Matrix, tol: TolerancePolicy = DEFAULT_TOL, scale_ref: float = 1.0) -> bool:
    """Exact zero test, or ``max|a| <= rel_eps * max(1, scale_ref)`` on floats."""
    if a.exact:
        return not any(a._data.ravel())
    return max_abs(a) <= tol.rel_eps * max(1.0, scale_ref)


def equal(a: Matrix, b: Matrix, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Backend-aware equality: bit-exact, or relative max-norm comparison."""
    _check_same(a, b)
    if a.exact:
        return a == b
    return is_zero(a - b, tol, max(max_abs(a), max_abs(b)))


def rank(a: Matrix, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    if a.exact:
        return _rank_bareiss(a)
    return _rank_float(a._data, tol.rank_eps)


def _gaussian_integer_rows(a: Matrix) -> list[list[GaussianRational]]:
    out = []
    for r in a._data:
        d = math.lcm(*(x.parts[2] for x in r)) if len(r) else 1
        out.append([x * d for x in r])
    return out


def _rank_bareiss(a: Matrix) -> int:
    # fraction-free elimination over the Gaussian integers; every division is exact
    m = _gaussian_integer_rows(a)
    nr, nc = a.shape
    r, prev = 0, ONE
    for c in range(nc):
        if r == nr:
            break
        piv = next((i for i in range(r, nr) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        for i in range(r + 1, nr):
            mi = m[i]
            f = mi[c]
            for j in range(c + 1, nc):
                mi[j] = (mi[j] * p - f * m[r][j]) / prev
            mi[c] = ZERO
        prev = p
        r += 1
    return r


def _rank_float(arr: np.ndarray, rank_eps: float) -> int:
    m = np.array(arr, dtype=np.complex128)
    if m.size == 0:
        return 0
    thresh = rank_eps * float(np.max(np.abs(m)))
    if thresh == 0.0:
        return 0
    nr, nc = m.shape
    r = 0
    for c in range(nc):
        if r == nr:
            break
        i = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[i, c]) <= thresh:
            continue
        m[[r, i]] = m[[i, r]]
        m[r + 1 :, c:] -= np.outer(m[r + 1 :, c] / m[r, c], m[r, c:])
        r += 1
    return r


def invert(a: Matrix, tol: TolerancePolicy = DEFAULT_TOL) -> Matrix:
    if a.rows != a.cols:
        raise ShapeMismatch("only square matrices can be inverted")
    if a.exact:
        return _invert_exact(a)
    n = a.rows
    if _rank_float(a._data, tol.rank_eps) < n:
        raise Singular("matrix is numerically singular")
    b = np.linalg.inv(a._data)
    resid = float(np.max(np.abs(a._data @ b - np.eye(n)))) if n else 0.0
    bound = tol.rel_eps * max(1.0, n * float(np.max(np.abs(a._data))) * float(np.max(np.abs(b))))
    if resid > bound:
        raise Singular(f"inverse residual {resid:.3e} exceeds {bound:.3e}")
    return Matrix._wrap(b, FLOAT)


def _invert_exact(a: Matrix) -> Matrix:
    n = a.rows
    m = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(a._data)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            raise Singular("matrix is singular")
        m[c], m[piv] = m[piv], m[c]
        inv = m[c][c].inverse()
        m[c] = [x * inv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        out[i, :] = m[i][n:]
    return Matrix._wrap(out, EXACT)


def random_invertible(
    n: int, seed: int, backend: str = EXACT, max_attempts: int = 100, entry_bound: int = 2
) -> Matrix:
    """Seed-deterministic random invertible ``n x n`` matrix.

    Exact draws use Gaussian integers with components in
    ``[-entry_bound, entry_bound]``; float draws are uniform on the unit
    square and rejected when the condition number exceeds ``1e4``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        if backend == EXACT:
            parts = rng.integers(-entry_bound, entry_bound + 1, size=(n, n, 2))
            arr = np.empty((n, n), dtype=object)
            for i in range(n):
                for j in range(n):
                    arr[i, j] = GaussianRational._raw(int(parts[i, j, 0]), int(parts[i, j, 1]), 1)
            m = Matrix._wrap(arr, EXACT)
            if _rank_bareiss(m) == n:
                return m
        else:
            arr = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
            if np.linalg.cond(arr) < 1e4:
                return Matrix._wrap(arr, FLOAT)
    raise GenerationFailed(f"no invertible {n}x{n} draw in {max_attempts} attempts")


def random_matrix(n: int, rng: np.random.Generator, backend: str = EXACT, entry_bound: int = 3) -> Matrix:
    """Unconstrained random square matrix drawn from ``rng``."""
    if backend == EXACT:
        parts = rng.integers(-entry_bound, entry_bound + 1, size=(n, n, 2))
        arr = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                arr[i, j] = GaussianRational._raw(int(parts[i, j, 0]), int(parts[i, j, 1]), 1)
        return Matrix._wrap(arr, EXACT)
    return Matrix._wrap(rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n)), FLOAT)


def random_scalar(rng: np.random.Generator, backend: str = EXACT, bound: int = 5) -> Scalar:
    if backend == EXACT:
        a, b = rng.integers(-bound, bound + 1, size=2)
        d = int(rng.integers(1, bound + 1))
        return GaussianRational._raw(int(a), int(b), d)
    return complex(rng.normal(), rng.normal())


# -- JSON encoding -----------------------------------------------------------


def scalar_to_json(x: Scalar) -> list:
    if isinstance(x, GaussianRational):
        re, im = x.re, x.im
        return [f"{re.numerator}/{re.denominator}", f"{im.numerator}/{im.denominator}"]
    x = complex(x)
    return [x.real, x.imag]


def scalar_from_json(v, backend: str) -> Scalar:
    if not (isinstance(v, list) and len(v) == 2):
        raise SchemaError(f"scalar must be a [re, im] pair, got {v!r}")
    if backend == EXACT:
        if not all(isinstance(p, str) for p in v):
            raise SchemaError("exact entries must be strings of the form 'p/q'")
        try:
            return GaussianRational(Fraction(v[0]), Fraction(v[1]))
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad rational in {v!r}") from exc
    if not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in v):
        raise SchemaError("float entries must be numbers")
    return complex(float(v[0]), float(v[1]))


def matrix_to_json(a: Matrix) -> dict:
    return {
        "backend": a.backend,
        "rows": a.rows,
        "cols": a.cols,
        "entries": [scalar_to_json(x) for x in a._data.ravel()],
    }


def matrix_from_json(doc) -> Matrix:
    if not isinstance(doc, dict):
        raise SchemaError("matrix must be a JSON object")
    try:
        backend, rows, cols, entries = doc["backend"], doc["rows"], doc["cols"], doc["entries"]
    except KeyError as exc:
        raise SchemaError(f"matrix missing key {exc}") from exc
    if backend not in BACKENDS:
        raise SchemaError(f"unknown backend {backend!r}")
    if not (isinstance(rows, int) and isinstance(cols, int) and rows >= 0 and cols >= 0):
        raise SchemaError("rows/cols must be non-negative integers")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise SchemaError("entries length must equal rows * cols")
    vals = [scalar_from_json(v, backend) for v in entries]
    if backend == EXACT:
        arr = np.empty((rows, cols), dtype=object)
        for k, v in enumerate(vals):
            arr[k // cols, k % cols] = v
    else:
        arr = np.array(vals, dtype=np.complex128).reshape(rows, cols)
    return Matrix._wrap(arr, backend)
