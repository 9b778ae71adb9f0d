"""Real-linear maps on ``M_n(C)`` and the canonical Jordan triple automorphisms.

A :class:`SuperMap` acts by ``Phi(A) = unvec(L vec(A) + K conj(vec(A)))``
with column-stacking ``vec``.  ``L`` carries the complex-linear part and
``K`` the conjugate-linear part.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from . import _polar
from . import numeric as nm
from .errors import SchemaError, ShapeMismatch, Singular
from .numeric import DEFAULT_TOL, EXACT, FLOAT, Matrix, TolerancePolicy


class Variant(str, Enum):
    STRAIGHT = "straight"
    TRANSPOSE = "transpose"


class ScalarAuto(str, Enum):
    ID = "id"
    CONJ = "conj"


def vec(a: Matrix) -> np.ndarray:
    """Column-stacking vectorization (entry ``(p, q)`` lands at ``q*n + p``)."""
    return a.data.ravel(order="F")


def unvec(v: np.ndarray, n: int, backend: str) -> Matrix:
    return Matrix._wrap(np.asarray(v).reshape((n, n), order="F").copy(), backend)


def _conj_array(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == object:
        out = np.empty(arr.shape, dtype=object)
        flat = out.reshape(-1)
        for k, x in enumerate(arr.reshape(-1)):
            flat[k] = x.conjugate()
        return out
    return np.conj(arr)


def transpose_permutation(n: int) -> np.ndarray:
    """Index map with ``vec(A^t) = vec(A)[perm]``."""
    j = np.arange(n * n)
    return (j % n) * n + j // n


@dataclass(frozen=True, eq=False)
class SuperMap:
    n: int
    L: Matrix
    K: Matrix
    _verdicts: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        m = self.n * self.n
        if self.L.shape != (m, m) or self.K.shape != (m, m):
            raise ShapeMismatch(f"L and K must be {m}x{m} for n={self.n}")
        if self.L.backend != self.K.backend:
            raise nm.BackendMismatch("L and K must share a backend")

    @property
    def backend(self) -> str:
        return self.L.backend

    def __eq__(self, other):
        if not isinstance(other, SuperMap):
            return NotImplemented
        return self.n == other.n and self.L == other.L and self.K == other.K

    __hash__ = None

    def __call__(self, a: Matrix) -> Matrix:
        return apply(self, a)

    def __neg__(self) -> "SuperMap":
        return SuperMap(self.n, -self.L, -self.K)

    def scaled(self, s) -> "SuperMap":
        return SuperMap(self.n, self.L * s, self.K * s)

    def __add__(self, other: "SuperMap") -> "SuperMap":
        return SuperMap(self.n, self.L + other.L, self.K + other.K)

    def to_backend(self, backend: str) -> "SuperMap":
        return SuperMap(self.n, self.L.to_backend(backend), self.K.to_backend(backend))

    def basis_images(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacks ``(L(E_k), K(E_k))`` over the column-major matrix units."""
        m = self.n * self.n
        shape = (m, self.n, self.n)
        ls = self.L.data.T.reshape(m, self.n, self.n).transpose(0, 2, 1).reshape(shape)
        ks = self.K.data.T.reshape(m, self.n, self.n).transpose(0, 2, 1).reshape(shape)
        return ls, ks


def apply(phi: SuperMap, a: Matrix) -> Matrix:
    if a.shape != (phi.n, phi.n):
        raise ShapeMismatch(f"expected {phi.n}x{phi.n} input, got {a.shape}")
    nm._check_backend(phi.L, a)
    v = vec(a)
    if phi.backend == FLOAT:
        out = phi.L.data @ v + phi.K.data @ np.conj(v)
        return unvec(out, phi.n, FLOAT)
    nz = [k for k, x in enumerate(v) if x]
    if not nz:
        return nm.zeros(phi.n, backend=EXACT)
    sub = v[nz]
    out = phi.L.data[:, nz] @ sub + phi.K.data[:, nz] @ _conj_array(sub)
    return unvec(out, phi.n, EXACT)


# -- elementary maps ---------------------------------------------------------


def _eye(m: int, backend: str) -> Matrix:
    return nm.identity(m, backend)


def identity_map(n: int, backend: str = EXACT) -> SuperMap:
    m = n * n
    return SuperMap(n, _eye(m, backend), nm.zeros(m, backend=backend))


def conjugation_map(n: int, backend: str = EXACT) -> SuperMap:
    m = n * n
    return SuperMap(n, nm.zeros(m, backend=backend), _eye(m, backend))


def transpose_map(n: int, backend: str = EXACT) -> SuperMap:
    return precompose_transpose(identity_map(n, backend))


def from_linear_function(f: Callable[[Matrix], Matrix], n: int, backend: str = EXACT) -> SuperMap:
    """SuperMap of a complex-linear function given by evaluation on matrix units."""
    return from_real_linear_function(f, n, backend, complex_linear=True)


def from_real_linear_function(
    f: Callable[[Matrix], Matrix], n: int, backend: str = EXACT, complex_linear: bool = False
) -> SuperMap:
    """Tabulate a real-linear function from its values on ``E_k`` and ``i E_k``.

    ``L_k = (f(E_k) - i f(i E_k)) / 2`` and ``K_k = (f(E_k) + i f(i E_k)) / 2``.
    The function is trusted to be real-linear; nothing here checks it.
    """
    m = n * n
    i_unit = nm.I_UNIT if backend == EXACT else 1j
    half = nm.GaussianRational(nm.Fraction(1, 2)) if backend == EXACT else 0.5
    lcols, kcols = [], []
    for k in range(m):
        e = nm.unit(n, k % n, k // n, backend)
        fe = vec(f(e))
        if complex_linear:
            lcols.append(fe)
            kcols.append(vec(nm.zeros(n, backend=backend)))
            continue
        fie = vec(f(e * i_unit)) * i_unit
        lcols.append((fe - fie) * half)
        kcols.append((fe + fie) * half)
    return SuperMap(n, _from_columns(lcols, backend), _from_columns(kcols, backend))


def _from_columns(cols: list[np.ndarray], backend: str) -> Matrix:
    arr = np.stack(cols, axis=1)
    if backend == FLOAT:
        arr = arr.astype(np.complex128)
    return Matrix._wrap(arr, backend)


def precompose_conj(phi: SuperMap) -> SuperMap:
    """``A -> phi(conj(A))``."""
    return SuperMap(phi.n, phi.K, phi.L)


def precompose_transpose(phi: SuperMap) -> SuperMap:
    """``A -> phi(A^t)``."""
    perm = transpose_permutation(phi.n)
    return SuperMap(
        phi.n,
        Matrix._wrap(phi.L.data[:, perm], phi.backend),
        Matrix._wrap(phi.K.data[:, perm], phi.backend),
    )


def compose(phi: SuperMap, psi: SuperMap) -> SuperMap:
    """``phi o psi``; two conjugate-linear parts combine into a linear one."""
    if phi.n != psi.n:
        raise ShapeMismatch("maps act on different dimensions")
    L = phi.L @ psi.L + phi.K @ nm.conj(psi.K)
    K = phi.L @ psi.K + phi.K @ nm.conj(psi.L)
    return SuperMap(phi.n, L, K)


def inverse_of(phi: SuperMap, tol: TolerancePolicy = DEFAULT_TOL) -> SuperMap:
    """Inverse of the real-linear action, via its ``2m x 2m`` real matrix."""
    m = phi.n * phi.n
    backend = phi.backend
    lr, li = _re_im(phi.L)
    kr, ki = _re_im(phi.K)
    real = np.block([[lr + kr, ki - li], [li + ki, lr - kr]])
    inv = nm.invert(Matrix._wrap(real, backend), tol).data
    a, b, c, d = inv[:m, :m], inv[:m, m:], inv[m:, :m], inv[m:, m:]
    half = nm.GaussianRational(nm.Fraction(1, 2)) if backend == EXACT else 0.5
    i_unit = nm.I_UNIT if backend == EXACT else 1j
    L = ((a + d) + (c - b) * i_unit) * half
    K = ((a - d) + (b + c) * i_unit) * half
    return SuperMap(phi.n, Matrix._wrap(L, backend), Matrix._wrap(K, backend))


def _re_im(a: Matrix) -> tuple[np.ndarray, np.ndarray]:
    if a.backend == FLOAT:
        return a.data.real.astype(np.complex128), a.data.imag.astype(np.complex128)
    re = np.empty(a.shape, dtype=object)
    im = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a.data):
        re[idx] = nm.GaussianRational(x.re)
        im[idx] = nm.GaussianRational(x.im)
    return re, im


# -- canonical forms ---------------------------------------------------------


@dataclass(frozen=True)
class CanonicalSpec:
    """Parameters of ``A -> c T sigma(A) T^{-1}``.

    ``sigma`` is the identity, transpose, entrywise conjugation or
    conjugate transpose according to ``variant`` and ``scalar_auto``.
    """

    c: int
    variant: Variant
    scalar_auto: ScalarAuto
    T: Matrix

    def __post_init__(self):
        if self.c not in (1, -1):
            raise ValueError("c must be +1 or -1")
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "scalar_auto", ScalarAuto(self.scalar_auto))
        if self.T.rows != self.T.cols:
            raise ShapeMismatch("T must be square")

    @property
    def n(self) -> int:
        return self.T.rows

    @property
    def flags(self) -> tuple[int, Variant, ScalarAuto]:
        return self.c, self.variant, self.scalar_auto

    def __eq__(self, other):
        if not isinstance(other, CanonicalSpec):
            return NotImplemented
        return self.flags == other.flags and self.T == other.T

    __hash__ = None


ALL_FLAGS = tuple(itertools.product((1, -1), tuple(Variant), tuple(ScalarAuto)))


def from_canonical(spec: CanonicalSpec, tol: TolerancePolicy = DEFAULT_TOL) -> SuperMap:
    t = spec.T
    n, backend = spec.n, t.backend
    t_inv = nm.invert(t, tol)  # raises Singular
    # vec(T X T^{-1}) = (T^{-t} kron T) vec(X)
    big = np.kron(t_inv.data.T, t.data) * spec.c
    if spec.variant is Variant.TRANSPOSE:
        big = big[:, transpose_permutation(n)]
    if backend == FLOAT:
        big = big.astype(np.complex128)
    part = Matrix._wrap(big, backend)
    zero = nm.zeros(n * n, backend=backend)
    if spec.scalar_auto is ScalarAuto.CONJ:
        return SuperMap(n, zero, part)
    return SuperMap(n, part, zero)


def random_canonical(n: int, seed: int, backend: str = EXACT) -> CanonicalSpec:
    rng = np.random.default_rng(seed)
    c, variant, auto = ALL_FLAGS[int(rng.integers(len(ALL_FLAGS)))]
    t = nm.random_invertible(n, int(rng.integers(2**32)), backend)
    return CanonicalSpec(c, variant, auto, t)


# -- polarized verification --------------------------------------------------


def _is_zero_stack(arr: np.ndarray) -> bool:
    return not np.any(arr != 0) if arr.dtype != object else not any(arr.reshape(-1))


def _lhs(lane, stack: np.ndarray, table, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=stack.dtype)
    us, ws, ts = table
    np.add.at(out, (us, ws), stack[ts])
    return out


def _split_triple_body(n: int, zero: dict[str, bool], symmetric: bool):
    """Checks for the split (linear / conjugate-linear) decomposition.

    Writing ``Phi = L + K o conj`` and rescaling the arguments by unit
    complex numbers separates the identity into one component per
    character.  The ``L L L`` and ``K K K`` components keep the left-hand
    side; every mixed component must vanish.  Each component is
    holomorphic in its arguments, so matrix units suffice.
    """
    m = n * n
    tables = _polar.unit_triple_table(n)
    if symmetric:
        patterns = list(itertools.product("LK", repeat=3))
    else:
        # A appears twice: the two outer slots carry the same letter unless
        # the pair is a mixed A/conj(A) term, which is an ordered sesquilinear check
        patterns = [("L", "L", "L"), ("K", "K", "K"), ("L", "K", "L"), ("K", "L", "K"),
                    ("L", "L", "K"), ("L", "K", "K")]

    def body(lane, st):
        for x, y, z in patterns:
            if zero[x] or zero[y] or zero[z]:
                continue
            for v in range(m):
                yv = st[y][v]
                fwd = _polar.triple_products(lane, st[x], yv, st[z])
                back = fwd if x == z else _polar.triple_products(lane, st[z], yv, st[x])
                rhs = fwd + _polar.swap(back)
                if x == y == z:
                    lhs = _lhs(lane, st[x], tables[v], rhs.shape)
                else:
                    lhs = np.zeros_like(rhs)
                if not lane.same(lhs, rhs):
                    return False
        return True

    return body


def _real_basis_images(phi: SuperMap) -> np.ndarray:
    """``Phi(E_k)`` followed by ``Phi(i E_k)`` for every matrix unit."""
    ls, ks = phi.basis_images()
    i_unit = nm.I_UNIT if phi.backend == EXACT else 1j
    return np.concatenate([ls + ks, (ls - ks) * i_unit], axis=0)


def _phase_index(m: int, j: int, t: np.ndarray) -> tuple[int, np.ndarray]:
    # Phi(i^j E_t) in terms of real-basis images: j=0 -> +Y_t, 1 -> +Y_{m+t}, 2 -> -Y_t, 3 -> -Y_{m+t}
    j %= 4
    return (1 if j < 2 else -1), t + (m if j % 2 else 0)


def _real_triple_body(n: int):
    m = n * n
    tables = _polar.unit_triple_table(n)

    def body(lane, st):
        ys = st["Y"]
        for jv in (0, 1):
            for v in range(m):
                yv = ys[jv * m + v]
                t1 = _polar.triple_products(lane, ys, yv, ys)
                rhs = t1 + _polar.swap(t1)
                lhs = np.zeros_like(rhs)
                us, ws, ts = tables[v]
                for ju in (0, 1):
                    for jw in (0, 1):
                        sign, idx = _phase_index(m, ju + jv + jw, ts)
                        np.add.at(lhs, (us + ju * m, ws + jw * m), ys[idx] * sign)
                if not lane.same(lhs, rhs):
                    return False
        return True

    return body


def _real_jordan_body(n: int):
    m = n * n
    us, vs, ts = _polar.unit_pair_table(n)

    def body(lane, st):
        ys = st["Y"]
        p = _polar.pair_products(lane, ys, ys)
        rhs = p + _polar.swap(p)
        lhs = np.zeros_like(rhs)
        for ju in (0, 1):
            for jv in (0, 1):
                sign, idx = _phase_index(m, ju + jv, ts)
                np.add.at(lhs, (us + ju * m, vs + jv * m), ys[idx] * sign)
        return lane.same(lhs, rhs)

    return body


def _cached(phi: SuperMap, key, compute: Callable[[], bool]) -> bool:
    if key not in phi._verdicts:
        phi._verdicts[key] = compute()
    return phi._verdicts[key]


def _split_check(phi: SuperMap, tol: TolerancePolicy, symmetric: bool) -> bool:
    ls, ks = phi.basis_images()
    zero = {"L": _is_zero_stack(ls), "K": _is_zero_stack(ks)}
    body = _split_triple_body(phi.n, zero, symmetric)
    return _polar.check({"L": ls, "K": ks}, phi.n, phi.backend, tol, 3, body)


def _real_check(phi: SuperMap, tol: TolerancePolicy) -> bool:
    ys = _real_basis_images(phi)
    return _polar.check({"Y": ys}, phi.n, phi.backend, tol, 3, _real_triple_body(phi.n))


def is_triple_morphism(phi: SuperMap, tol: TolerancePolicy = DEFAULT_TOL, method: str = "split") -> bool:
    """Decide ``Phi(ABA) = Phi(A) Phi(B) Phi(A)`` for all ``A, B``.

    ``method="real"`` polarizes over the ``2n^2`` real basis elements
    ``E_pq, i E_pq``; ``method="split"`` (default) checks the equivalent
    family of holomorphic identities over the ``n^2`` matrix units.  On the
    exact backend either answer is a proof.
    """
    if method == "real":
        return _cached(phi, ("triple", "real", tol), lambda: _real_check(phi, tol))
    if method != "split":
        raise ValueError(f"unknown method {method!r}")
    return _cached(phi, ("triple", "split", tol), lambda: _split_check(phi, tol, symmetric=False))


def is_sym_triple_morphism(phi: SuperMap, tol: TolerancePolicy = DEFAULT_TOL, method: str = "split") -> bool:
    """Decide ``Phi({ABC}) = {Phi(A) Phi(B) Phi(C)}`` with ``{ABC} = (ABC + CBA)/2``.

    The identity is real-trilinear, so basis triples decide it.
    """
    if method == "real":
        # on the real basis the polarized triple law and the symmetrized law
        # are the same family of equations
        return _cached(phi, ("sym", "real", tol), lambda: _real_check(phi, tol))
    if method != "split":
        raise ValueError(f"unknown method {method!r}")
    return _cached(phi, ("sym", "split", tol), lambda: _split_check(phi, tol, symmetric=True))


def satisfies_jordan_law(phi: SuperMap, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Decide ``Phi(AB + BA) = Phi(A) Phi(B) + Phi(B) Phi(A)`` on the real basis."""

    def compute():
        ys = _real_basis_images(phi)
        return _polar.check({"Y": ys}, phi.n, phi.backend, tol, 2, _real_jordan_body(phi.n))

    return _cached(phi, ("jordan", tol), compute)


def _float_parts(phi: SuperMap) -> tuple[np.ndarray, np.ndarray]:
    if phi.backend == FLOAT:
        return phi.L.data, phi.K.data
    return phi.L.to_backend(FLOAT).data, phi.K.to_backend(FLOAT).data


def apply_batch(phi: SuperMap, a: np.ndarray) -> np.ndarray:
    """Float evaluation of ``Phi`` on a stack ``(s, n, n)`` of complex matrices."""
    lf, kf = _float_parts(phi)
    s, n = a.shape[0], phi.n
    v = a.transpose(0, 2, 1).reshape(s, n * n)
    out = v @ lf.T + np.conj(v) @ kf.T
    return out.reshape(s, n, n).transpose(0, 2, 1)


def sampled_triple_residual(phi: SuperMap, samples: int, seed: int) -> float:
    """Largest relative violation of ``Phi(ABA) = Phi(A)Phi(B)Phi(A)`` over random pairs."""
    rng = np.random.default_rng(seed)
    n = phi.n
    a = rng.normal(size=(samples, n, n)) + 1j * rng.normal(size=(samples, n, n))
    b = rng.normal(size=(samples, n, n)) + 1j * rng.normal(size=(samples, n, n))
    pa, pb = apply_batch(phi, a), apply_batch(phi, b)
    lhs = apply_batch(phi, a @ b @ a)
    rhs = pa @ pb @ pa
    diff = np.max(np.abs(lhs - rhs), axis=(1, 2))
    ref = np.maximum(1.0, np.maximum(np.max(np.abs(lhs), axis=(1, 2)), np.max(np.abs(rhs), axis=(1, 2))))
    return float(np.max(diff / ref))


def sampled_triple_check(phi: SuperMap, samples: int, seed: int, rel_eps: float = 1e-9) -> bool:
    return sampled_triple_residual(phi, samples, seed) <= rel_eps


# -- JSON --------------------------------------------------------------------


def supermap_to_json(phi: SuperMap) -> dict:
    return {"n": phi.n, "L": nm.matrix_to_json(phi.L), "K": nm.matrix_to_json(phi.K)}


def supermap_from_json(doc) -> SuperMap:
    if not isinstance(doc, dict) or not {"n", "L", "K"} <= set(doc):
        raise SchemaError("SuperMap needs keys n, L, K")
    if not isinstance(doc["n"], int) or doc["n"] < 1:
        raise SchemaError("n must be a positive integer")
    try:
        return SuperMap(doc["n"], nm.matrix_from_json(doc["L"]), nm.matrix_from_json(doc["K"]))
    except (ShapeMismatch, nm.BackendMismatch) as exc:
        raise SchemaError(str(exc)) from exc


def spec_to_json(spec: CanonicalSpec) -> dict:
    return {
        "c": spec.c,
        "variant": spec.variant.value,
        "scalar_auto": spec.scalar_auto.value,
        "T": nm.matrix_to_json(spec.T),
    }


def spec_from_json(doc) -> CanonicalSpec:
    if not isinstance(doc, dict) or not {"c", "variant", "scalar_auto", "T"} <= set(doc):
        raise SchemaError("CanonicalSpec needs keys c, variant, scalar_auto, T")
    try:
        return CanonicalSpec(doc["c"], doc["variant"], doc["scalar_auto"], nm.matrix_from_json(doc["T"]))
    except (ValueError, ShapeMismatch) as exc:
        raise SchemaError(str(exc)) from exc


__all__ = [
    "ALL_FLAGS",
    "CanonicalSpec",
    "ScalarAuto",
    "Singular",
    "SuperMap",
    "Variant",
    "apply",
    "compose",
    "conjugation_map",
    "from_canonical",
    "identity_map",
    "inverse_of",
    "is_sym_triple_morphism",
    "is_triple_morphism",
    "random_canonical",
    "satisfies_jordan_law",
    "transpose_map",
    "unvec",
    "vec",
]
