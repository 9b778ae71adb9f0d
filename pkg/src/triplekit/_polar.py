"""Evaluation lanes for polarized identity checks.

An identity between matrix-valued polynomials in the basis images of a
map is checked either in ``complex128`` (one lane, tolerance based) or,
for the exact backend, in a set of residue fields.  Each prime
``p = 1 (mod 4)`` contributes two lanes, one per square root of ``-1``;
together they recover a Gaussian integer modulo ``p``.  Enough primes are
used that their product exceeds twice an a-priori bound on the cleared
integer residual, so agreement in every lane is a proof of equality.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .numeric import EXACT, TolerancePolicy

# residues stay below 2**21 so float64 matmul sums (n * p**2) are exact
_PRIME_CEILING = 1 << 21


@lru_cache(maxsize=None)
def _primes(count: int) -> tuple[int, ...]:
    out = []
    p = _PRIME_CEILING - 1
    while len(out) < count:
        if p % 4 == 1 and _is_prime(p):
            out.append(p)
        p -= 2 if p % 2 else 1
    return tuple(out)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in range(2, math.isqrt(p) + 1):
        if p % q == 0:
            return False
    return True


@lru_cache(maxsize=None)
def _sqrt_minus_one(p: int) -> int:
    for g in range(2, p):
        if pow(g, (p - 1) // 2, p) == p - 1:
            return pow(g, (p - 1) // 4, p)
    raise ValueError(f"{p} has no square root of -1")


class FloatLane:
    """Complex floating point evaluation with relative comparison."""

    def __init__(self, rel_eps: float):
        self.rel_eps = rel_eps
        self.worst = 0.0

    def mm(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a @ b

    def same(self, lhs, rhs) -> bool:
        lhs = np.asarray(lhs)
        rhs = np.asarray(rhs)
        diff = float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0
        ref = max(1.0, float(np.max(np.abs(lhs))) if lhs.size else 0.0, float(np.max(np.abs(rhs))) if rhs.size else 0.0)
        self.worst = max(self.worst, diff / ref)
        return diff <= self.rel_eps * ref


class ModularLane:
    """Arithmetic in ``Z/p`` after sending ``i`` to a fixed root of ``-1``."""

    def __init__(self, p: int, root: int):
        self.p = p
        self.root = root

    def mm(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.mod(a @ b, self.p)

    def same(self, lhs, rhs) -> bool:
        return bool(np.all(np.mod(np.asarray(lhs) - np.asarray(rhs), self.p) == 0))

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        p, s = self.p, self.root
        out = np.empty(arr.shape, dtype=np.float64)
        flat = out.reshape(-1)
        for k, x in enumerate(arr.reshape(-1)):
            a, b, d = x.parts
            flat[k] = (a + b * s) * pow(d, -1, p) % p
        return out


def _stack_bound(stacks: list[np.ndarray]) -> tuple[int, Fraction]:
    """Common denominator and entry-size bound (``|re| + |im|``) over exact stacks."""
    den, big = 1, Fraction(0)
    for arr in stacks:
        for x in arr.reshape(-1):
            a, b, d = x.parts
            den = math.lcm(den, d)
            v = Fraction(abs(a) + abs(b), d)
            if v > big:
                big = v
    return den, big


def lanes(
    stacks: dict[str, np.ndarray], n: int, backend: str, tol: TolerancePolicy, degree: int
) -> Iterator[tuple[object, dict[str, np.ndarray]]]:
    """Yield ``(lane, converted_stacks)`` pairs covering the identity check.

    ``degree`` is the largest number of basis images multiplied together in
    one term.  Every identity is assumed to carry at most four terms per
    entry, each of coefficient modulus at most one, which fixes the bound.
    """
    if backend != EXACT:
        yield FloatLane(tol.rel_eps), {k: np.asarray(v, dtype=np.complex128) for k, v in stacks.items()}
        return
    den, big = _stack_bound(list(stacks.values()))
    bound = den**degree * 4 * (big + n ** (degree - 1) * big**degree)
    need = 2 * math.ceil(bound) + 1
    covered, count = 1, 0
    while covered <= need:
        count += 1
        p = _primes(count)[-1]
        if den % p == 0:
            continue
        covered *= p
        for root in (_sqrt_minus_one(p), p - _sqrt_minus_one(p)):
            lane = ModularLane(p, root)
            yield lane, {k: lane.reduce(v) for k, v in stacks.items()}


def check(
    stacks: dict[str, np.ndarray],
    n: int,
    backend: str,
    tol: TolerancePolicy,
    degree: int,
    body: Callable[[object, dict[str, np.ndarray]], bool],
) -> bool:
    return all(body(lane, conv) for lane, conv in lanes(stacks, n, backend, tol, degree))


def triple_products(lane, x: np.ndarray, yv: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``out[u, w] = x[u] @ yv @ z[w]`` for stacks ``x``, ``z`` of shape ``(m, n, n)``."""
    m, n, _ = x.shape
    m2 = z.shape[0]
    xy = lane.mm(x, yv).reshape(m * n, n)
    zz = z.transpose(1, 0, 2).reshape(n, m2 * n)
    return lane.mm(xy, zz).reshape(m, n, m2, n).transpose(0, 2, 1, 3)


def pair_products(lane, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``out[u, w] = x[u] @ z[w]``."""
    m, n, _ = x.shape
    m2 = z.shape[0]
    zz = z.transpose(1, 0, 2).reshape(n, m2 * n)
    return lane.mm(x.reshape(m * n, n), zz).reshape(m, n, m2, n).transpose(0, 2, 1, 3)


def swap(t: np.ndarray) -> np.ndarray:
    return t.transpose(1, 0, 2, 3)


@lru_cache(maxsize=None)
def unit_triple_table(n: int) -> tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]:
    """For each middle unit ``V = E_v``: indices ``(u, w, t)`` with a nonzero term.

    Matrix units are indexed column-major (``E_pq`` has index ``q*n + p``).
    Rows list every ``(U, W)`` where ``UVW = E_t`` or ``WVU = E_t``.
    """
    out = []
    for v in range(n * n):
        c, d = v % n, v // n
        us, ws, ts = [], [], []
        for a in range(n):
            for f in range(n):
                us.append(c * n + a)  # U = E_ac
                ws.append(f * n + d)  # W = E_df
                ts.append(f * n + a)  # UVW = E_af
        for e in range(n):
            for b in range(n):
                us.append(b * n + d)  # U = E_db
                ws.append(c * n + e)  # W = E_ec
                ts.append(b * n + e)  # WVU = E_eb
        out.append((np.array(us), np.array(ws), np.array(ts)))
    return tuple(out)


@lru_cache(maxsize=None)
def unit_pair_table(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Indices ``(u, v, t)`` with ``UV = E_t`` or ``VU = E_t``."""
    us, vs, ts = [], [], []
    for a in range(n):
        for b in range(n):
            for d in range(n):
                u, v, t = b * n + a, d * n + b, d * n + a
                us.append(u)
                vs.append(v)
                ts.append(t)  # UV with U = E_ab, V = E_bd
                us.append(v)
                vs.append(u)
                ts.append(t)  # VU with V = E_ab, U = E_bd
    return np.array(us), np.array(vs), np.array(ts)
