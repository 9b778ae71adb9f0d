"""Recovery of canonical parameters from a Jordan triple automorphism."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numeric as nm
from .errors import (
    DichotomyViolation,
    InconsistentH,
    NotUnitalSign,
    RecoveryFailure,
    Singular,
    UnsupportedScalarAuto,
)
from .numeric import DEFAULT_TOL, EXACT, Matrix, TolerancePolicy
from .supermaps import (
    CanonicalSpec,
    ScalarAuto,
    SuperMap,
    Variant,
    apply,
    from_canonical,
    precompose_conj,
    precompose_transpose,
    spec_to_json,
)


@dataclass
class ClassifyReport:
    spec: CanonicalSpec
    residual: float
    steps: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"spec": spec_to_json(self.spec), "residual": self.residual, "steps": list(self.steps)}


def _i(backend: str):
    return nm.I_UNIT if backend == EXACT else 1j


def _pivot(a: Matrix) -> tuple[int, int] | None:
    """Position of the first nonzero entry (exact) or the largest one (float)."""
    if a.exact:
        for idx, x in np.ndenumerate(a.data):
            if x:
                return idx
        return None
    idx = np.unravel_index(int(np.argmax(np.abs(a.data))), a.shape)
    return idx if abs(a.data[idx]) > 0 else None


def _unit_images(psi: SuperMap) -> list[list[Matrix]]:
    """``out[p][q] = psi(E_pq)``."""
    ls, ks = psi.basis_images()
    n = psi.n
    return [[Matrix._wrap(ls[q * n + p] + ks[q * n + p], psi.backend) for q in range(n)] for p in range(n)]


def _chain_law(img: list[list[Matrix]], tol: TolerancePolicy, anti: bool) -> bool:
    # E_ab E_bc = E_ac; products with mismatched inner index vanish and are
    # implied by these for bijective maps
    n = len(img)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                prod = img[b][c] @ img[a][b] if anti else img[a][b] @ img[b][c]
                if not nm.equal(prod, img[a][c], tol):
                    return False
    return True


def normalize_T(t: Matrix) -> Matrix:
    """Scale ``T`` so its first nonzero entry (row-major) is 1."""
    for x in t.data.ravel():
        if (x != 0) if t.exact else abs(x) > 0:
            return t * (x.inverse() if t.exact else 1 / x)
    raise Singular("T is zero")


def classify(phi: SuperMap, tol: TolerancePolicy = DEFAULT_TOL) -> ClassifyReport:
    """Recover ``(c, variant, scalar_auto, T)`` with ``phi = from_canonical(spec)``.

    The sign comes from ``phi(I)``, the scalar automorphism from
    ``phi(iI)``, the variant from the multiplicative or anti-multiplicative
    law on matrix-unit chains, and ``T`` column by column from
    ``psi(E_j1) v`` with ``v`` in the range of ``psi(E_11)``.  The final
    comparison against the rebuilt map makes the result self-certifying.
    """
    n, backend = phi.n, phi.backend
    steps: list[str] = []
    eye = nm.identity(n, backend)

    d = apply(phi, eye)
    if nm.equal(d, eye, tol):
        c = 1
    elif nm.equal(d, -eye, tol):
        c = -1
    else:
        raise NotUnitalSign("phi(I) is not +I or -I")
    steps.append(f"sign: phi(I) = {'+' if c == 1 else '-'}I, c = {c}")
    psi = phi if c == 1 else -phi

    iu = _i(backend)
    s = apply(psi, eye * iu)
    if nm.equal(s, eye * iu, tol):
        auto = ScalarAuto.ID
        steps.append("scalar_auto: c*phi(iI) = iI, h(i) = i -> id")
    elif nm.equal(s, eye * (-iu), tol):
        auto = ScalarAuto.CONJ
        psi = precompose_conj(psi)
        steps.append("scalar_auto: c*phi(iI) = -iI, h(i) = -i -> conj")
    else:
        raise UnsupportedScalarAuto("c*phi(iI) is not +-iI")

    img = _unit_images(psi)
    if _chain_law(img, tol, anti=False):
        variant = Variant.STRAIGHT
        steps.append("variant: psi(E_ab)psi(E_bc) = psi(E_ac) on all chains -> straight")
    elif _chain_law(img, tol, anti=True):
        variant = Variant.TRANSPOSE
        psi = precompose_transpose(psi)
        img = _unit_images(psi)
        steps.append("variant: psi(E_bc)psi(E_ab) = psi(E_ac) on all chains -> transpose")
    else:
        raise DichotomyViolation("neither multiplicative nor anti-multiplicative on matrix units")

    p = img[0][0]
    piv = _pivot(p)
    if piv is None:
        raise RecoveryFailure("psi(E_11) vanishes")
    if p.exact:
        col = piv[1]
    else:
        col = int(np.argmax(np.linalg.norm(p.data, axis=0)))
    v = Matrix._wrap(p.data[:, col : col + 1].copy(), backend)
    t = Matrix._wrap(np.concatenate([(img[j][0] @ v).data for j in range(n)], axis=1), backend)
    if nm.rank(t, tol) < n:
        raise Singular("recovered T is singular")
    for a in range(n):
        for b in range(n):
            if not nm.equal(img[a][b] @ t, t @ nm.unit(n, a, b, backend), tol):
                raise RecoveryFailure(f"psi(E_{a + 1}{b + 1}) T != T E_{a + 1}{b + 1}")
    steps.append(f"recovery: T built from psi(E_j1) v with v = column {col + 1} of psi(E_11)")
    t = normalize_T(t)
    spec = CanonicalSpec(c, variant, auto, t)

    rebuilt = from_canonical(spec, tol)
    dl, dk = rebuilt.L - phi.L, rebuilt.K - phi.K
    if backend == EXACT:
        residual = 0.0 if nm.is_zero(dl) and nm.is_zero(dk) else max(nm.max_abs(dl), nm.max_abs(dk))
        ok = residual == 0.0
    else:
        residual = max(nm.max_abs(dl), nm.max_abs(dk))
        scale = max(nm.max_abs(phi.L), nm.max_abs(phi.K))
        ok = residual <= tol.rel_eps * max(1.0, scale)
    if not ok:
        raise RecoveryFailure(f"rebuilt map deviates from input by {residual:.3e}")
    steps.append(f"residual: {residual!r}")
    return ClassifyReport(spec, residual, steps)


def specs_equivalent(s1: CanonicalSpec, s2: CanonicalSpec, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Same flags and ``T1 = lambda T2`` for a nonzero scalar ``lambda``."""
    if s1.n != s2.n or s1.flags != s2.flags:
        return False
    nm._check_backend(s1.T, s2.T)
    piv = _pivot(s2.T)
    if piv is None or _pivot(s1.T) is None:
        return False
    ratio = s1.T.data[piv] / s2.T.data[piv]
    if ratio == 0:
        return False
    return nm.equal(s1.T, s2.T * ratio, tol)


def _h_probes(n: int, backend: str) -> list[Matrix]:
    probes = [nm.unit(n, 0, 0, backend)]
    if n >= 2:
        probes.append(nm.unit(n, 1, 1, backend))
        probes.append(nm.unit(n, 0, 0, backend) + nm.unit(n, 1, 0, backend))  # (e1 + e2) (x) e1
    return probes


def extract_h(phi: SuperMap, lam, tol: TolerancePolicy = DEFAULT_TOL):
    """The scalar ``h(lam)`` with ``phi(lam P) = h(lam) phi(P)`` for rank-one tripotents ``P``.

    Evaluated on ``E_11`` and cross-checked on ``E_22`` and ``E_11 + E_21``;
    disagreement between probes raises :class:`InconsistentH`.
    """
    backend = phi.backend
    lam = nm._coerce(lam) if backend == EXACT else complex(lam)
    values = []
    for p in _h_probes(phi.n, backend):
        base = apply(phi, p)
        image = apply(phi, p * lam)
        piv = _pivot(base)
        if piv is None:
            raise InconsistentH("phi kills a rank-one tripotent")
        h = image.data[piv] / base.data[piv]
        if not nm.equal(image, base * h, tol):
            raise InconsistentH("phi(lam P) is not a multiple of phi(P)")
        values.append(h)
    first = values[0]
    for h in values[1:]:
        if backend == EXACT:
            same = h == first
        else:
            same = abs(h - first) <= tol.rel_eps * max(1.0, abs(first))
        if not same:
            raise InconsistentH(f"h depends on the probe: {first} vs {h}")
    return first
