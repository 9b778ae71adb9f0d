"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import contextlib
import io
import json
import time

import numpy as np
import pytest

from triplekit import jordan
from triplekit import numeric as nm
from triplekit import prooflab as pl
from triplekit.canonical import classify, extract_h, specs_equivalent
from triplekit.cli import run
from triplekit.numeric import EXACT, FLOAT, GaussianRational, Matrix
from triplekit.supermaps import (
    ALL_FLAGS,
    CanonicalSpec,
    ScalarAuto,
    SuperMap,
    apply,
    from_canonical,
    from_linear_function,
    identity_map,
    is_sym_triple_morphism,
    is_triple_morphism,
    random_canonical,
    spec_from_json,
    supermap_from_json,
    supermap_to_json,
)

pytestmark = pytest.mark.acceptance


_CAPTURE: dict = {}


def report(label: str, ok: bool, detail: str) -> None:
    """Print the verdict line past pytest's output capture."""
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    capsys = _CAPTURE.get("capsys")
    if capsys is None:
        print(line)
        return
    with capsys.disabled():
        print("\n" + line)


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    _CAPTURE["capsys"] = capsys
    yield
    _CAPTURE.pop("capsys", None)


def test_ac01_canonical_form_law():
    start = time.perf_counter()
    failures = []
    count = 0
    for flags in ALL_FLAGS:
        for n in range(1, 6):
            for k in range(10):
                spec = CanonicalSpec(*flags, nm.random_invertible(n, 1000 * n + k))
                count += 1
                if not is_triple_morphism(from_canonical(spec)):
                    failures.append((flags, n, k))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 30
    report("AC1 canonical-form law", ok, f"{count - len(failures)}/{count} exact verifications in {elapsed:.1f}s (budget 30s)")
    assert ok


def test_ac02_round_trip():
    start = time.perf_counter()
    bad = []
    worst_float = 0.0
    total = 0
    for backend in (EXACT, FLOAT):
        for n in range(2, 6):
            for seed in range(100):
                spec = random_canonical(n, 7919 * n + seed, backend)
                r = classify(from_canonical(spec))
                total += 1
                if backend == FLOAT:
                    worst_float = max(worst_float, r.residual)
                limit = 0.0 if backend == EXACT else 1e-9
                if not (specs_equivalent(r.spec, spec) and r.residual <= limit):
                    bad.append((backend, n, seed))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    report("AC2 round-trip canonicalization", ok,
           f"{total - len(bad)}/{total} recovered (exact residual 0, float max {worst_float:.1e} <= 1e-9) in {elapsed:.1f}s (budget 60s)")
    assert ok


def test_ac03_tripotent_split():
    rng = np.random.default_rng(3)
    bad = 0
    for k in range(500):
        n = int(rng.integers(1, 6))
        plus = int(rng.integers(0, n + 1))
        minus = int(rng.integers(0, n - plus + 1))
        r, gen = jordan.random_tripotent(n, plus, minus, k)
        s = jordan.tripotent_split(r)
        exact_pair = s.p1 == gen.p1 and s.p2 == gen.p2
        additive = nm.rank(r) == nm.rank(s.p1) + nm.rank(s.p2)
        bad += not (exact_pair and additive)
    report("AC3 tripotent split", bad == 0, f"{500 - bad}/500 splits exact with rank additivity")
    assert bad == 0


def test_ac04_five_tripotents():
    mats = pl.five_tripotents(EXACT)
    table = pl.annihilation_table(mats)
    n_tri = sum(table["tripotent"])
    n_rank = sum(table["rank_one"])
    n_ann = sum(table["annihilating"].values())
    ok = (n_tri, n_rank, n_ann) == (5, 5, 20)
    report("AC4 five-tripotent configuration", ok, f"tripotent {n_tri}/5, rank one {n_rank}/5, annihilation {n_ann}/20 (exact)")
    assert ok


def test_ac05_m2_search():
    start = time.perf_counter()
    scores = [pl.m2_quadruple_search(100_000, seed)[1].value for seed in range(5)]
    witness = pl.check_quadruple(pl.three_tripotent_witness(EXACT)).value
    elapsed = time.perf_counter() - start
    ok = all(s > 0 and s > pl.M2_SCORE_FLOOR for s in scores) and witness == 0 and elapsed < 120
    report("AC5 M2 impossibility evidence", ok,
           f"min scores {[round(s, 4) for s in scores]} > floor {pl.M2_SCORE_FLOOR}; "
           f"three-member witness score {witness}; {elapsed:.1f}s (budget 120s)")
    assert ok


def test_ac06_scalar_laws():
    rng = np.random.default_rng(6)
    bad = 0
    conj_ok = True
    for k in range(20):
        n = 2 + k % 3
        spec = random_canonical(n, 600 + k)
        if k % 4 == 0:
            spec = CanonicalSpec(spec.c, spec.variant, "conj", spec.T)
        phi = from_canonical(spec)
        classified = classify(phi).spec
        if classified.scalar_auto is ScalarAuto.CONJ:
            conj_ok &= extract_h(phi, nm.I_UNIT) == -nm.I_UNIT
        for _ in range(100):
            lam, mu = nm.random_scalar(rng), nm.random_scalar(rng)
            hl, hm = extract_h(phi, lam), extract_h(phi, mu)
            square = extract_h(phi, lam * lam * mu) == hl * hl * hm
            additive = extract_h(phi, lam + mu) == hl + hm
            bad += not (square and additive)
    ok = bad == 0 and conj_ok
    report("AC6 scalar-function laws", ok, f"{2000 - bad}/2000 pairs satisfy both laws exactly; h(i) = -i on conj maps: {conj_ok}")
    assert ok


def test_ac07_rank_and_orthoadditivity():
    rank_bad = ortho_bad = 0
    rank_checked = 0
    for k in range(50):
        n = 2 + k % 3
        phi = from_canonical(random_canonical(n, 700 + k))
        classify(phi)
        res = pl.rank_preservation_check(phi, k)
        rank_checked += res["checked"]
        rank_bad += len(res["failures"])
        rng = np.random.default_rng(k)
        for _ in range(100):
            p, q = jordan.random_orthogonal_idempotents(n, [1, 1], int(rng.integers(2**32)))
            ortho_bad += apply(phi, p + q) != apply(phi, p) + apply(phi, q)
    ok = rank_bad == 0 and ortho_bad == 0
    report("AC7 rank preservation and orthoadditivity", ok,
           f"rank kept on {rank_checked - rank_bad}/{rank_checked} tripotents; {5000 - ortho_bad}/5000 orthogonal pairs additive")
    assert ok


def test_ac08_dimension_one():
    laws = pl.dim1_laws(10_000, 8)
    f = pl.dim1_counterexample_eval
    gap = abs(f(2) - 2 * f(1))
    ok = laws["max_rel_multiplicative_residual"] <= 1e-12 and gap == 2
    report("AC8 dimension-one counterexample", ok,
           f"multiplicative residual {laws['max_rel_multiplicative_residual']:.1e} <= 1e-12; |phi(2) - 2 phi(1)| = {gap}")
    assert ok


def _negatives(count: int):
    """Maps that are close to triple maps but fail the law."""
    rng = np.random.default_rng(9)
    out = []
    kinds = ("perturbed_L", "mixed_LK", "trace_shift", "scaled")
    for k in range(count):
        n = 2 + k % 2
        kind = kinds[k % len(kinds)]
        phi = from_canonical(random_canonical(n, 900 + k))
        m = n * n
        if kind == "perturbed_L":
            l = phi.L.data.copy()
            i, j = rng.integers(m, size=2)
            l[i, j] = l[i, j] + GaussianRational(int(rng.integers(1, 3)), int(rng.integers(-1, 2)))
            out.append(SuperMap(n, Matrix._wrap(l, EXACT), phi.K))
        elif kind == "mixed_LK":
            # a canonical map plus a small multiple of its conjugate partner
            eps = GaussianRational(nm.Fraction(1, int(rng.integers(2, 9))))
            other = SuperMap(n, phi.K, phi.L)
            out.append(phi + other.scaled(eps))
        elif kind == "trace_shift":
            weight = GaussianRational(int(rng.integers(1, 3)), int(rng.integers(-1, 2)))
            out.append(from_linear_function(
                lambda a, n=n, w=weight: a + nm.unit(n, 0, 0) * (sum(a.data[i, i] for i in range(n)) * w), n))
        else:
            out.append(phi.scaled(int(rng.choice([2, -2, 3]))))
    return out


def test_ac09_triple_formulations():
    positives = [from_canonical(random_canonical(2 + k % 3, 950 + k)) for k in range(50)]
    negatives = _negatives(50)
    agree = 0
    correct = 0
    for phi, expected in [(p, True) for p in positives] + [(q, False) for q in negatives]:
        a, b = is_triple_morphism(phi), is_sym_triple_morphism(phi)
        agree += a == b
        correct += a == expected
    ok = agree == 100 and correct == 100
    report("AC9 equivalence of triple formulations", ok,
           f"verdicts agree on {agree}/100 maps; {correct}/100 match the known label (50 positive, 50 negative)")
    assert ok


def _cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        code = run(argv)
    text = buf.getvalue()
    return code, (json.loads(text) if text.strip() else None)


def test_ac10_cli_pipeline(tmp_path):
    closed = 0
    round_trip = True
    for seed in range(20):
        n = 1 + seed % 4
        code, doc = _cli(["gen", "--n", str(n), "--seed", str(seed)])
        path = tmp_path / f"g{seed}.json"
        path.write_text(json.dumps(doc))
        spec = spec_from_json(doc["spec"])
        phi = supermap_from_json(doc["supermap"])
        round_trip &= supermap_to_json(phi) == doc["supermap"] and json.loads(json.dumps(doc)) == doc
        v_code, v_doc = _cli(["verify", "--in", str(path)])
        c_code, c_doc = _cli(["canon", "--in", str(path)])
        rebuilt = from_canonical(spec_from_json(c_doc["spec"])) if c_code == 0 else None
        equivalent = (c_code == 0 and c_doc["residual"] == 0
                      and (specs_equivalent(spec_from_json(c_doc["spec"]), spec) if n > 1 else rebuilt == phi))
        closed += code == 0 and v_code == 0 and v_doc["verdict"] and equivalent
    scaled = tmp_path / "scaled.json"
    scaled.write_text(json.dumps(supermap_to_json(identity_map(2).scaled(2))))
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    codes = {
        "true verdict": _cli(["verify", "--in", str(tmp_path / "g0.json")])[0] == 0,
        "false verdict": _cli(["verify", "--in", str(scaled)])[0] == 1,
        "usage": _cli(["gen", "--n", "2"])[0] == 2,
        "parse": _cli(["canon", "--in", str(broken)])[0] == 2,
    }
    ok = closed == 20 and round_trip and all(codes.values())
    report("AC10 CLI pipeline", ok,
           f"{closed}/20 gen|verify|canon loops closed; exit codes {codes}; JSON round trip {round_trip}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
