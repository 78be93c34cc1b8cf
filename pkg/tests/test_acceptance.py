"""The thirteen acceptance criteria at their stated sizes, exact arithmetic.

Each test records one pass/fail line; the lines are printed in the terminal
summary (see conftest.py) and with ``-s``.
"""

import contextlib
import io
import json
import time


from artifact import suites as S
from artifact.cli import main

from conftest import FIXTURES

CFG = S.SuiteConfig(seed=7, max_q=3, max_n=4, grid=3, counts={"support": 200, "taylor_step": 100})
RESULTS: dict[int, str] = {}


def record(n: int, title: str, results, budget: float, t0: float):
    results = results if isinstance(results, list) else [results]
    elapsed = time.perf_counter() - t0
    ok = all(r.status == "pass" for r in results) and elapsed < budget
    cases = sum(r.cases for r in results)
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}  cases={cases} time={elapsed:.1f}s/{budget:.0f}s"
    for r in results:
        if r.status != "pass":
            line += f"  witness[{r.name}]={json.dumps(r.witness, default=str)}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def test_c01_composition_oracle():
    t = time.perf_counter()
    record(1, "compose vs pointwise evaluation, 200 pairs, p,q <= 3, degree <= 3", S.suite_compose(CFG, pairs=200), 300, t)


def test_c02_inversion():
    t = time.perf_counter()
    record(2, "invert then compose is the identity, 100 skeletons", S.suite_invert(CFG, count=100), 180, t)


def test_c03_evaluation_formulas():
    t = time.perf_counter()
    record(3, "Taylor vs partition evaluation, 500 pairs, n <= 5", S.suite_eval(CFG, count=500, max_n=5), 120, t)


def test_c04_naturality_and_support():
    t = time.perf_counter()
    record(4, "naturality under all eps/eta plus 50 random per level pair, support, Taylor step, n <= 4", S.suite_naturality(CFG, random_per_case=50, max_n=4), 120, t)


def test_c05_cube_calculus():
    t = time.perf_counter()
    r = S.suite_cubes(CFG, exhaustive_k=3, random_k4=10, dims_values=(0, 1, 2))
    record(5, "cube compose vs apply and criterion vs brute force, every k <= 3 dims <= 2, random k = 4", r, 180, t)


def test_c06_minus_functor_and_signs():
    t = time.perf_counter()
    record(6, "minus functor and sign multiplicativity, |I| <= 6", [S.suite_minus(CFG, max_k=6, per_k=3), S.suite_partitions(CFG, max_size=6)], 60, t)


def test_c07_higher_tangent_chain_rule():
    t = time.perf_counter()
    record(7, "chain rule for T^k, 50 pairs, k <= 3, iterated T for k = 2", S.suite_tangent(CFG, pairs=50, max_k=3), 120, t)


def test_c08_even_model():
    t = time.perf_counter()
    record(8, "even model vs twisted even T^k, one and two chart atlases, n <= 4", S.suite_even_model(CFG, count=20, max_n=4), 120, t)


def test_c09_bundle_extraction():
    t = time.perf_counter()
    record(9, "extracted cocycle, truncation naturality, products, n <= 4", S.suite_bundles(CFG, count=6, max_n=4), 180, t)


def test_c10_tangent_limit():
    t = time.perf_counter()
    record(10, "tangent of the limit vs limit of tangents, N <= 4", S.suite_tangent_limit(CFG, count=6, N=4), 60, t)


def test_c11_parity_functor():
    t = time.perf_counter()
    record(11, "parity change involution and compatibility, 100 families", S.suite_parity(CFG, count=100), 120, t)


def test_c12_vector_bundle_type_closure():
    t = time.perf_counter()
    record(12, "vector-bundle type composites vanish in degree >= 2, 100 pairs", S.suite_batchelor(CFG, count=100), 60, t)


def _run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue()


def test_c13_cli():
    t = time.perf_counter()
    manifest = json.loads((FIXTURES / "manifest.json").read_text())
    inputs = FIXTURES / "inputs"
    failures = []
    for case in manifest:
        argv = [case["argv"][0]] + [a if a.startswith("-") or not a.endswith(".json") else str(inputs / a) for a in case["argv"][1:]]
        code, out = _run_cli(argv)
        if code != case["exit"]:
            failures.append((case["name"], "exit", code))
        elif "golden" in case and out != (FIXTURES / "golden" / case["golden"]).read_text():
            failures.append((case["name"], "golden"))
        elif case["exit"] == 1 and not json.loads(out).get("witness"):
            failures.append((case["name"], "no witness"))
    code, out = _run_cli(["verify", "--seed", "7", "--max-q", "3"])
    if code != 0:
        failures.append(("verify", code))
    r = S.SuiteResult("cli", "pass" if not failures else "fail", len(manifest) + 1, {"failures": failures} if failures else None, 0.0)
    record(13, "golden corpus, broken set exits 1 with witnesses, verify exits 0", r, 60, t)
