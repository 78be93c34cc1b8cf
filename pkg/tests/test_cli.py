import contextlib
import io
import json
import subprocess
import sys

import pytest

from artifact import jsonio
from artifact.atlas import SuperAtlas
from artifact.cli import main
from artifact.mulbundle import BundleMorphism, LocalMultilinearBundle, TruncatedLimitElement
from artifact.mulspace import CubeMorphism
from artifact.skeleton import Skeleton
from artifact.superlin import RationalMap, SuperPoint

from conftest import FIXTURES

MANIFEST = json.loads((FIXTURES / "manifest.json").read_text())
INPUTS = FIXTURES / "inputs"


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def resolve(argv):
    return [argv[0]] + [a if a.startswith("-") or not a.endswith(".json") else str(INPUTS / a) for a in argv[1:]]


@pytest.mark.parametrize("case", MANIFEST, ids=[c["name"] for c in MANIFEST])
def test_golden_corpus(case):
    code, out, err = run(resolve(case["argv"]))
    assert code == case["exit"], err
    if "golden" in case:
        assert out == (FIXTURES / "golden" / case["golden"]).read_text()
    if case["exit"] == 1:
        assert json.loads(out)["witness"]
    if case["exit"] == 2:
        assert err.startswith("error:")


def test_broken_set_covered():
    broken = [c for c in MANIFEST if c["exit"] == 1]
    assert len(broken) >= 5
    assert any(c["argv"][0] == "cocycle-check" for c in broken)


def test_compose_with_identity_is_byte_identical():
    code, out, _ = run([ "compose", str(INPUTS / "identity_1_2.json"), str(INPUTS / "square.json")])
    assert code == 0 and out == (INPUTS / "square.json").read_text()


def test_golden_values_by_hand():
    ev = SuperPoint.from_json(json.loads((FIXTURES / "golden" / "eval_even.json").read_text()))
    assert dict(ev.items()) == {(): (9,), (1, 2): (42,)}
    d = Skeleton.from_json(json.loads((FIXTURES / "golden" / "diff_inverse_x.json").read_text()))
    assert d.f0() == RationalMap.from_exprs(2, ["-x1/x0**2"])
    inv = Skeleton.from_json(json.loads((FIXTURES / "golden" / "invert_shift.json").read_text()))
    assert inv.entry(1, (0,)) == RationalMap.from_exprs(1, ["1/(1 + (x0 - 2)**2)"])


def kind_of(doc):
    if "levels" in doc:
        return TruncatedLimitElement
    if "model" in doc:
        return SuperAtlas
    if "base_dim" in doc:
        return LocalMultilinearBundle
    if "base" in doc:
        return BundleMorphism
    if "family" in doc:
        return CubeMorphism
    if "comps" in doc and "space" in doc:
        return SuperPoint
    if "comps" in doc:
        return Skeleton
    if "num" in doc:
        return RationalMap
    return None


DOCUMENTS = [
    p
    for p in sorted(INPUTS.glob("*.json")) + sorted((FIXTURES / "golden").glob("*.json"))
    if kind_of(json.loads(p.read_text())) is not None
]


@pytest.mark.parametrize("path", DOCUMENTS, ids=lambda p: p.name)
def test_parse_emit_round_trip(path):
    doc = json.loads(path.read_text())
    cls = kind_of(doc)
    text = path.read_text()
    assert jsonio.dumps(cls.from_json(doc).to_json()) == text


def test_exit_codes_and_messages(tmp_path):
    code, _, err = run(["eval", str(INPUTS / "square.json")])
    assert code == 2
    code, _, _ = run(["no-such-command"])
    assert code == 2
    code, _, _ = run(["--help"])
    assert code == 0


def test_out_flag_and_env_overrides(tmp_path, monkeypatch):
    out = tmp_path / "o.json"
    code, stdout, _ = run(["bundle-extract", str(INPUTS / "atlas_inv.json"), "--level", "1", "--out", str(out)])
    assert code == 0 and stdout == ""
    monkeypatch.setenv("ARTIFACT_LEVEL", "1")
    code, stdout, _ = run(["bundle-extract", str(INPUTS / "atlas_inv.json")])
    assert code == 0 and stdout == out.read_text()
    monkeypatch.setenv("ARTIFACT_LEVEL", "x")
    code, _, err = run(["bundle-extract", str(INPUTS / "atlas_inv.json")])
    assert code == 2 and "ARTIFACT_LEVEL" in err


def test_verify_passes_and_is_deterministic():
    code, out1, _ = run(["verify", "--seed", "7", "--max-q", "3"])
    assert code == 0
    rep = json.loads(out1)
    assert rep["status"] == "pass" and len(rep["suites"]) >= 12
    assert all(s["status"] == "pass" and s["cases"] > 0 for s in rep["suites"])
    _, out2, _ = run(["verify", "--seed", "7", "--max-q", "3"])
    assert out1 == out2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "artifact", "cocycle-check", str(INPUTS / "atlas_inv_perturbed.json")], capture_output=True, text=True)
    assert res.returncode == 1
    assert json.loads(res.stdout)["witness"]["triple"] == ["a", "b", "a"]
