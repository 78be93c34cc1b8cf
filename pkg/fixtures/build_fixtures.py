"""Regenerate the fixture corpus: inputs, manifest and golden outputs.

    python3 fixtures/build_fixtures.py

Golden files are the canonical CLI output at the time of generation; the
test suite checks several of them against hand-derived values as well.
"""

from __future__ import annotations

import contextlib
import io
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from artifact import jsonio
from artifact.atlas import SuperAtlas, embed_vbundle, tangent_atlas
from artifact.cli import main
from artifact.mulbundle import TruncatedLimitElement
from artifact.mulspace import CubeMorphism, CubeSpace
from artifact.skeleton import DomainBox, Skeleton
from artifact.superlin import RationalMap, SuperPoint, SuperVectorSpace

ROOT = Path(__file__).resolve().parent
F = Fraction


def rm(arity, *exprs):
    return RationalMap.from_exprs(arity, list(exprs))


def T(rows):
    return np.vectorize(F, otypes=[object])(np.array(rows, dtype=object))


def one_over_x(perturb=False):
    line = SuperVectorSpace(1, 0)
    pos = DomainBox.open([(0, None)])
    back = "1/x0 + 1/100" if perturb else "1/x0"
    return SuperAtlas(
        line,
        {"a": pos, "b": pos},
        {
            ("a", "b"): Skeleton.build(line, line, {0: {(): rm(1, "1/x0")}}, DomainBox.open([(1, 2)])),
            ("b", "a"): Skeleton.build(line, line, {0: {(): rm(1, back)}}, DomainBox.open([(F(1, 2), 1)])),
        },
    )


def inputs() -> dict:
    S11 = SuperVectorSpace(1, 1)
    S12 = SuperVectorSpace(1, 2)
    docs = {}
    # x^2 with odd part x, as a skeleton (1|2) -> (1|2) so two-generator souls matter
    f = Skeleton.build(S12, S12, {0: {(): rm(1, "x0**2")}, 1: {(0,): rm(1, "x0", "0"), (1,): rm(1, "0", "1")}})
    docs["square.json"] = f.to_json()
    docs["identity_1_2.json"] = Skeleton.identity(S12).to_json()
    docs["point_odd.json"] = SuperPoint(S12, 1, {(): [F(3)], (1,): [F(5), F(0)]}).to_json()
    docs["point_even.json"] = SuperPoint(S12, 2, {(): [F(3)], (1, 2): [F(7)]}).to_json()
    docs["shift.json"] = Skeleton.build(S11, S11, {0: {(): rm(1, "x0 + 2")}, 1: {(0,): rm(1, "1 + x0**2")}}).to_json()
    docs["nonaffine.json"] = Skeleton.build(S11, S11, {0: {(): rm(1, "x0**3 + x0")}, 1: {(0,): rm(1, "1")}}).to_json()
    docs["singular.json"] = Skeleton.build(S11, S11, {0: {(): rm(1, "x0")}, 1: {(0,): rm(1, "x0 - x0")}}).to_json()
    docs["inverse_x.json"] = Skeleton.build(SuperVectorSpace(1, 0), SuperVectorSpace(1, 0), {0: {(): rm(1, "1/x0")}}, DomainBox.open([(0, None)])).to_json()
    # a family on (0|1) ⊕ (1|1): (e1; x, e2) -> (x*e1*e2 ... ) kept linear in the second factor
    H, E, Fs = SuperVectorSpace(0, 1), SuperVectorSpace(1, 1), SuperVectorSpace(1, 1)
    fam = Skeleton.build(H * E, Fs, {0: {(): rm(1, "3*x0")}, 1: {(1,): rm(1, "2")}, 2: {(0, 1): rm(1, "5")}}, product=(H.p, H.q))
    docs["family.json"] = fam.to_json()
    notfam = Skeleton.build(H * E, Fs, {0: {(): rm(1, "x0**2")}}, product=(H.p, H.q))
    docs["not_family.json"] = notfam.to_json()
    docs["square_map.json"] = rm(1, "x0**2").to_json()
    # cube morphisms, k = 2, all axes one-dimensional
    C = CubeSpace.uniform(2, 1)
    g = CubeMorphism(C, C, {((1,),): T([[2]]), ((2,),): T([[3]]), ((1, 2),): T([[1]]), ((1,), (2,)): T([[[4]]])})
    h = CubeMorphism(C, C, {((1,),): T([[1]]), ((2,),): T([[-1]]), ((1, 2),): T([[5]]), ((1,), (2,)): T([[[1]]])})
    docs["cube_g.json"] = g.to_json()
    docs["cube_f.json"] = h.to_json()
    bad = CubeMorphism(C, C, {((1,),): T([[0]]), ((2,),): T([[3]]), ((1, 2),): T([[1]])})
    docs["cube_singular.json"] = bad.to_json()
    a = one_over_x()
    docs["atlas_inv.json"] = a.to_json()
    docs["atlas_inv_perturbed.json"] = one_over_x(True).to_json()
    docs["atlas_tangent_inv.json"] = tangent_atlas(a).to_json()
    line = DomainBox.all()
    mob = embed_vbundle(
        1, 1, {"u": line, "v": line},
        {("u", "v"): (line, rm(1, "x0"), rm(2, "-x1")), ("v", "u"): (line, rm(1, "x0"), rm(2, "-x1"))},
    )
    docs["atlas_mobius.json"] = mob.to_json()
    S22 = SuperVectorSpace(2, 2)
    # a non-even atlas for the even model check
    docs["atlas_odd.json"] = SuperAtlas(S22, {"c": line}, {}).to_json()
    good = TruncatedLimitElement.of([([F(1)], {}), ([F(1)], {(1,): [F(2)]}), ([F(1)], {(1,): [F(2)], (2,): [F(3)], (1, 2): [F(4)]})])
    docs["limit_good.json"] = good.to_json()
    badl = TruncatedLimitElement.of([([F(1)], {}), ([F(1)], {(1,): [F(2)]}), ([F(1)], {(1,): [F(9)], (2,): [F(3)], (1, 2): [F(4)]})])
    docs["limit_bad.json"] = badl.to_json()
    return docs


# name, argv (paths relative to inputs/), expected exit
CASES = [
    ("eval_odd", ["eval", "square.json", "point_odd.json"], 0),
    ("eval_even", ["eval", "square.json", "point_even.json"], 0),
    ("eval_even_taylor", ["eval", "square.json", "point_even.json", "--method", "taylor"], 0),
    ("compose_identity", ["compose", "identity_1_2.json", "square.json"], 0),
    ("compose_square", ["compose", "square.json", "square.json"], 0),
    ("invert_shift", ["invert", "shift.json"], 0),
    ("diff_inverse_x", ["diff", "inverse_x.json"], 0),
    ("parity_family", ["parity", "family.json"], 0),
    ("parity_tangent_atlas", ["parity", "atlas_tangent_inv.json"], 0),
    ("tangent_square_2", ["tangent", "square_map.json", "--level", "2"], 0),
    ("tangent_atlas", ["tangent", "atlas_inv.json"], 0),
    ("cube_compose", ["cube-compose", "cube_g.json", "cube_f.json"], 0),
    ("cube_invert", ["cube-invert", "cube_g.json"], 0),
    ("bundle_extract_2", ["bundle-extract", "atlas_tangent_inv.json", "--level", "2"], 0),
    ("truncate_1", ["truncate", "atlas_tangent_inv.json", "--level", "0"], 0),
    ("cocycle_inv", ["cocycle-check", "atlas_inv.json"], 0),
    ("cocycle_mobius", ["cocycle-check", "atlas_mobius.json"], 0),
    ("limit_good", ["limit-check", "limit_good.json"], 0),
    ("even_model", ["even-model", "atlas_inv.json", "--level", "4"], 0),
    ("even_model_deg", ["even-model", "atlas_inv.json", "--level", "2", "--degree", "3"], 0),
    # broken set: validation failures
    ("broken_cocycle", ["cocycle-check", "atlas_inv_perturbed.json"], 1),
    ("broken_cube_invert", ["cube-invert", "cube_singular.json"], 1),
    ("broken_limit", ["limit-check", "limit_bad.json"], 1),
    ("broken_parity", ["parity", "not_family.json"], 1),
    ("broken_invert", ["invert", "singular.json"], 1),
    ("broken_invert_nonaffine", ["invert", "nonaffine.json"], 1),
    ("broken_even_model", ["even-model", "atlas_odd.json", "--level", "2"], 1),
    # input errors
    ("input_missing_file", ["diff", "does_not_exist.json"], 2),
    ("input_float", ["diff", "../malformed/float.json"], 2),
    ("input_truncated", ["diff", "../malformed/truncated.json"], 2),
    ("input_missing_field", ["diff", "../malformed/missing_field.json"], 2),
    ("input_no_level", ["bundle-extract", "atlas_inv.json"], 2),
    ("input_dimension", ["compose", "square.json", "shift.json"], 2),
]

MALFORMED = {
    "float.json": '{"num": [[{"c": 1.5, "exps": [1]}]], "den": [{"c": "1", "exps": [0]}]}\n',
    "truncated.json": '{"source": {"p": 1, "q": 1}, "target":\n',
    "missing_field.json": '{"target": {"p": 1, "q": 1}, "comps": []}\n',
}


def run_case(argv: list[str], inputs_dir: Path) -> tuple[int, str]:
    cmd = argv[0]
    rest = [a if a.startswith("-") or not a.endswith(".json") else str(inputs_dir / a) for a in argv[1:]]
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main([cmd, *rest])
    return code, out.getvalue()


def build() -> None:
    inp = ROOT / "inputs"
    gold = ROOT / "golden"
    mal = ROOT / "malformed"
    for d in (inp, gold, mal):
        d.mkdir(exist_ok=True)
    for name, doc in inputs().items():
        (inp / name).write_text(jsonio.dumps(doc), encoding="utf-8")
    for name, text in MALFORMED.items():
        (mal / name).write_text(text, encoding="utf-8")
    manifest = []
    for name, argv, expect in CASES:
        code, text = run_case(argv, inp)
        if code != expect:
            raise SystemExit(f"{name}: exit {code}, expected {expect}\n{text}")
        entry = {"name": name, "argv": argv, "exit": expect}
        if text:
            (gold / f"{name}.json").write_text(text, encoding="utf-8")
            entry["golden"] = f"{name}.json"
        manifest.append(entry)
    (ROOT / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    build()
