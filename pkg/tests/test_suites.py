"""Every property suite must reject a deliberately broken implementation."""

from artifact import suites as S
from artifact.mulspace import CubeMorphism
from artifact.skeleton import compose, eval_taylor, truncate_skeleton

CFG = S.SuiteConfig(seed=3)


def drop_top(fn):
    def broken(*args, **kw):
        out = fn(*args, **kw)
        return truncate_skeleton(out, max(0, out.source.q - 1)) if out.source.q >= 2 else out.with_box(out.box)

    return broken


def test_compose_suite_catches_dropped_components(monkeypatch):
    monkeypatch.setattr(S, "compose", drop_top(compose))
    r = S.suite_compose(CFG, pairs=40)
    assert r.status == "fail" and r.witness["reason"].startswith("compose")


def test_eval_suite_catches_wrong_taylor(monkeypatch):
    def broken(f, v):
        out = eval_taylor(f, v)
        items = dict(out.items())
        return out.scale(2) if len(items) > 1 else out

    monkeypatch.setattr(S, "eval_taylor", broken)
    assert S.suite_eval(CFG, count=60).status == "fail"


def test_invert_suite_catches_one_sided_error(monkeypatch):
    monkeypatch.setattr(S, "invert", lambda f: f)
    assert S.suite_invert(CFG, count=10).status == "fail"


def test_cube_suite_catches_bad_criterion(monkeypatch):
    monkeypatch.setattr(S, "cube_invert", lambda f: (True, CubeMorphism.identity(f.source)))
    r = S.suite_cubes(CFG, exhaustive_k=2, random_k4=0)
    assert r.status == "fail" and r.witness["reason"] in ("criterion vs brute force", "inverse")


def test_partition_suite_catches_bad_sign(monkeypatch):
    monkeypatch.setattr(S, "part_sign", lambda nu: 1)
    assert S.suite_partitions(CFG).status == "fail"


def test_minus_suite_catches_missing_sign(monkeypatch):
    monkeypatch.setattr(S, "minus_functor", lambda f: CubeMorphism(f.source, f.target, {nu: -t if len(nu) == 2 else t for nu, t in f.family.items()}, f.arity))
    assert S.suite_minus(CFG, max_k=6, per_k=2).status == "fail"


def test_parity_suite_catches_identity(monkeypatch):
    monkeypatch.setattr(S, "parity_change", lambda f: f)
    assert S.suite_parity(CFG, count=10).status == "fail"


def test_tangent_suite_catches_bad_chain_rule(monkeypatch):
    from artifact.mulbundle import bundle_compose, higher_tangent

    monkeypatch.setattr(S, "bundle_compose", lambda g, f: bundle_compose(f, g) if f.base.arity == g.base.codim else bundle_compose(g, f))
    monkeypatch.setattr(S, "higher_tangent", lambda phi, k: higher_tangent(phi, k if k < 2 else 1) if k else higher_tangent(phi, 0))
    assert S.suite_tangent(CFG, pairs=12).status == "fail"


def test_vbundle_type_suite_catches_extra_component(monkeypatch):
    from artifact.randgen import rand_skeleton

    monkeypatch.setattr(S, "rand_batchelor", lambda rng, A, B, d, rational=False: rand_skeleton(rng, A, B, d, 0.9))
    assert S.suite_batchelor(CFG, count=30).status == "fail"


def test_results_serialise():
    r = S.suite_grassmann(CFG, max_n=2)
    assert r.to_json() == {"name": "grassmann", "status": "pass", "cases": r.cases, "witness": None}
