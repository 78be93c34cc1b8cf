"""Command-line front end.

Exit codes: 0 success or pass, 1 validation failure (with witness),
2 input, dimension or domain error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import jsonio
from .atlas import (
    SuperAtlas,
    cocycle_check,
    even_model_iso,
    extract_bundle,
    svbundle_parity,
    tangent_atlas,
    truncate,
)
from .errors import ArtifactError, InputError, ValidationError
from .grassmann import set_generator_cap
from .mulbundle import LocalMultilinearBundle, TruncatedLimitElement, higher_tangent, limit_check
from .mulspace import CubeMorphism, cube_compose, cube_invert
from .skeleton import Skeleton, compose, differential, eval_partition, eval_taylor, invert, is_ufamily, parity_change
from .superlin import RationalMap, SuperPoint

ENV_PREFIX = "ARTIFACT_"

# flag name -> (type, default)
OPTIONS = {
    "seed": (int, 7),
    "max-q": (int, 3),
    "max-n": (int, 4),
    "grid": (int, 3),
    "level": (int, None),
    "out": (str, None),
}


class Fail(Exception):
    """Validation failure carrying the report to emit."""

    def __init__(self, report: dict):
        super().__init__(report.get("status", "fail"))
        self.report = report


def _env_default(name: str, kind, default):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return default
    try:
        return kind(raw)
    except ValueError as exc:
        raise InputError(f"bad value for {ENV_PREFIX}{name.upper().replace('-', '_')}: {raw!r}") from exc


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return jsonio.loads(text)


def _need_level(args) -> int:
    if args.level is None:
        raise InputError("--level is required")
    if args.level < 0:
        raise InputError("--level must be non-negative")
    return args.level


def _report(rep: dict) -> dict:
    if rep.get("status") != "pass":
        raise Fail(rep)
    return rep


# ---------------------------------------------------------------- subcommands


def cmd_eval(args):
    f = Skeleton.from_json(_load(args.skeleton))
    v = SuperPoint.from_json(_load(args.point))
    fn = eval_taylor if args.method == "taylor" else eval_partition
    return fn(f, v).to_json()


def cmd_compose(args):
    g = Skeleton.from_json(_load(args.g))
    f = Skeleton.from_json(_load(args.f))
    return compose(g, f, grid=args.grid).to_json()


def cmd_invert(args):
    f = Skeleton.from_json(_load(args.skeleton))
    hint = RationalMap.from_json(_load(args.hint)) if args.hint else None
    return invert(f, hint).to_json()


def cmd_diff(args):
    return differential(Skeleton.from_json(_load(args.skeleton))).to_json()


def cmd_parity(args):
    doc = _load(args.input)
    if isinstance(doc, dict) and "charts" in doc:
        return svbundle_parity(SuperAtlas.from_json(doc)).to_json()
    f = Skeleton.from_json(doc)
    if not is_ufamily(f):
        raise Fail({"status": "fail", "witness": {"reason": "not a family linear in its second factor"}})
    return parity_change(f).to_json()


def cmd_tangent(args):
    doc = _load(args.input)
    if isinstance(doc, dict) and "charts" in doc:
        return tangent_atlas(SuperAtlas.from_json(doc)).to_json()
    phi = RationalMap.from_json(doc)
    return higher_tangent(phi, _need_level(args)).to_json()


def cmd_cube_compose(args):
    g = CubeMorphism.from_json(_load(args.g))
    f = CubeMorphism.from_json(_load(args.f))
    return cube_compose(g, f).to_json()


def cmd_cube_invert(args):
    f = CubeMorphism.from_json(_load(args.f))
    ok, inv = cube_invert(f)
    if not ok:
        raise Fail({"status": "fail", "witness": {"reason": "a length-one component is not invertible"}})
    return {"status": "pass", "inverse": inv.to_json()}


def cmd_bundle_extract(args):
    return extract_bundle(SuperAtlas.from_json(_load(args.atlas)), _need_level(args)).to_json()


def cmd_truncate(args):
    return truncate(SuperAtlas.from_json(_load(args.atlas)), _need_level(args)).to_json()


def cmd_cocycle_check(args):
    doc = _load(args.input)
    if isinstance(doc, dict) and "model" in doc:
        return _report(cocycle_check(SuperAtlas.from_json(doc), args.grid))
    return _report(LocalMultilinearBundle.from_json(doc).validate(args.grid))


def cmd_limit_check(args):
    ok, witness = limit_check(TruncatedLimitElement.from_json(_load(args.element)))
    return _report({"status": "pass" if ok else "fail", "witness": witness or None})


def cmd_even_model(args):
    n = _need_level(args)
    k = args.degree if args.degree is not None else n
    return _report(even_model_iso(SuperAtlas.from_json(_load(args.atlas)), k, n))


def cmd_verify(args):
    from .suites import SuiteConfig, run_all

    cfg = SuiteConfig(seed=args.seed, max_q=args.max_q, max_n=args.max_n, grid=args.grid)
    results = run_all(cfg, quick=not args.full)
    rep = {
        "status": "pass" if all(r.status == "pass" for r in results) else "fail",
        "seed": args.seed,
        "suites": [r.to_json() for r in results],
    }
    return _report(rep)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for name, (kind, default) in OPTIONS.items():
        common.add_argument(f"--{name}", type=kind, default=_env_default(name, kind, default))

    p = argparse.ArgumentParser(prog="artifact", description="Exact supersmooth skeleton calculus.", parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, *positional, help=""):
        sp = sub.add_parser(name, parents=[common], help=help)
        for pos in positional:
            sp.add_argument(pos)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("eval", cmd_eval, "skeleton", "point", help="evaluate a skeleton at a point")
    sp.add_argument("--method", choices=["partition", "taylor"], default="partition")
    add("compose", cmd_compose, "g", "f", help="skeleton of g after f")
    sp = add("invert", cmd_invert, "skeleton", help="inverse skeleton")
    sp.add_argument("--hint", help="inverse of the base map, for non-affine bases")
    add("diff", cmd_diff, "skeleton", help="differential as a family")
    add("parity", cmd_parity, "input", help="parity change of a family or bundle atlas")
    add("tangent", cmd_tangent, "input", help="higher tangent of a map (--level k) or tangent atlas")
    add("cube-compose", cmd_cube_compose, "g", "f", help="compose cube morphisms")
    add("cube-invert", cmd_cube_invert, "f", help="invert a cube morphism")
    add("bundle-extract", cmd_bundle_extract, "atlas", help="multilinear bundle at --level n")
    add("truncate", cmd_truncate, "atlas", help="truncate transitions at --level n")
    add("cocycle-check", cmd_cocycle_check, "input", help="check an atlas or multilinear bundle")
    add("limit-check", cmd_limit_check, "element", help="check coherence of a truncated limit element")
    sp = add("even-model", cmd_even_model, "atlas", help="compare the even model at --level n")
    sp.add_argument("--degree", type=int, default=None, help="tangent degree k >= n (default n)")
    sp = add("verify", cmd_verify, help="run the property suites")
    sp.add_argument("--full", action="store_true", help="exhaustive cube sweep and deeper levels")
    return p


def _emit(doc, out: str | None) -> None:
    text = jsonio.dumps(doc)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        set_generator_cap(max(12, args.max_n + 2))
        doc = args.fn(args)
    except Fail as exc:
        _emit(exc.report, args.out)
        return 1
    except ValidationError as exc:
        _emit({"status": "fail", "reason": str(exc), "witness": exc.witness}, args.out)
        return 1
    except (ArtifactError, ZeroDivisionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    _emit(doc, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
