"""envforge command-line driver.

Exit codes: 0 ok, 1 qualified result, 2 negative result, 64 usage error,
65 data error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Sequence

import numpy as np

from .catalog import catalog, describe, names
from . import expr as E
from .creative import Verdict, solve_creator
from .envelope import alternative_envelopes, build_envelope, closed_form, e1_envelope, verify_envelope
from .errors import EnvforgeError, NotApplicable, ParallelLines, ParseError, SceneError
from .family import HyperplaneFamily
from .optics import WulffDensity, anti_orthotomic, cahn_hoffman, orthotomic, pedal, random_admissible_point
from .output import Table, dumps, merge, param_columns, to_csv, to_json, vector_columns
from .scene import load_scene
from .svg import Figure, family_figure, surface_figure

EXIT_OK, EXIT_QUALIFIED, EXIT_NEGATIVE, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65
E1_TOL = 1e-5
AGREE_TOL = 1e-8

log = logging.getLogger("envforge")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _point(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    src = p.add_argument_group("family source")
    src.add_argument("--catalog", metavar="NAME")
    src.add_argument("--scene", metavar="FILE")
    src.add_argument("--theta0", type=float)
    src.add_argument("--alpha", metavar="EXPR")
    src.add_argument("--c", type=float)
    src.add_argument("--n", type=int)
    run = p.add_argument_group("run options")
    run.add_argument("--samples", type=int, metavar="K")
    run.add_argument("--tol", type=float, metavar="X")
    run.add_argument("--seed", type=int, default=0, metavar="U64")
    run.add_argument("--out", metavar="PATH", help="csv, json, or a file path (.csv/.json)")
    run.add_argument("--plot", metavar="PATH", help="write an SVG figure")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="envforge", description="Envelopes of hyperplane families.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    sub.add_parser("check", parents=[common], help="creativity and uniqueness verdict")
    p = sub.add_parser("envelope", parents=[common], help="construct the envelope")
    p.add_argument("--force-member", metavar="EXPR", help="alpha of an alternative envelope when non-unique")
    p.add_argument("--beta", action="append", metavar="EXPR", help="also build and verify this alternative member (repeatable)")
    p = sub.add_parser("verify", parents=[common], help="check the envelope conditions")
    p.add_argument("--f", metavar="EXPRS", help="comma-separated closed-form map to verify instead of the constructed envelope")
    sub.add_parser("e1", parents=[common], help="intersection-limit envelope of a line family")
    for name in ("orthotomic", "anti-orthotomic", "pedal"):
        p = sub.add_parser(name, parents=[common], help=f"{name} relative to auxiliary points")
        p.add_argument("--P", type=_point, action="append", metavar="x,y[,z]")
        p.add_argument("--random-P", type=int, default=0, metavar="K", help="add K seeded random admissible points")
    p = sub.add_parser("wulff", parents=[common], help="Cahn-Hoffman map of a support density")
    p.add_argument("--gamma", required=True, metavar="EXPR")
    sub.add_parser("catalog-list", help="list the built-in families")
    return parser


# ---------------------------------------------------------------------------


def load_family(args) -> tuple[HyperplaneFamily, dict]:
    if bool(args.catalog) == bool(args.scene):
        raise UsageError("give exactly one of --catalog or --scene")
    if args.scene:
        scene = load_scene(args.scene)
        fam, options = scene.family, dict(scene.options)
    else:
        kw = {"theta0": args.theta0, "alpha": args.alpha, "c": args.c, "n": args.n}
        fam, options = catalog(args.catalog, **kw), {}
    if args.samples is not None:
        if args.samples < 2:
            raise UsageError("--samples must be at least 2")
        fam = fam.replace(samples=(args.samples,) * fam.m)
    if args.tol is not None:
        options["tol"] = args.tol
    return fam, options


def _solve(fam, options):
    tol = float(options.get("tol", 1e-7))
    return solve_creator(fam, fam.grid(), tol=tol)


def _emit(args, table: Table, summary: dict) -> None:
    out = args.out
    if out in ("csv", "json"):
        sys.stdout.write(to_csv(table) if out == "csv" else to_json(table, summary))
        return
    if out:
        text = to_json(table, summary) if out.endswith(".json") else to_csv(table)
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(dumps(summary) + "\n")


def _exit_for(report) -> int:
    if report.verdict is Verdict.NOT_CREATIVE:
        return EXIT_NEGATIVE
    return EXIT_QUALIFIED if report.verdict is Verdict.NON_UNIQUE else EXIT_OK


def _plot_family(args, fam, samples, curves, title):
    if not args.plot:
        return
    if fam.n == 1:
        fig = family_figure(samples.phi, samples.nu, curves, title)
    else:
        fig = surface_figure(curves[0], title)
    fig.save(args.plot)


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    fam, options = load_family(args)
    cf, rep = _solve(fam, options)
    summary = {"family": fam.name, **rep.to_dict()}
    table = Table.from_columns(merge(param_columns(cf.samples.points), {"residual": cf.residual, "singular": cf.singular}, vector_columns("omega", cf.ambient)))
    _emit(args, table, summary)
    return _exit_for(rep)


def cmd_envelope(args) -> int:
    fam, options = load_family(args)
    cf, rep = _solve(fam, options)
    summary = {"family": fam.name, **rep.to_dict()}
    if not rep.creative:
        sys.stdout.write(dumps(summary) + "\n")
        print("envforge: family is not creative; no envelope", file=sys.stderr)
        return EXIT_NEGATIVE
    env = build_envelope(fam, cf)
    code = _exit_for(rep)
    if args.force_member:
        try:
            env = alternative_envelopes(fam, cf, rep, [args.force_member])[0]
        except NotApplicable as exc:
            raise UsageError(str(exc)) from None
        summary["member"] = args.force_member
        code = EXIT_OK
    if args.beta:
        try:
            members = alternative_envelopes(fam, cf, rep, args.beta)
        except NotApplicable as exc:
            raise UsageError(str(exc)) from None
        summary["members"] = [
            {"beta": b, "sup_distance": float(np.max(np.linalg.norm(m.f - env.f, axis=-1))), **verify_envelope(fam, m).to_dict()}
            for b, m in zip(args.beta, members)
        ]
    ver = verify_envelope(fam, env)
    summary["verification"] = ver.to_dict()
    cols = merge(
        param_columns(cf.samples.points),
        vector_columns("f", env.f),
        vector_columns("omega", env.omega),
        {"gamma": cf.gamma, "residual_a": ver.residual_a, "residual_b": ver.residual_b},
    )
    _emit(args, Table.from_columns(cols), summary)
    _plot_family(args, fam, cf.samples, [env.f], f"{fam.name} envelope")
    return code


def cmd_verify(args) -> int:
    fam, options = load_family(args)
    if args.f:
        try:
            fmap = [E.parse(src, list(fam.params)) for src in args.f.split(",")]
        except ParseError as exc:
            raise UsageError(f"--f: {exc}") from None
        if len(fmap) != fam.n + 1:
            raise UsageError(f"--f needs {fam.n + 1} components")
        ver = verify_envelope(fam, fmap)
        s = fam.evaluate(fam.grid())
        values, _ = closed_form(fmap, s.points, fam.params)
        points = s.points
    else:
        cf, rep = _solve(fam, options)
        if not rep.creative:
            print("envforge: family is not creative; nothing to verify", file=sys.stderr)
            return EXIT_NEGATIVE
        env = build_envelope(fam, cf)
        ver = verify_envelope(fam, env)
        values, points = env.f, cf.samples.points
    summary = {"family": fam.name, **ver.to_dict()}
    cols = merge(param_columns(points), vector_columns("f", values), {"residual_a": ver.residual_a, "residual_b": ver.residual_b})
    _emit(args, Table.from_columns(cols), summary)
    return EXIT_OK if ver.passed else EXIT_NEGATIVE


def cmd_e1(args) -> int:
    fam, options = load_family(args)
    if fam.n != 1 or fam.m != 1:
        raise UsageError("e1 needs a one-parameter line family")
    cf, rep = _solve(fam, options)
    ref = build_envelope(fam, cf) if rep.creative else None
    try:
        est = e1_envelope(fam, cf.grid, reference=ref)
    except ParallelLines as exc:
        sys.stdout.write(dumps({"family": fam.name, "error": "ParallelLines", "message": str(exc)}) + "\n")
        return EXIT_NEGATIVE
    summary = {
        "family": fam.name,
        "verdict": rep.verdict.value,
        "defined": int(np.sum(est.defined)),
        "unreliable": int(np.sum(est.unreliable)),
        "parallel": int(np.sum(est.parallel)),
        "min_order": est.min_order(),
        "max_e1_e2": est.max_distance() if ref is not None else None,
        "tolerance": E1_TOL,
    }
    cols = merge(param_columns(cf.samples.points), vector_columns("e1", est.points), {"order": est.order, "defined": est.defined})
    if ref is not None:
        cols.update(vector_columns("e2", ref.f))
        cols["distance"] = est.distance
    _emit(args, Table.from_columns(cols), summary)
    if args.plot:
        family_figure(cf.samples.phi, cf.samples.nu, [est.points], f"{fam.name} E1").save(args.plot)
    if ref is None:
        return EXIT_QUALIFIED
    return EXIT_OK if summary["max_e1_e2"] <= E1_TOL else EXIT_NEGATIVE


def _points(args, fam, cf) -> list[np.ndarray]:
    pts = [np.asarray(p, dtype=float) for p in (args.P or [])]
    for k in range(args.random_P):
        pts.append(random_admissible_point(fam, cf, seed=args.seed + k))
    if not pts:
        raise UsageError("give at least one --P or --random-P")
    for p in pts:
        if p.size != fam.n + 1:
            raise UsageError(f"--P needs {fam.n + 1} coordinates")
    return pts


def cmd_optics(args) -> int:
    fam, options = load_family(args)
    cf, rep = _solve(fam, options)
    pts = _points(args, fam, cf)
    table: Table | None = None
    results, masks = [], []
    for k, P in enumerate(pts):
        om = orthotomic(fam, P, cf)
        if args.command == "orthotomic":
            data, mask = om.f_P, om.admissible
            extra = vector_columns("nuP", om.nu_P)
        elif args.command == "pedal":
            data, mask = pedal(fam, P, cf.grid)
            extra = {}
        else:
            if not rep.creative:
                print("envforge: family is not creative; no anti-orthotomic", file=sys.stderr)
                return EXIT_NEGATIVE
            data = anti_orthotomic(om, strict=False)
            mask = om.admissible & np.all(np.isfinite(data), axis=-1)
            extra = {}
        results.append(data)
        masks.append(mask)
        cols = merge(
            {"P_index": np.full(mask.shape, float(k))},
            param_columns(cf.samples.points),
            vector_columns(args.command.replace("-", "_"), data),
            extra,
            {"admissible": mask},
        )
        part = Table.from_columns(cols)
        if table is None:
            table = part
        else:
            table.extend(part)
    summary = {
        "family": fam.name,
        "points": [p.tolist() for p in pts],
        "inadmissible": [int(np.sum(~m)) for m in masks],
    }
    code = EXIT_OK if all(np.all(m) for m in masks) else EXIT_QUALIFIED
    if args.command == "anti-orthotomic":
        joint = np.logical_and.reduce(masks)
        worst = 0.0
        for i in range(len(results)):
            for j in range(i + 1, len(results)):
                d = np.linalg.norm(results[i] - results[j], axis=-1)[joint]
                worst = max(worst, float(np.max(d)) if d.size else 0.0)
        env = build_envelope(fam, cf)
        rt = max(float(np.max(np.linalg.norm(r - env.f, axis=-1)[m])) if np.any(m) else 0.0 for r, m in zip(results, masks))
        summary.update({"max_pairwise": worst, "max_vs_envelope": rt, "tolerance": AGREE_TOL, "jointly_admissible": int(np.sum(joint))})
        code = EXIT_OK if worst <= AGREE_TOL and rt <= AGREE_TOL else EXIT_NEGATIVE
    _emit(args, table, summary)
    if args.plot and fam.n == 1:
        family_figure(cf.samples.phi, cf.samples.nu, results, f"{fam.name} {args.command}").save(args.plot)
    return code


def cmd_wulff(args) -> int:
    n = args.n or 1
    if n not in (1, 2):
        raise UsageError("--n must be 1 or 2")
    try:
        density = WulffDensity.parse(args.gamma, n)
    except ParseError as exc:
        raise UsageError(f"--gamma: {exc}") from None
    count = args.samples or 401
    pts = density.sphere_samples(count)
    x, image = cahn_hoffman(density, pts)
    summary = {"gamma": E.pretty(density.gamma), "n": n, "samples": count, "max_radius": float(np.max(np.linalg.norm(image, axis=-1))), "min_radius": float(np.min(np.linalg.norm(image, axis=-1)))}
    _emit(args, Table.from_columns(merge(vector_columns("x", x), vector_columns("wulff", image))), summary)
    if args.plot:
        fig = Figure(f"Wulff frontal of {summary['gamma']}")
        closed = np.concatenate([image[..., :2], image[:1, :2]]) if n == 1 else image[..., :2]
        fig.polyline(closed)
        fig.save(args.plot)
    return EXIT_OK


def cmd_catalog_list(args) -> int:
    for name in names():
        print(f"{name:18s} {describe(name)}")
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "envelope": cmd_envelope,
    "verify": cmd_verify,
    "e1": cmd_e1,
    "orthotomic": cmd_optics,
    "anti-orthotomic": cmd_optics,
    "pedal": cmd_optics,
    "wulff": cmd_wulff,
    "catalog-list": cmd_catalog_list,
}


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("ENVFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, SceneError, ParseError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"envforge: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except EnvforgeError as exc:
        print(f"envforge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
