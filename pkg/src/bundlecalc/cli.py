"""Command line front end.

Every subcommand prints a JSON report on stdout and a short log on stderr.
Exit status is 0 when all checks pass, 1 on bad input or usage and 2 when a
numeric check fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from . import bundle as bd
from . import checks
from . import constructions as cs
from . import mspace as ms
from . import nmodule as nm
from .errors import BundleCalcError, InstanceError
from .serialize import (FORMAT_VERSION, bundle_to_json, dumps, load_instance, module_to_json,
                        section_to_json)

log = logging.getLogger("bundlecalc")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
DEFAULT_SEED = 42


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("{}\n{}".format(self.format_usage().rstrip(), message))


def _default_seed() -> int:
    raw = os.environ.get("BUNDLECALC_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError("BUNDLECALC_SEED must be an integer, got {!r}".format(raw))


def _p_value(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def build_parser(seed_default: int = DEFAULT_SEED) -> argparse.ArgumentParser:
    parser = _Parser(prog="bundlecalc", description="Bundles, normed modules and their sections "
                     "over finite atomic measure spaces.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--timing", action="store_true",
                        help="include wall time in the report (breaks byte-identical output)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("decompose", help="dimensional decomposition of each module")
    p.add_argument("file")
    p.add_argument("--module")
    p = sub.add_parser("reconstruct", help="bundle and pivot chart of each module")
    p.add_argument("file")
    p.add_argument("--module")
    p = sub.add_parser("roundtrip", help="module -> bundle -> module check")
    p.add_argument("file")
    p.add_argument("--module")
    p.add_argument("--seed", type=int, default=seed_default)
    p = sub.add_parser("gamma", help="module of sections of each bundle")
    p.add_argument("file")
    p.add_argument("--bundle")
    p = sub.add_parser("dual", help="dual bundle of each bundle")
    p.add_argument("file")
    p.add_argument("--bundle")
    p = sub.add_parser("tensor", help="tensor product of two Hilbert bundles")
    p.add_argument("file")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p = sub.add_parser("pullback", help="pull a bundle back along an atom map")
    p.add_argument("file")
    p.add_argument("--map", required=True, dest="map_name")
    p.add_argument("--bundle", required=True)
    p.add_argument("--ac", action="store_true", help="absolutely continuous mode")
    p = sub.add_parser("quantize", help="simple-section approximation of each section")
    p.add_argument("file")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--section")
    p = sub.add_parser("dist", help="distance between two fields, elements or sections")
    p.add_argument("kind", choices=["l0", "module", "gamma"])
    p.add_argument("file")
    p.add_argument("a")
    p.add_argument("b")
    p = sub.add_parser("lp", help="Lp norms of module elements")
    p.add_argument("file")
    p.add_argument("--p", type=_p_value, required=True)
    p.add_argument("--element")
    p = sub.add_parser("check", help="run every invariant suite")
    p.add_argument("files", nargs="*")
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--trials", type=int, default=None,
                   help="cap on seeded instances per suite (default: full counts)")
    return parser


def _pick(items: Dict, name: Optional[str], what: str) -> List[Tuple[str, object]]:
    if name is None:
        if not items:
            raise BundleCalcError("no {}s in the instance file".format(what))
        return sorted(items.items())
    if name not in items:
        raise BundleCalcError("unknown {} {!r}".format(what, name))
    return [(name, items[name])]


def _one(items: Dict, name: str, what: str):
    return _pick(items, name, what)[0][1]


def _cmd_decompose(args, inst):
    out = {}
    for name, M in _pick(inst.modules, args.module, "module"):
        dec = nm.decompose(M)
        out[name] = {"dims": list(dec.dims),
                     "pieces": {str(n): sorted(dec.pieces[n]) for n in sorted(dec.pieces)}}
    return {"modules": out}, []


def _cmd_reconstruct(args, inst):
    out = {}
    for name, M in _pick(inst.modules, args.module, "module"):
        b, iso = nm.reconstruct(M)
        out[name] = {"bundle": bundle_to_json(b), "pivots": [list(p) for p in iso.chart.pivots]}
    return {"bundles": out}, []


def _cmd_roundtrip(args, inst):
    results = []
    rng = np.random.default_rng(args.seed)
    for name, M in _pick(inst.modules, args.module, "module"):
        t = checks._Tally("roundtrip:" + name, args.seed, 1e-9)
        extra = [e for mname, e in inst.elements.values() if mname == name]
        checks._module_roundtrip(t, rng, M, extra)
        results.append(t.result())
    return {}, results


def _cmd_gamma(args, inst):
    return {"modules": {name: module_to_json(nm.gamma_module(b))
                        for name, b in _pick(inst.bundles, args.bundle, "bundle")}}, []


def _cmd_dual(args, inst):
    return {"bundles": {name: bundle_to_json(cs.dual_bundle(b))
                        for name, b in _pick(inst.bundles, args.bundle, "bundle")}}, []


def _cmd_tensor(args, inst):
    b1 = _one(inst.bundles, args.left, "bundle")
    b2 = _one(inst.bundles, args.right, "bundle")
    return {"bundle": bundle_to_json(cs.tensor_bundle(b1, b2))}, []


def _cmd_pullback(args, inst):
    f = _one(inst.atom_maps, args.map_name, "atom map")
    bY = _one(inst.bundles, args.bundle, "bundle")
    mode = "ac" if args.ac else "strict"
    fb = cs.pullback_bundle(f, bY, mode)
    sections = {}
    t = checks._Tally("pullback_norms", 0, 0.0)
    for sname, (bname, s) in sorted(inst.sections.items()):
        if bname == args.bundle:
            sections[sname] = section_to_json(cs.pullback_section(f, bY, s, mode), "pullback")
            t.error(cs.pullback_norm_defect(f, bY, s, mode))
    payload = {"bundle": bundle_to_json(fb), "compression_constant": cs.compression_constant(f),
               "mode": mode, "sections": sections}
    return payload, [t.result()] if sections else []


def _cmd_quantize(args, inst):
    if not args.eps > 0:
        raise BundleCalcError("--eps must be positive")
    out, results = {}, []
    for sname, (bname, s) in _pick(inst.sections, args.section, "section"):
        b = inst.bundles[bname]
        q = bd.quantize(b, s, args.eps)
        dist = bd.gamma_distance(b, s, q)
        out[sname] = {"vectors": [list(v) for v in q.vectors], "distance": dist}
        results.append(checks.CheckResult("quantize:" + sname, dist <= args.eps,
                                          max(0.0, dist - args.eps), "exact", 0, 1))
    return {"sections": out}, results


def _cmd_dist(args, inst):
    if args.kind == "l0":
        (sa, fa), (sb, fb) = _one(inst.fields, args.a, "field"), _one(inst.fields, args.b, "field")
        space = inst.spaces[sa]
        if not bd.same_space(space, inst.spaces[sb]):
            raise BundleCalcError("fields live on different spaces")
        value = ms.l0_distance(fa, fb, space)
    elif args.kind == "module":
        (ma, ea), (mb, eb) = _one(inst.elements, args.a, "element"), _one(inst.elements, args.b, "element")
        if ma != mb:
            raise BundleCalcError("elements belong to different modules")
        value = nm.module_distance(inst.modules[ma], ea, eb)
    else:
        (ba, sa), (bb, sb) = _one(inst.sections, args.a, "section"), _one(inst.sections, args.b, "section")
        if ba != bb:
            raise BundleCalcError("sections belong to different bundles")
        value = bd.gamma_distance(inst.bundles[ba], sa, sb)
    return {"kind": args.kind, "distance": value}, []


def _cmd_lp(args, inst):
    if not args.p >= 1:
        raise BundleCalcError("p must be at least 1")
    out = {}
    for ename, (mname, e) in _pick(inst.elements, args.element, "element"):
        M = inst.modules[mname]
        out[ename] = {"norm": nm.lp_norm(M, e, args.p),
                      "member": nm.lp_restriction(M, args.p).contains(e)}
    return {"p": args.p, "elements": out}, []


def _demo_path():
    return resources.files("bundlecalc").joinpath("data", "demo.json")


def _cmd_check(args, inst_list):
    results = checks.run_all(args.seed, args.trials)
    for label, inst in inst_list:
        for r in checks.instance_checks(inst, args.seed):
            results.append(checks.CheckResult("{}#{}".format(label, r.name), r.verdict,
                                              r.max_error, r.method, r.seed, r.count))
    return {}, results


COMMANDS = {
    "decompose": _cmd_decompose, "reconstruct": _cmd_reconstruct, "roundtrip": _cmd_roundtrip,
    "gamma": _cmd_gamma, "dual": _cmd_dual, "tensor": _cmd_tensor, "pullback": _cmd_pullback,
    "quantize": _cmd_quantize, "dist": _cmd_dist, "lp": _cmd_lp,
}


def run_command(argv: Sequence[str]) -> Tuple[Dict, int]:
    """Run one subcommand and return ``(report, exit_code)`` without printing."""
    argv = list(argv)
    start = time.perf_counter()
    report: Dict = {"command": argv, "version": __version__, "format": FORMAT_VERSION}
    try:
        args = build_parser(_default_seed()).parse_args(argv)
        if args.command is None:
            raise UsageError(build_parser().format_usage().rstrip() + "\nmissing command")
        if args.command == "check":
            if args.files:
                loaded = [(os.path.basename(p), load_instance(p)) for p in args.files]
            else:
                demo = json.loads(_demo_path().read_text(encoding="utf-8"))
                loaded = [("demo.json", load_instance(demo))]
            payload, results = _cmd_check(args, loaded)
        else:
            payload, results = COMMANDS[args.command](args, load_instance(args.file))
    except UsageError as exc:
        report["error"] = {"kind": "usage", "message": str(exc)}
        return report, EXIT_INPUT
    except InstanceError as exc:
        report["error"] = {"kind": "instance",
                           "errors": [{"pointer": p or "/", "message": m} for p, m in exc.errors]}
        return report, EXIT_INPUT
    except (BundleCalcError, ValueError) as exc:
        report["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        return report, EXIT_INPUT

    report["result"] = payload
    report["checks"] = [r.as_dict() for r in results]
    passed = all(r.verdict for r in results)
    report["verdict"] = "pass" if passed else "fail"
    if args.timing:
        report["wall_time"] = time.perf_counter() - start
    return report, EXIT_OK if passed else EXIT_NUMERIC


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    argv = sys.argv[1:] if argv is None else argv
    start = time.perf_counter()
    report, code = run_command(argv)
    sys.stdout.write(dumps(report) + "\n")
    sys.stdout.flush()
    err = report.get("error")
    if err is not None:
        if err["kind"] == "usage":
            log.error("%s", err["message"])
        elif err["kind"] == "instance":
            for item in err["errors"]:
                log.error("%s: %s", item["pointer"], item["message"])
        else:
            log.error("%s: %s", err["kind"], err["message"])
    for item in report.get("checks", []):
        if item["verdict"] != "pass":
            log.error("check %s failed (max error %.3g)", item["name"], item["max_error"])
    log.info("%s finished with exit code %d in %.2fs", argv[0] if argv else "bundlecalc", code,
             time.perf_counter() - start)
    return code


if __name__ == "__main__":
    sys.exit(main())
