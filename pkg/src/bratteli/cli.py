"""Command-line front end: ``bratteli <command> --spec FILE ...``.

Exit status is 0 on success or a certified verdict, 2 when a verdict is
undetermined or negative, and 1 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import catalog
from .diagram import (
    ers_check,
    float_heights,
    heights,
    materialize,
    stochastic_matrix,
    stochastic_matrix_float,
    structural_warnings,
    telescope,
)
from .errors import BratteliError, InvalidDiagramError, SpecSyntaxError
from .spec import load_spec

EXIT_OK, EXIT_INPUT, EXIT_UNDETERMINED = 0, 1, 2


def jsonable(obj):
    """Plain JSON data with rationals as "num/den" strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return sorted(jsonable(x) for x in obj)
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if not f.name.startswith("_")}
    return str(obj)


def dumps(data) -> str:
    return json.dumps(jsonable(data), sort_keys=True, indent=2) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([jsonable(x) for x in r])
    return buf.getvalue()


def _diagram(args, depth=None):
    spec = load_spec(args.spec)
    depth = depth or args.depth or spec.depth or min(8, spec.max_depth or 8)
    return materialize(spec, depth, exact=args.mode == "exact")


def _json_arg(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(f"{what}: {exc.msg}", exc.lineno, exc.colno) from None


# ---------------------------------------------------------------------------
# commands; each returns (payload, exit code) where payload is data or text


def cmd_validate(args):
    d = _diagram(args)
    return {
        "valid": True,
        "depth": d.depth,
        "vertices": [d.width(n) for n in range(1, d.depth + 1)],
        "ers": ers_check(d) if args.mode == "exact" else None,
        "warnings": structural_warnings(d),
    }, EXIT_OK


def cmd_heights(args):
    d = _diagram(args)
    levels = [args.level] if args.level else range(1, d.depth + 1)
    if args.mode == "float":
        # float heights overflow quickly, so they are reported scaled to max 1
        return {"heights_scaled": {str(n): [float(x) for x in float_heights(d, n)] for n in levels}}, EXIT_OK
    else:
        out = {str(n): list(heights(d, n)) for n in levels}
    return {"heights": out}, EXIT_OK


def cmd_stochastic(args):
    level = args.level or 1
    d = _diagram(args, max(level + 1, args.depth or 0))
    if args.mode == "float":
        return stochastic_matrix_float(d, level).tolist(), EXIT_OK
    return stochastic_matrix(d, level), EXIT_OK


def cmd_telescope(args):
    levels = [int(x) for x in args.levels.split(",")]
    d = _diagram(args, max(levels[-1], args.depth or 0))
    t = telescope(d, levels)
    return {"levels": levels, "root": [r[0] for r in t.matrices[0]], "matrices": list(t.matrices[1:])}, EXIT_OK


def cmd_simplex(args):
    from .simplex import cluster_extremes, diameter_series

    n, m = args.level or 1, args.m
    d = _diagram(args, max(n + m + 1, args.depth or 0))
    if args.mode == "float":
        series = _float_diameters(d, n, m)
    else:
        series = diameter_series(d, n, m)
    if args.format == "csv":
        if args.vertices:
            return _vertex_csv(d, n, m), EXIT_OK
        if args.mode == "float":
            return _csv(["step", "diameter_float"], series), EXIT_OK
        return _csv(["step", "diameter_num", "diameter_den"], [(k, v.numerator, v.denominator) for k, v in series]), EXIT_OK
    out = {"n": n, "series": [{"m": k, "diameter": v} for k, v in series]}
    if args.mode == "exact":
        report = cluster_extremes(d, n, m, Fraction(args.gap_ratio))
        out["clusters"] = _cluster_dict(report)
    return out, EXIT_OK


def _vertex_csv(d, n, m_max) -> str:
    from .simplex import polytope

    rows = []
    for k in range(m_max + 1):
        poly = polytope(d, n, k)
        for v, vec in zip(poly.tags, poly.vectors):
            for i, x in enumerate(vec):
                x = Fraction(x)
                rows.append((n, k, v, i, x.numerator, x.denominator))
    return _csv(["level", "step", "vertex", "coord_index", "numerator", "denominator"], rows)


def _float_diameters(d, n, m_max):
    out = []
    g = stochastic_matrix_float(d, n)
    for m in range(0, m_max + 1):
        if m:
            g = stochastic_matrix_float(d, n + m) @ g
        diffs = np.abs(g[:, None, :] - g[None, :, :]).sum(axis=2)
        out.append((m, float(diffs.max())))
    return out


def _cluster_dict(report):
    return {
        "count": report.count,
        "separated": report.separated,
        "gap": report.gap,
        "max_diameter": report.max_diameter,
        "gap_ratio": report.gap_ratio,
        "clusters": [{"members": c.members, "centroid": c.centroid, "diameter": c.diameter} for c in report.clusters],
    }


def cmd_unique(args):
    from .ergodicity import default_schedule, replay_certificate, unique_ergodicity_search

    d = _diagram(args)
    sched = default_schedule(args.eps_count)
    v = unique_ergodicity_search(d, sched, args.budget)
    out = v.to_dict()
    if v.certified:
        ok, gaps = replay_certificate(d, v.certificate)
        out["replay"] = {"ok": ok, "gaps": gaps}
    return out, EXIT_OK if v.certified else EXIT_UNDETERMINED


def cmd_count(args):
    from .simplex import cluster_extremes

    n, m = args.level or 1, args.m
    d = _diagram(args, max(n + m + 1, args.depth or 0))
    report = cluster_extremes(d, n, m, Fraction(args.gap_ratio))
    return _cluster_dict(report), EXIT_OK if report.separated else EXIT_UNDETERMINED


def _partition(text):
    from .ergodicity import Partition

    blocks = _json_arg(text, "--blocks")
    if not isinstance(blocks, list) or not blocks:
        raise SpecSyntaxError("--blocks must be a JSON list of blocks")
    if all(isinstance(b, list) and all(isinstance(x, int) for x in b) for b in blocks):
        return Partition.constant(blocks)
    # per-level form: a list (level 1, 2, ...) of block lists; the last repeats
    table = {n: level for n, level in enumerate(blocks, start=1)}
    return Partition.from_levels(table)


def cmd_main1(args):
    from .ergodicity import check_main1, subdiagram_unique_ergodicity

    d = _diagram(args)
    part = _partition(args.blocks)
    window = args.window or d.depth - 1
    report = check_main1(d, part, window)
    report["subdiagrams"] = [subdiagram_unique_ergodicity(d, part, j, window) for j in range(1, report["blocks"] + 1)]
    return report, EXIT_OK


def cmd_chains(args):
    from .ergodicity import NoAdmissiblePartition, chain_partition_search
    from .subdiagram import chain_partition, extension_finiteness
    from .ergodicity import subdiagram_unique_ergodicity

    d = _diagram(args, max(args.window + 1, args.depth or 0))
    found = chain_partition_search(d, args.window, Fraction(args.gap_ratio))
    if isinstance(found, NoAdmissiblePartition):
        return {"result": "NoAdmissiblePartition", "condition": found.condition, "witness": found.witness}, EXIT_UNDETERMINED
    chains = []
    for chain in found.chains():
        sets = found.chain_sets(chain)
        part = chain_partition(found, chain)
        # the chain repeats its last block, so look twice as far to see the tail
        reach = 2 * (len(sets) - 1)
        tail = [part.blocks(n, d.width(len(sets)))[0] for n in range(1, reach + 2)]
        chains.append(
            {
                "chain": chain,
                "sets": sets,
                "extension": extension_finiteness(d, tail, reach),
                "unique": subdiagram_unique_ergodicity(d, part, 1, reach),
            }
        )
    return {"result": "ChainStructure", "conditions": found.conditions, "chains": chains}, EXIT_OK


def cmd_stationary(args):
    from .stationary import class_graph, classify_classes, cross_validate, distinguished_measure

    d = _diagram(args)
    spec = d.spec
    matrix = spec.matrix if spec.generator == "stationary" else d.matrices[1]
    g = class_graph(matrix)
    statuses = classify_classes(g)
    classes = []
    for s in statuses:
        rho = g.radii[s.index]
        item = {
            "vertices": s.vertices,
            "status": s.status,
            "blocking": [g.classes[b] for b in s.blocking],
            "spectral_radius_float": rho.value,
            "spectral_radius_exact": rho.exact,
            "below": [g.classes[b] for b in sorted(g.below[s.index])],
        }
        if s.status == "distinguished":
            mu = distinguished_measure(d, s.index, g)
            item["measure"] = {"x": mu.x, "exact": mu.exact, "trace_level1": mu.tower_masses(d, 1)}
            if not mu.exact:
                item["measure"]["residual_float"] = mu.residual
        classes.append(item)
    out = {"classes": classes}
    if args.m:
        out["cross_validation"] = cross_validate(d, args.m, 3, Fraction(args.gap_ratio))
    code = EXIT_UNDETERMINED if any(s.status == "indeterminate" for s in statuses) else EXIT_OK
    return out, code


def cmd_extend(args):
    from .subdiagram import extension_finiteness, extension_mass, restrict, single_vertex_trace

    d = _diagram(args)
    W = _json_arg(args.W, "--W")
    v = extension_finiteness(d, W, d.depth - 1)
    out = {"finiteness": v}
    sub = restrict(d, W, d.depth)
    if all(len(s) == 1 for s in sub.sets):
        em = extension_mass(d, W, single_vertex_trace(sub), d.depth)
        out["mass"] = {"masses": em.masses, "nondecreasing": em.nondecreasing, "flag": em.flag}
    return out, EXIT_OK if v.certified else EXIT_UNDETERMINED


def cmd_code(args):
    from .symbolic import code_orbit, consecutive_order, extremal_path, format_word, ordered_diagram

    d = _diagram(args)
    od = ordered_diagram(d, consecutive=False) if args.raw_order else consecutive_order(d)
    if args.path:
        path = [tuple(e) for e in _json_arg(args.path, "--path")]
    else:
        path = extremal_path(od, args.level or 1, args.vertex, "min")
    win = code_orbit(od, args.n0, path, args.radius)
    if args.format in ("text", "compact"):
        return format_word(win.word, compact=args.format == "compact") + "\n", EXIT_OK
    return {"word": win.word, "start_path": win.start_path, "max_radius": win.max_radius}, EXIT_OK


def cmd_toeplitz(args):
    from .symbolic import format_word
    from .toeplitz import ToeplitzSeed, first_stage_for, symbol_families, toeplitz_window

    spec = load_spec(args.spec)
    if spec.generator != "ers-toeplitz":
        raise SpecSyntaxError("toeplitz needs an ers-toeplitz spec")
    seed = ToeplitzSeed.from_params(spec.params)
    stage = args.stage if args.stage is not None else first_stage_for(seed, args.radius)
    word = toeplitz_window(seed, stage, args.radius)
    if args.format in ("text", "compact"):
        return format_word(word, compact=args.format == "compact") + "\n", EXIT_OK
    st = seed.stage(stage)
    depth = args.depth or spec.depth or 4
    fam = symbol_families(seed, depth)
    return {
        "stage": stage,
        "radius": args.radius,
        "window": word,
        "p": st.p,
        "first_hole": st.l,
        "last_hole": st.k,
        "stable_next_stage": toeplitz_window(seed, stage + 1, args.radius) == word,
        "symbols_per_level": [len(w) for w in fam.words],
    }, EXIT_OK


def cmd_catalog(args):
    if args.action == "list":
        return {name: catalog.entry(name).description for name in catalog.names()}, EXIT_OK
    if not args.name:
        raise SpecSyntaxError("catalog emit needs an entry name")
    return catalog.emit(args.name), EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors, so they exit 1 rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="diagram spec file (JSON)")
    common.add_argument("--depth", type=int, help="levels to materialize")
    common.add_argument("--mode", choices=("exact", "float"), default="exact")
    common.add_argument("--budget", type=int, default=64, help="largest telescoping step m")
    common.add_argument("--gap-ratio", default="10", help="cluster separation ratio")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text", "compact"), default="json")

    p = _Parser(prog="bratteli", description="Invariant measures of Bratteli diagrams.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, spec=True):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(fn=fn, needs_spec=spec)
        return sp

    add("validate", cmd_validate, "check a spec and report structure")
    add("heights", cmd_heights, "tower heights").add_argument("--level", type=int)
    add("stochastic", cmd_stochastic, "stochastic matrix F_n").add_argument("--level", type=int)
    add("telescope", cmd_telescope, "telescope to given levels").add_argument("--levels", required=True, help="e.g. 0,2,5")
    sp = add("simplex", cmd_simplex, "polytope diameters and clusters")
    sp.add_argument("--level", type=int)
    sp.add_argument("--m", type=int, default=20)
    sp.add_argument("--vertices", action="store_true", help="with --format csv, emit polytope vertices")
    sp = add("unique", cmd_unique, "search for a unique-ergodicity certificate")
    sp.add_argument("--eps-count", type=int, default=10, help="schedule 2^-k for k up to this")
    sp = add("count", cmd_count, "count extreme clusters")
    sp.add_argument("--level", type=int)
    sp.add_argument("--m", type=int, default=25)
    sp = add("main1", cmd_main1, "finite-rank partition conditions")
    sp.add_argument("--blocks", required=True, help="JSON blocks, e.g. [[0],[1]]")
    sp.add_argument("--window", type=int)
    add("chains", cmd_chains, "chain partition search").add_argument("--window", type=int, default=8)
    add("stationary", cmd_stationary, "classes and distinguished measures").add_argument("--m", type=int, help="cross-validate at this m")
    add("extend", cmd_extend, "measure extension tests").add_argument("--W", required=True, help="JSON vertex selection")
    sp = add("code", cmd_code, "code a Vershik orbit window")
    sp.add_argument("--n0", type=int, default=1)
    sp.add_argument("--radius", type=int, default=5)
    sp.add_argument("--path", help="JSON list of [vertex, position] pairs")
    sp.add_argument("--level", type=int)
    sp.add_argument("--vertex", type=int, default=0)
    sp.add_argument("--raw-order", action="store_true", help="accept non-consecutive orders")
    sp = add("toeplitz", cmd_toeplitz, "central window of the Toeplitz sequence")
    sp.add_argument("--stage", type=int)
    sp.add_argument("--radius", type=int, default=5)
    sp = add("catalog", cmd_catalog, "built-in examples", spec=False)
    sp.add_argument("action", choices=("list", "emit"))
    sp.add_argument("name", nargs="?")
    return p


def main(argv=None) -> int:
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.needs_spec and not args.spec:
        parser.error(f"{args.command} needs --spec")
    try:
        payload, code = args.fn(args)
    except InvalidDiagramError as exc:
        where = f" (level {exc.level}" + (f", vertex {exc.index})" if exc.index is not None else ")") if exc.level is not None else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return EXIT_INPUT
    except (BratteliError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = payload if isinstance(payload, str) else dumps(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
