"""Command-line interface: ``plocal <command> [flags]``.

Exit codes: 0 success, 2 precondition or range violation, 3 underdetermined
differential, 4 internal inconsistency.
"""

from __future__ import annotations

import argparse
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import OutOfRangeError, PLocalError, PreconditionError
from .postnikov import (SEEDED, Layer, PostnikovStage, Space, build_tower, gem_split_check,
                        homotopy_table, k_invariant_order)
from .rational import PartSpec, dim_gap, partition_betti
from .report import Report
from .selfmap import propagate_selfmap
from .serre import em_cohomology, em_solve_result

COMMANDS = ("em", "postnikov", "gem-check", "k-invariant", "selfmap", "betti", "dim-gap", "verify")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plocal", description="p-local topology engine")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--prime", type=int)
    ap.add_argument("--n", type=int)
    ap.add_argument("--m", type=int)
    ap.add_argument("--max-degree", type=int)
    ap.add_argument("--space", choices=("bsl", "bpgl", "bp"), default="bsl")
    ap.add_argument("--rank", type=int)
    ap.add_argument("--truncate", type=int)
    ap.add_argument("--parts")
    ap.add_argument("--target")
    ap.add_argument("--phi2", type=int, default=1, help="residue of φ_2 (selfmap)")
    ap.add_argument("--format", choices=("text", "json", "tsv"), default="text")
    return ap


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise PreconditionError(f"{args.command} requires " + ", ".join(f"--{n}" for n in missing))


def _echo(argv) -> str:
    """The command line without its output-format flag."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--format":
            skip = True
        elif not a.startswith("--format="):
            out.append(a)
    return " ".join(shlex.quote(a) for a in out)


def _space(args) -> Space:
    rank = args.rank if args.rank is not None else args.n
    if rank is None:
        raise PreconditionError(f"{args.command} requires --rank")
    return Space(args.space, rank, args.m if args.space == "bp" else None)


def cmd_em(args, rep: Report):
    _need(args, "n", "prime", "max-degree")
    H = em_cohomology(args.n, args.prime, args.max_degree)
    rep.parameters = {"n": args.n, "max_degree": args.max_degree, "space": f"K(Z,{args.n})"}
    rep.add_cohomology(H)
    if args.n >= 3:
        res = em_solve_result(args.n, args.prime)
        rep.verdicts["differentials"] = [
            {"class": name, "source": f"E^({src[0]},{src[1]})", "page": page}
            for name, (src, page) in sorted(res.kill_pages.items(),
                                            key=lambda kv: (res.base.find(kv[0]).degree, kv[0]))
            if res.base.find(name).degree <= args.max_degree]
        rep.verdicts["max_admissible_degree"] = res.solved_through
        rep.notes.extend(res.notes)


def _stage(args) -> PostnikovStage:
    _need(args, "prime", "truncate")
    return build_tower(_space(args), args.prime, args.truncate, args.max_degree)


def cmd_postnikov(args, rep: Report):
    stage = _stage(args)
    rep.parameters = {"space": stage.space.label, "truncate": stage.level,
                      "cohomology_through": stage.cohomology.cutoff}
    rep.verdicts["layers"] = [{"degree": l.degree, "layer": l.label} for l in stage.layers]
    rep.verdicts["split_checks"] = [{"degree": c.degree, "split": c.verdict, "witness": str(c.witness)}
                                    for c in stage.split_checks]
    rep.verdicts["cohomology_stage"] = f"τ≤{stage.cohomology_level}"
    for rec in stage.k_invariants:
        rep.verdicts["k_invariant"] = _krecord(rec)
    rep.add_cohomology(stage.cohomology)
    rep.notes.extend(stage.notes)
    for c in stage.citations:
        rep.cite(c)


def cmd_gem_check(args, rep: Report):
    stage = _stage(args)
    table = homotopy_table(stage.space, args.prime, stage.space.n * 2 + 1)
    if args.target is not None:
        deg = int(args.target)
    else:
        deg = next((d for d, g in table.nonzero() if d > args.truncate), None)
        if deg is None:
            raise PreconditionError(f"no homotopy above degree {args.truncate} in the Bott range")
    if deg <= stage.cohomology_level:
        raise PreconditionError(f"layer degree {deg} must exceed the stage level")
    base = PostnikovStage(stage.space, stage.prime, stage.cohomology_level, stage.layers,
                          stage.cohomology)
    verdict, witness = gem_split_check(base, Layer(deg, table.group(deg)))
    rep.parameters = {"space": stage.space.label, "stage": f"τ≤{stage.cohomology_level}",
                      "next_layer": deg}
    rep.verdicts = {"split": verdict, "witness": str(witness), "coefficients": str(table.group(deg)),
                    "ambient_degree": deg + 1}
    rep.cite(SEEDED.citation("bott"))


def _krecord(rec):
    return {"level": rec.level, "degree": rec.degree, "order": rec.order, "detected": rec.detected,
            "ambient": str(rec.ambient), "sigma": rec.sigma, "rho": rec.rho,
            "restriction": rec.restriction, "dim_gap": rec.dim_gap,
            "checks": [f"{a}: {b}" for a, b in rec.checks]}


def cmd_k_invariant(args, rep: Report):
    _need(args, "prime")
    rec = k_invariant_order(args.prime)
    rep.parameters = {"space": f"τ≤{2 * args.prime} BSL_{args.prime}"}
    rep.verdicts = _krecord(rec)
    for c in rec.citations:
        rep.cite(c)


def cmd_selfmap(args, rep: Report):
    _need(args, "prime")
    model = propagate_selfmap(args.prime, args.phi2)
    rep.parameters = {"phi_2": args.phi2 % args.prime}
    rep.verdicts = {"conclusions": model.conclusions(),
                    "trace": [{"fact": s.fact, "justification": s.justification,
                               "cites": list(s.cites)} for s in model.trace]}
    used = {c for step in model.trace for c in step.cites}
    if "epsilon" in used:
        rep.cite(SEEDED.citation("epsilon"))
    if "bott_iso" in used:
        rep.cite(SEEDED.citation("bott"))
    if f"k_invariant_order({args.prime})" in used:
        rep.cite(SEEDED.citation("bsl_cohomology"))


def cmd_betti(args, rep: Report):
    _need(args, "parts", "max-degree")
    parts = PartSpec.parse(args.parts)
    rep.prime = None
    rep.parameters = {"parts": args.parts}
    for k in range(0, args.max_degree // 2 + 1):
        rep.groups.append((2 * k, partition_betti(parts, k), (), ()))


def cmd_dim_gap(args, rep: Report):
    _need(args, "m", "n")
    gap = dim_gap(args.m, args.n)
    rep.prime = None
    rep.parameters = {"m": args.m, "n": args.n, "degree": 2 * args.m + 2}
    rep.verdicts = {"gap": gap,
                    "no_canonical_factorization": gap > 0,
                    "premises": [f"dim H^{2 * args.m + 2}(BP({args.m},{args.n}); Q) − "
                                 f"dim H^{2 * args.m + 2}(BPGL_{args.m}; Q) = {gap}",
                                 "self-map dichotomy (seeded)"]}
    rep.cite(SEEDED.citation("selfmap_dichotomy"))


HANDLERS = {"em": cmd_em, "postnikov": cmd_postnikov, "gem-check": cmd_gem_check,
            "k-invariant": cmd_k_invariant, "selfmap": cmd_selfmap, "betti": cmd_betti,
            "dim-gap": cmd_dim_gap}


def run(argv) -> tuple[Report | None, int, str]:
    """Execute one command; returns (report, exit code, message)."""
    args = build_parser().parse_args(argv)
    rep = Report(_echo(argv), args.prime)
    try:
        HANDLERS[args.command](args, rep)
    except OutOfRangeError as e:
        extra = ""
        if e.max_admissible is not None and "maximal admissible" not in str(e):
            extra = f" (maximal admissible degree: {e.max_admissible})"
        return None, e.exit_code, f"error: {e}{extra}"
    except PLocalError as e:
        return None, e.exit_code, f"error: {e}"
    return rep, 0, ""


def render(argv) -> tuple[int, str, str]:
    rep, code, msg = run(argv)
    if rep is None:
        return code, "", msg
    fmt = build_parser().parse_args(argv).format
    return 0, rep.render(fmt), ""


# ---------------------------------------------------------------------------
# golden files


def _golden_check(path: Path) -> tuple[str, bool, str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        return path.name, False, f"cannot read: {e}"
    first = text.split("\n", 1)[0]
    if not first.startswith("# "):
        return path.name, False, "missing '# <command>' header line"
    argv = shlex.split(first[2:]) + ["--format", "tsv"]
    code, out, msg = render(argv)
    if code:
        return path.name, False, msg
    if out == text:
        return path.name, True, ""
    import difflib
    diff = "".join(difflib.unified_diff(text.splitlines(True), out.splitlines(True),
                                        "golden/" + path.name, "recomputed"))
    return path.name, False, diff


def verify_golden(directory) -> tuple[int, str]:
    d = Path(directory)
    if not d.is_dir():
        return 1, f"FAIL: golden directory {d} does not exist\n"
    files = sorted(d.glob("*.tsv"))
    if not files:
        return 0, f"warning: no golden files in {d}; vacuous pass\n"
    with ThreadPoolExecutor() as pool:
        results = list(pool.map(_golden_check, files))
    lines = []
    for name, ok, detail in results:
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}")
        if not ok and detail:
            lines.append(detail.rstrip("\n"))
    failed = sum(1 for _, ok, _ in results if not ok)
    lines.append(f"{len(results) - failed}/{len(results)} golden files match")
    return (1 if failed else 0), "\n".join(lines) + "\n"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "verify":
        args = build_parser().parse_args(argv)
        code, text = verify_golden(args.target or "golden")
        sys.stdout.write(text)
        return code
    code, out, msg = render(argv)
    if code:
        sys.stderr.write(msg + "\n")
        return code
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
