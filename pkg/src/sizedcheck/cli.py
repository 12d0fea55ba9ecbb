"""Batch driver: check files, run eval lets, run the golden corpus.

Exit codes: 0 full success, 1 language-level rejection, 2 environment
failure (unreadable file, malformed expectation)."""

from __future__ import annotations

import argparse
import difflib
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .checker import Checker
from .diagnostics import Diagnostic
from .parser import ParseError, parse_source
from .scope import ScopeError, scope_check
from .signature import FunEntry, Signature


@dataclass
class RunConfig:
    paths: list[str]
    mode: str = "check"  # check | golden
    print_constraints: bool = False
    print_sizes: bool = False
    explain_totality: str | None = None
    unfold_fuel: int = 100_000
    print_depth: int = 3


@dataclass
class GoldenCase:
    source: Path
    expectation: Path


@dataclass
class CheckResult:
    signature: Signature | None
    outputs: list[str]
    constraint_dump: list[str]
    diagnostic: Diagnostic | None


def check_source(source: str, filename: str, cfg: RunConfig | None = None) -> CheckResult:
    cfg = cfg or RunConfig([])
    try:
        decls = scope_check(parse_source(source))
        checker = Checker(
            unfold_fuel=cfg.unfold_fuel,
            print_depth=cfg.print_depth,
            print_sizes=cfg.print_sizes,
            collect_constraints=cfg.print_constraints,
        )
        sig, outputs = checker.check_program(decls)
        return CheckResult(sig, outputs, checker.constraint_dump, None)
    except ParseError as e:
        d = Diagnostic("PARSE", e.message, (e.line, e.col), filename)
        return CheckResult(None, [], [], d)
    except ScopeError as e:
        d = Diagnostic(e.code, e.message, e.pos, filename)
        return CheckResult(None, [], [], d)
    except Diagnostic as d:
        d.file = filename
        return CheckResult(None, [], [], d)


def run_check(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    status = 0
    for path in cfg.paths:
        try:
            source = Path(path).read_text()
        except OSError as e:
            print(f"error: cannot read {path}: {e}", file=err)
            return 2
        result = check_source(source, path, cfg)
        if result.diagnostic is not None:
            print(result.diagnostic.render(), file=err)
            status = max(status, 1)
            continue
        for line in result.constraint_dump:
            print(line, file=out)
        if cfg.explain_totality:
            entry = result.signature.lookup_text(cfg.explain_totality)
            if isinstance(entry, FunEntry) and entry.report is not None:
                print(entry.report.render(), file=out)
        for line in result.outputs:
            print(line, file=out)
    return status


def collect_golden(root: Path) -> list[GoldenCase]:
    cases = []
    for sub in ("accept", "reject"):
        d = root / sub
        if not d.is_dir():
            continue
        for src in sorted(d.glob("*.ma")):
            cases.append(GoldenCase(src, src.with_suffix(".expect")))
    return cases


def run_golden(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    root = Path(cfg.paths[0])
    cases = collect_golden(root)
    if not cases:
        print(f"error: no golden cases under {root}", file=err)
        return 2
    failures = 0
    for case in cases:
        name = case.source.stem
        try:
            expect = case.expectation.read_text()
        except OSError as e:
            print(f"error: missing expectation for {name}: {e}", file=err)
            return 2
        lines = expect.splitlines()
        if not lines:
            print(f"error: empty expectation file {case.expectation}", file=err)
            return 2
        header = lines[0].split()
        result = check_source(case.source.read_text(), str(case.source), cfg)
        ok, detail = False, ""
        if header[0] == "ACCEPT":
            want = "\n".join(lines[1:])
            if result.diagnostic is not None:
                detail = f"expected success, got {result.diagnostic.render()}"
            else:
                got = "\n".join(result.outputs)
                if got == want:
                    ok = True
                else:
                    diff = difflib.unified_diff(
                        want.splitlines(), got.splitlines(),
                        "expected", "actual", lineterm="",
                    )
                    detail = "eval output drifted:\n" + "\n".join(diff)
        elif header[0] == "REJECT" and len(header) == 2:
            if result.diagnostic is None:
                detail = f"expected {header[1]}, got success"
            elif result.diagnostic.code != header[1]:
                detail = (
                    f"expected {header[1]}, got {result.diagnostic.code} "
                    f"({result.diagnostic.message})"
                )
            else:
                ok = True
        else:
            print(f"error: malformed expectation {case.expectation}", file=err)
            return 2
        if ok:
            print(f"PASS {name}", file=out)
        else:
            print(f"FAIL {name}: {detail}", file=out)
            failures += 1
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="sizedcheck",
        description="Type checker, totality checker and evaluator for a "
        "dependently typed core language with sized types.",
    )
    sub = ap.add_subparsers(dest="mode", required=True)

    def common(p):
        p.add_argument("--print-constraints", action="store_true",
                       help="dump each clause's size constraints")
        p.add_argument("--print-sizes", action="store_true",
                       help="show erased size arguments in eval output")
        p.add_argument("--explain-totality", metavar="NAME",
                       help="print the call graph and rule justifying NAME")
        p.add_argument("--unfold-fuel", type=int, default=100_000, metavar="N",
                       help="unfold budget per evaluation/conversion")
        p.add_argument("--print-depth", type=int, default=3, metavar="N",
                       help="coconstructor layers printed before eliding")

    pc = sub.add_parser("check", help="check files and run their eval lets")
    pc.add_argument("files", nargs="+", metavar="FILE")
    common(pc)
    pg = sub.add_parser("golden", help="run an accept/reject corpus")
    pg.add_argument("dir", metavar="DIR")
    common(pg)

    ns = ap.parse_args(argv)
    if ns.unfold_fuel < 1 or ns.print_depth < 0:
        ap.error("--unfold-fuel must be >= 1 and --print-depth >= 0")
    cfg = RunConfig(
        paths=ns.files if ns.mode == "check" else [ns.dir],
        mode=ns.mode,
        print_constraints=ns.print_constraints,
        print_sizes=ns.print_sizes,
        explain_totality=ns.explain_totality,
        unfold_fuel=ns.unfold_fuel,
        print_depth=ns.print_depth,
    )
    if ns.mode == "check":
        return run_check(cfg)
    return run_golden(cfg)


if __name__ == "__main__":
    sys.exit(main())
