"""Command-line front end: ``gptw check | reconstruct | builtin``.

Exit codes: 0 all pass, 1 at least one fail, 2 inconclusive (and no fail),
3 input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from importlib import resources

import jsonschema
import numpy as np

from .postulates import POSTULATE_IDS, reconstruct_pipeline, run_checks
from .theories import UnknownTheoryError, builtin, theory_from_document

SCHEMA_VERSION = "gptw-report/1"
EXIT = {"pass": 0, "fail": 1, "inconclusive": 2}
INPUT_ERROR = 3
DEFAULT_SAMPLES = 10_000
DEFAULT_TOL = 1e-9


class InputError(Exception):
    pass


def load_schema(name: str) -> dict:
    return json.loads(resources.files("gptw").joinpath("schemas", f"{name}.schema.json").read_text())


# ------------------------------------------------------------------ JSON positions


def _positions(text: str) -> dict[tuple, int]:
    """Offsets of every value in a JSON text, keyed by path."""
    dec = json.JSONDecoder()
    out: dict[tuple, int] = {}
    ws = " \t\n\r"

    def skip(i):
        while i < len(text) and text[i] in ws:
            i += 1
        return i

    def value(i, path):
        i = skip(i)
        out[path] = i
        ch = text[i]
        if ch == "{":
            i = skip(i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = dec.raw_decode(text, skip(i))
                i = skip(i) + 1  # colon
                i = skip(value(i, path + (key,)))
                if text[i] == "}":
                    return i + 1
                i += 1
        if ch == "[":
            i = skip(i + 1)
            if text[i] == "]":
                return i + 1
            n = 0
            while True:
                i = skip(value(i, path + (n,)))
                n += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        _, end = dec.raw_decode(text, i)
        return end

    value(0, ())
    return out


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


def read_theory_document(path: str) -> dict:
    """Parse and schema-validate a TheoryDocument; raise InputError with line/column."""
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(load_schema("theory"))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        pos = _positions(text)
        msgs = []
        for err in errors:
            p = tuple(err.absolute_path)
            while p not in pos and p:
                p = p[:-1]
            line, col = _line_col(text, pos.get(p, 0))
            where = "/".join(map(str, err.absolute_path)) or "<root>"
            msgs.append(f"{path}:{line}:{col}: schema violation at {where}: {err.message}")
        raise InputError("\n".join(msgs))
    return doc


# ------------------------------------------------------------------ reports


def _round(x):
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_round(v) for v in x]
    return x


def _check_entry(rep) -> dict:
    d = rep.to_dict()
    return {
        "id": d["postulate"], "status": d["status"], "reason": d["reason"], "witness": d["witness"],
        "residuals": d["residuals"], "tolerance": d["tolerance"], "samples": int(d["samples"]),
        "seed": int(d["seed"]), "duration": round(d["duration"], 3), "details": d["details"],
    }


def overall_status(statuses) -> str:
    statuses = list(statuses)
    if "fail" in statuses:
        return "fail"
    if "inconclusive" in statuses or not statuses:
        return "inconclusive"
    return "pass"


def build_check_report(theory, postulates, samples, seed, tol) -> dict:
    reps = run_checks(theory, postulates, samples, seed)
    checks = [_check_entry(r) for r in reps]
    return _round({
        "schema_version": SCHEMA_VERSION, "command": "check", "theory": theory.name,
        "settings": {"samples": samples, "seed": seed, "tolerance": tol, "postulates": list(postulates)},
        "status": overall_status(c["status"] for c in checks), "checks": checks,
    })


def build_reconstruct_report(theory, samples, seed, tol) -> dict:
    res = reconstruct_pipeline(theory, samples, seed)
    checks = [_check_entry(r) for r in res.reports]
    out = {
        "schema_version": SCHEMA_VERSION, "command": "reconstruct", "theory": theory.name,
        "settings": {"samples": samples, "seed": seed, "tolerance": tol},
        "status": overall_status(c["status"] for c in checks) if res.passed or res.stopped_at else "inconclusive",
        "stopped_at": res.stopped_at, "checks": checks,
    }
    if res.passed:
        L = res.frame_map
        out["equivalence"] = {
            "target": "qubit", "L": L.tolist(), "condition_number": float(np.linalg.cond(L)),
            "density_map": "rho = (x0 I + x1 X + x2 Y + x3 Z) / 2 with x = L w",
        }
    return _round(out)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def render_markdown(report: dict) -> str:
    """Markdown view of a ReportDocument. Depends on nothing but ``report``."""
    s = report["settings"]
    lines = [f"# {report['command']}: {report['theory']}", "",
             f"Overall status: **{report['status']}**  ",
             f"samples = {s['samples']}, seed = {s['seed']}, tolerance = {s['tolerance']}", "",
             "| check | status | reason | residuals | time (s) |", "|---|---|---|---|---|"]
    for c in report["checks"]:
        res = ", ".join(f"{k} = {_fmt(v)}" for k, v in c["residuals"].items())
        lines.append(f"| {c['id']} | {c['status']} | {c['reason']} | {res} | {c['duration']:.2f} |")
    wit = [c for c in report["checks"] if c["status"] == "fail"]
    for c in wit:
        lines += ["", f"## Witness for `{c['id']}`", "", "```json",
                  json.dumps(c["witness"], indent=1, sort_keys=True), "```"]
    if "equivalence" in report:
        eq = report["equivalence"]
        lines += ["", "## Equivalence to the qubit", "",
                  f"condition number of L: {eq['condition_number']:.6g}", "", "```",
                  *("  ".join(f"{x: .6f}" for x in row) for row in eq["L"]), "```"]
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".gptw-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit(report: dict, args) -> None:
    jsonschema.validate(report, load_schema("report"))
    text = dump(report)
    if args.out:
        write_atomic(args.out, text)
    if args.markdown:
        sys.stdout.write(render_markdown(report))
    elif not args.out:
        sys.stdout.write(text)


# ------------------------------------------------------------------ commands


def _default_seed(doc: dict | None = None) -> int:
    env = os.environ.get("GPTW_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise InputError(f"GPTW_SEED must be an integer, got {env!r}") from exc
    if doc and "seed" in doc:
        return int(doc["seed"])
    return 0


def _load(args) -> tuple:
    doc = read_theory_document(args.path)
    if args.tol is not None:
        doc["tolerance"] = args.tol
    seed = args.seed if args.seed is not None else _default_seed(doc)
    try:
        theory = theory_from_document(doc)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise InputError(f"{args.path}: {exc}") from exc
    return theory, seed, float(doc.get("tolerance", DEFAULT_TOL))


def cmd_check(args) -> int:
    theory, seed, tol = _load(args)
    posts = tuple(args.postulates.split(",")) if args.postulates else POSTULATE_IDS
    bad = [p for p in posts if p not in POSTULATE_IDS]
    if bad:
        raise InputError(f"unknown postulate ids {bad}; choose from {', '.join(POSTULATE_IDS)}")
    report = build_check_report(theory, posts, args.samples, seed, tol)
    _emit(report, args)
    return EXIT[report["status"]]


def cmd_reconstruct(args) -> int:
    theory, seed, tol = _load(args)
    report = build_reconstruct_report(theory, args.samples, seed, tol)
    _emit(report, args)
    return EXIT[report["status"]]


def cmd_builtin(args) -> int:
    try:
        th = builtin(args.name)
    except UnknownTheoryError as exc:
        raise InputError(str(exc)) from exc
    doc = th.to_document(seed=_default_seed())
    jsonschema.validate(doc, load_schema("theory"))
    text = dump(doc)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gptw", description="Check GPT postulates and reconstruct the qubit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("path", help="TheoryDocument JSON file, or - for stdin")
        sp.add_argument("--seed", type=int, default=None, help="default: $GPTW_SEED, then the document, then 0")
        sp.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
        sp.add_argument("--tol", type=float, default=None, help="override the document tolerance")
        sp.add_argument("--out", help="write the JSON report here (atomically)")
        sp.add_argument("--markdown", action="store_true", help="print a markdown summary to stdout")

    c = sub.add_parser("check", help="run postulate checks on a theory document")
    common(c)
    c.add_argument("--postulates", help=f"comma-separated subset of {','.join(POSTULATE_IDS)}")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("reconstruct", help="run the reconstruction pipeline")
    common(r)
    r.set_defaults(func=cmd_reconstruct)

    b = sub.add_parser("builtin", help="write the document of a built-in theory")
    b.add_argument("name")
    b.add_argument("--out")
    b.set_defaults(func=cmd_builtin)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else 0
    try:
        if getattr(args, "samples", 1) < 1:
            raise InputError("--samples must be positive")
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
