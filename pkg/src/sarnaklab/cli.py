"""Command-line front end: ``sarnaklab <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from . import complexity as cx
from . import correlations as co
from . import dynamics as dy
from . import nilap as nl
from .averages import WeightSpec, weighted_average
from .errors import SchemaError
from .records import (SCHEMA_VERSION, ResultRecord, ResultStore, read_csv, read_json,
                      records_from, write_csv, write_json)
from .sieve import SieveConfig, TableCache, default_cache_dir

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_help()}\n{self.prog}: error: {message}")


def parse_count(text: str) -> int:
    """Positive integer, scientific notation allowed ("1e8")."""
    try:
        v = float(text) if any(c in text.lower() for c in ".e") else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(v)


def parse_count_list(text: str) -> list[int]:
    return [parse_count(t) for t in text.split(",") if t.strip()]


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of integers, got {text!r}") from None


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    table_cache_keys: list = field(default_factory=list)
    output_paths: list = field(default_factory=list)
    wall_time: float = 0.0
    code_version: str = __version__
    schema_version: int = SCHEMA_VERSION

    def dumps(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1) + "\n"

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        doc = json.loads(Path(path).read_text())
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(f"{path}: schema version {doc.get('schema_version')} != {SCHEMA_VERSION}")
        return cls(**doc)


class _Context:
    """Per-run state: the parsed arguments, table cache and result store."""

    def __init__(self, args):
        self.args = args
        cache_dir = default_cache_dir()
        self.cache = TableCache(cache_dir, SieveConfig(worker_count=args.workers))
        self.store = None if args.no_store else ResultStore(cache_dir / "results")
        self.table_keys: list[str] = []
        self.params = {k: v for k, v in sorted(vars(args).items())
                       if k not in ("func", "out", "no_store", "no_build")}
        if getattr(args, "coefficients", None):
            # the file's content, so the manifest alone pins the run
            self.params["coefficients_content"] = json.loads(Path(args.coefficients).read_text())

    def table(self, kind: str, bound: int):
        self.table_keys.append(f"{kind}_{bound}")
        return self.cache.get(kind, bound, build=not self.args.no_build)

    def memo(self, key: dict, compute) -> dict:
        return compute() if self.store is None else self.store.memo(key, compute)


# -- subcommands ------------------------------------------------------------

def cmd_sieve(ctx: _Context) -> list[ResultRecord]:
    a = ctx.args
    rows = []
    for N in a.N:
        t = ctx.table(a.table, N)
        v = t.values[1:]
        rows.append({"table": a.table, "N": N, "minus": int((v == -1).sum()),
                     "zero": int((v == 0).sum()), "plus": int((v == 1).sum()),
                     "sha256": hashlib.sha256(t.payload.tobytes()).hexdigest()})
    return records_from("sieve", rows, ctx.params)


def cmd_corr(ctx: _Context) -> list[ResultRecord]:
    a = ctx.args
    pat = co.ShiftPattern(tuple(a.shifts))
    t = ctx.table(a.table, max(a.N) + max(abs(h) for h in pat.shifts))
    weight = WeightSpec.unit() if a.alpha is None else WeightSpec.linear(dy.parse_alpha(a.alpha))
    alpha = "" if a.alpha is None else repr(weight.alpha)
    rows = []
    for N in a.N:
        key = {"op": "corr", "table": a.table, "shifts": list(pat.shifts), "N": N,
               "avg": a.avg, "alpha": alpha}

        def compute():
            z = complex(weighted_average(t, weight, pat, N, a.avg, a.workers).value)
            return {"re": z.real, "im": z.imag}

        v = ctx.memo(key, compute)
        rows.append({"table": a.table, "shifts": str(pat), "N": N, "avg": a.avg, "alpha": alpha,
                     "re": v["re"], "im": v["im"], "abs": abs(complex(v["re"], v["im"]))})
    return records_from("corr", rows, ctx.params)


def cmd_tao(ctx: _Context) -> list[ResultRecord]:
    a = ctx.args
    pat = co.ShiftPattern(tuple(a.shifts))
    weighting = "dyadic" if a.prime_weighting == "dyadic-1/p" else "uniform"
    span = max(abs(h) for h in pat.shifts)
    t = ctx.table(a.table, max(a.N) + max(a.prime_cutoff) * max(span, 1))
    rows = []
    for N in a.N:
        for P0 in a.prime_cutoff:
            dil = co.PrimeDilationSpec(P0, weighting)
            key = {"op": "tao", "table": a.table, "shifts": list(pat.shifts), "N": N,
                   "prime_cutoff": P0, "weighting": weighting}

            def compute():
                r = co.tao_check(t, pat, N, dil, a.workers)
                return {"direct": r.direct, "dilated": r.dilated, "sign": r.sign,
                        "residual": r.residual}

            v = ctx.memo(key, compute)
            rows.append({"table": a.table, "shifts": str(pat), "N": N, "prime_cutoff": P0,
                         "weighting": weighting, **v, "prime_hash": dil.prime_hash()})
    return records_from("tao", rows, ctx.params)


def cmd_cylinder(ctx: _Context) -> list[ResultRecord]:
    a = ctx.args
    t = ctx.table(a.table, max(a.N) + a.half_width)
    rows = []
    for N in a.N:
        dist = co.cylinder_distribution(t, a.half_width, N, a.avg, a.workers)
        for cyl in co.CylinderPattern.all(a.half_width):
            word = "".join("-0+"[x + 1] for x in cyl.letters)
            rows.append({"table": a.table, "N": N, "avg": a.avg, "half_width": a.half_width,
                         "word": word, "frequency": dist[cyl], "mass": dist.mass})
    return records_from("cylinder", rows, ctx.params)


def cmd_complexity(ctx: _Context) -> list[ResultRecord]:
    a = ctx.args
    N = max(a.N)
    t = ctx.table("lambda", N)
    depth = min(a.nmax + 1, cx.MAX_WORD)
    ws = cx.WordSets(cx._to_bits(t, N), depth, a.workers)
    rows = []
    for n in range(1, a.nmax + 1):
        if n + 1 <= depth:
            right, left = ws.special(n)
            rs, ls = int(right.size), int(left.size)
        else:
            rs = ls = -1
        p = ws.count(n)
        rows.append({"table": "lambda", "N": N, "n": n, "P": p, "ratio": p / n,
                     "right_special": rs, "left_special": ls})
    return records_from("complexity", rows, ctx.params)


def cmd_gowers(ctx: _Context) -> list[ResultRecord]:
    a = ctx.args
    t = ctx.table(a.table, max(a.N))
    rows = []
    for N in a.N:
        seg = t.values[1 : N + 1].astype(float)
        for k in a.k:
            sampled = a.samples if a.samples else (4096 if k == 4 and N > 1000 else 0)
            val = co.gowers_norm(seg, k, samples=sampled or None, seed=a.seed)
            rows.append({"table": a.table, "N": N, "k": k, "value": float(val), "samples": sampled})
    return records_from("gowers", rows, ctx.params)


def _load_coefficients(path: Path) -> tuple[tuple[nl.UnipotentMatrix, ...], tuple[int, int], int]:
    doc = json.loads(Path(path).read_text())
    coeffs = tuple(nl.UnipotentMatrix.from_json(m) for m in doc["coefficients"])
    window = tuple(doc.get("window", (0, 2 * len(coeffs))))
    return coeffs, (int(window[0]), int(window[1])), int(doc.get("origin", 0))


def cmd_nilap(ctx: _Context) -> list[ResultRecord]:
    a = ctx.args
    if a.coefficients:
        coeffs, window, origin = _load_coefficients(a.coefficients)
    else:
        rng = random.Random(a.seed)
        coeffs = nl.random_hp_coefficients(a.dim, rng)
        window, origin = (0, 2 * a.dim), 0
    seq = nl.hp_generate(coeffs, window, origin)
    s = len(coeffs) - 1
    rows = [{"name": "g", "j": j, "value": json.dumps(seq[j].to_json(), separators=(",", ":"))}
            for j in seq.sequence.indices()]
    checks = {"s": str(s), "leibman": str(nl.leibman_check(seq, s)).lower()}
    top = seq.sequence
    for _ in range(s + 1):
        top = nl.derivative(top)
    checks["top_derivative_identity"] = str(all(v.is_identity() for v in top.values)).lower()
    checks["reconstruction_residual"] = str(nl.reconstruction_residual(seq, s))
    rows += [{"name": k, "j": 0, "value": v} for k, v in checks.items()]
    return records_from("nilap", rows, ctx.params)


def _dyn_row(mode, r, m, N, P0, value, ref, difference, bound=0.0) -> dict:
    return {"mode": mode, "r": r, "m": m, "N": N, "prime_cutoff": P0,
            "value_re": value.real, "value_im": value.imag, "ref_re": ref.real,
            "ref_im": ref.imag, "difference": float(difference), "bound": float(bound)}


def cmd_dynamics(ctx: _Context) -> list[ResultRecord]:
    a = ctx.args
    alpha = dy.parse_alpha(a.alpha)
    system = dy.RotationSystem(alpha, a.start)
    prod = dy.CharacterProduct(tuple(tuple(map(int, p)) for p in json.loads(a.terms)))
    rows = []
    for N in a.N:
        if a.mode == "ap":
            for r in a.r:
                v = complex(dy.ap_average(system, prod, r, N))
                g = dy.ap_average_closed_form(system, prod, r, N)
                rows.append(_dyn_row("ap", r, 0, N, 0, v, complex(g.value), abs(v - g.value), g.bound))
        elif a.mode == "prime":
            for P0 in a.prime_cutoff:
                res = dy.prime_ap_average(system, prod, P0, a.d, N)
                rows.append(_dyn_row("prime", a.d, 0, N, P0, complex(res.prime_side),
                                     complex(res.residue_side), res.difference))
        elif a.mode == "skew":
            t = ctx.table(a.table, N)
            res = dy.skew_liouville_probe(dy.SkewSequenceSpec(alpha, N), t, N, a.avg)
            rows.append(_dyn_row("skew", 0, 0, N, 0, complex(res.value), 0j, abs(res.value)))
        else:
            t = ctx.table(a.table, N + max(a.r) * a.m)
            for r in a.r:
                res = dy.stationarity_residual(t, r, a.m, N, a.avg)
                rows.append(_dyn_row("stationarity", r, a.m, N, 0, complex(res.plain),
                                     complex(res.dilated), res.residual))
    return records_from("dynamics", rows, ctx.params)


# -- report -----------------------------------------------------------------

def _manifest_paths(items: list[str]) -> list[Path]:
    out = []
    for item in items:
        p = Path(item)
        if p.is_dir():
            out += sorted(p.rglob("manifest.json"))
        else:
            out.append(p)
    return out


def _load_run(manifest: RunManifest) -> list[ResultRecord]:
    recs = []
    kind = _KIND_OF.get(manifest.subcommand)
    for path in manifest.output_paths:
        p = Path(path)
        if p.name == "manifest.json" or kind is None:
            continue
        recs += read_json(p) if p.suffix == ".json" else read_csv(p, kind)
    return recs


def build_report(manifests: list[RunManifest]) -> dict:
    """Decay-vs-N tables for correlations and residuals, plus complexity ratios."""
    records = [r for m in manifests for r in _load_run(m)]
    corr: dict[tuple, list] = {}
    tao: dict[tuple, list] = {}
    comp: dict[tuple, list] = {}
    for r in records:
        p = r.payload
        if r.kind == "corr":
            corr.setdefault((p["table"], p["shifts"], p["avg"], p["alpha"]), []).append(
                {"N": p["N"], "re": p["re"], "im": p["im"], "abs": p["abs"]})
        elif r.kind == "tao":
            tao.setdefault((p["table"], p["shifts"], p["weighting"]), []).append(
                {"N": p["N"], "prime_cutoff": p["prime_cutoff"], "residual": p["residual"]})
        elif r.kind == "complexity":
            comp.setdefault((p["table"], p["N"]), []).append(
                {"n": p["n"], "P": p["P"], "ratio": p["ratio"]})

    def table(groups, names, order):
        return [{**dict(zip(names, key)), "rows": sorted(rows, key=order)}
                for key, rows in sorted(groups.items())]

    return {
        "schema_version": SCHEMA_VERSION,
        "runs": len(manifests),
        "corr": table(corr, ("table", "shifts", "avg", "alpha"), lambda x: x["N"]),
        "tao": table(tao, ("table", "shifts", "weighting"), lambda x: (x["N"], x["prime_cutoff"])),
        "complexity": table(comp, ("table", "N"), lambda x: x["n"]),
    }


def report_text(doc: dict) -> str:
    lines = [f"runs: {doc['runs']}"]
    for g in doc["corr"]:
        alpha = f" alpha={g['alpha']}" if g["alpha"] else ""
        lines += ["", f"correlation {g['table']} shifts=({g['shifts']}) avg={g['avg']}{alpha}",
                  f"{'N':>12} {'re':>22} {'im':>22} {'abs':>22}"]
        lines += [f"{x['N']:>12} {x['re']:>22.15g} {x['im']:>22.15g} {x['abs']:>22.15g}"
                  for x in g["rows"]]
    for g in doc["tao"]:
        lines += ["", f"prime-dilation residual {g['table']} shifts=({g['shifts']}) "
                      f"weighting={g['weighting']}",
                  f"{'N':>12} {'P0':>10} {'residual':>22}"]
        lines += [f"{x['N']:>12} {x['prime_cutoff']:>10} {x['residual']:>22.15g}" for x in g["rows"]]
    for g in doc["complexity"]:
        lines += ["", f"block complexity {g['table']} N={g['N']}",
                  f"{'n':>4} {'P(n)':>12} {'P(n)/n':>14}"]
        lines += [f"{x['n']:>4} {x['P']:>12} {x['ratio']:>14.6f}" for x in g["rows"]]
    return "\n".join(lines) + "\n"


def cmd_report(args) -> tuple[list[Path], dict]:
    manifests = [RunManifest.load(p) for p in _manifest_paths(args.manifests)]
    manifests = [m for m in manifests if m.subcommand != "report"]
    doc = build_report(manifests)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    txt, js = out / "report.txt", out / "report.json"
    text = report_text(doc)
    txt.write_text(text)
    js.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    sys.stdout.write(text)
    return [txt, js], doc


# -- parser -----------------------------------------------------------------

_KIND_OF = {"sieve": "sieve", "corr": "corr", "tao-check": "tao", "cylinder": "cylinder",
            "complexity": "complexity", "gowers": "gowers", "nilap": "nilap",
            "dynamics": "dynamics"}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=parse_count, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--no-build", action="store_true",
                        help="fail instead of building a missing table")
    common.add_argument("--no-store", action="store_true",
                        help="do not read or write the result store")

    table = _Parser(add_help=False)
    table.add_argument("--table", choices=("lambda", "mobius"), default="lambda")
    table.add_argument("--N", type=parse_count_list, default=[10**6],
                       help="cutoff or comma list of cutoffs, e.g. 1e6,1e7")

    avg = _Parser(add_help=False)
    avg.add_argument("--avg", choices=("cesaro", "log"), default="log")

    p = _Parser(prog="sarnaklab", description="Numerical experiments with Liouville and Moebius.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("sieve", parents=[common, table], help="build and cache a sign table")
    s.set_defaults(func=cmd_sieve)

    s = sub.add_parser("corr", parents=[common, table, avg], help="multi-point correlation")
    s.add_argument("--shifts", type=parse_int_list, default=[0, 1])
    s.add_argument("--alpha", default=None, help="optional twist e(n alpha): decimal or preset")
    s.set_defaults(func=cmd_corr)

    s = sub.add_parser("tao-check", parents=[common, table], help="prime-dilation identity residual")
    s.add_argument("--shifts", type=parse_int_list, default=[0, 1])
    s.add_argument("--prime-cutoff", type=parse_count_list, default=[1000])
    s.add_argument("--prime-weighting", choices=("uniform", "dyadic-1/p"), default="uniform")
    s.set_defaults(func=cmd_tao)

    s = sub.add_parser("cylinder", parents=[common, table, avg], help="cylinder frequencies")
    s.add_argument("--half-width", type=int, default=1)
    s.set_defaults(func=cmd_cylinder)

    s = sub.add_parser("complexity", parents=[common, table], help="block complexity of lambda")
    s.add_argument("--nmax", type=parse_count, default=16)
    s.set_defaults(func=cmd_complexity)

    s = sub.add_parser("gowers", parents=[common, table], help="cyclic Gowers norms of a segment")
    s.add_argument("--k", type=parse_count_list, default=[2])
    s.add_argument("--samples", type=int, default=0, help="sampled difference tuples (0 = exact)")
    s.set_defaults(func=cmd_gowers)

    s = sub.add_parser("nilap", parents=[common], help="Hall-Petresco sequences in U_d")
    s.add_argument("--coefficients", default=None, help="coefficient JSON file")
    s.add_argument("--dim", type=parse_count, default=3, help="dimension for random coefficients")
    s.set_defaults(func=cmd_nilap)

    s = sub.add_parser("dynamics", parents=[common, table, avg], help="rotation averages")
    s.add_argument("--mode", choices=("ap", "prime", "skew", "stationarity"), default="ap")
    s.add_argument("--alpha", default="golden")
    s.add_argument("--start", type=float, default=0.0)
    s.add_argument("--terms", default="[[1,1],[2,-1]]", help="JSON list of (j, c_j) pairs")
    s.add_argument("--r", type=parse_count_list, default=[1, 2, 3, 5, 7])
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--d", type=parse_count, default=1)
    s.add_argument("--prime-cutoff", type=parse_count_list, default=[10**4])
    s.set_defaults(func=cmd_dynamics)

    s = sub.add_parser("report", help="aggregate manifests into a summary")
    s.add_argument("manifests", nargs="*", help="manifest files or directories to search")
    s.add_argument("--out", default="results")
    s.set_defaults(func=None)
    return p


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write(str(e) + "\n")
        return EXIT_USAGE
    t0 = time.perf_counter()
    try:
        if args.subcommand == "report":
            paths, _ = cmd_report(args)
            params = {"manifests": list(args.manifests)}
            keys: list[str] = []
        else:
            ctx = _Context(args)
            records = args.func(ctx)
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"{_KIND_OF[args.subcommand]}.{args.format}"
            (write_json if args.format == "json" else write_csv)(records, path)
            paths, params, keys = [path], ctx.params, ctx.table_keys
    except Exception as e:  # any failure past argument parsing is a computation error
        sys.stderr.write(f"sarnaklab {args.subcommand}: {type(e).__name__}: {e}\n")
        return EXIT_COMPUTE
    manifest = RunManifest(args.subcommand, {"argv": argv, **params}, sorted(set(keys)),
                           [str(p) for p in paths], round(time.perf_counter() - t0, 6))
    out = Path(args.out)
    (out / "manifest.json").write_text(manifest.dumps())
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
