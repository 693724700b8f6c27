"""Command-line client for the laboratory service.

Every subcommand except ``serve`` talks to the HTTP API.  By default the
app is mounted in-process (no socket, no extra process), so the CLI works
standalone; ``--server URL`` switches the same requests to a remote
instance.  Either way the bytes on the wire are identical, which keeps the
CLI honest as a client and exercises the service schema on every call.

Exit codes: 0 success, 1 a batch run finished with failed tasks, 2 usage
or computation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from ._version import __version__


class CliError(Exception):
    pass


class Client:
    """Minimal JSON transport: in-process by default, HTTP with --server."""

    def __init__(self, server: str | None = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # This starlette release deprecates its httpx-based test
                # client, but the replacement transport is not available
                # in supported environments yet.
                warnings.filterwarnings(
                    "ignore", message="Using `httpx` with `starlette.testclient`"
                )
                from starlette.testclient import TestClient

                from .service import create_app

                self._client = TestClient(create_app())

    def get(self, path: str) -> dict:
        return self._result(self._client.get(path))

    def post(self, path: str, payload: dict) -> dict:
        return self._result(self._client.post(path, json=payload))

    @staticmethod
    def _result(resp) -> dict:
        if resp.status_code >= 400:
            try:
                doc = resp.json()
            except ValueError:
                raise CliError(
                    f"server returned {resp.status_code}: {resp.text[:300]}"
                ) from None
            err = doc.get("error") if isinstance(doc, dict) else None
            if err:
                raise CliError(f"{err.get('type', 'error')}: {err.get('message', '')}")
            detail = doc.get("detail", doc) if isinstance(doc, dict) else doc
            raise CliError(f"invalid request: {json.dumps(detail)[:500]}")
        return resp.json()


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec", metavar="FILE", help="construction spec file (YAML)")
    g.add_argument("--family", metavar="NAME", help="built-in family name")
    p.add_argument(
        "--set",
        dest="family_params",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="family parameter (repeatable, only with --family)",
    )


def _spec_doc(args: argparse.Namespace) -> dict:
    if args.spec:
        if args.family_params:
            raise CliError("--set only applies together with --family")
        try:
            text = Path(args.spec).read_text("utf-8")
        except OSError as exc:
            raise CliError(f"cannot read spec file: {exc}") from None
        doc = yaml.safe_load(text)
        if not isinstance(doc, dict):
            raise CliError(f"spec file {args.spec} must hold a mapping")
        return doc
    fam: dict = {"name": args.family}
    for kv in args.family_params:
        if "=" not in kv:
            raise CliError(f"bad --set {kv!r}, expected KEY=VALUE")
        key, value = kv.split("=", 1)
        fam[key] = value
    return {"family": fam}


def _powers(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise CliError(f"bad power list {text!r}, expected comma-separated integers")


def _blocks(text: str) -> list[list[int]]:
    out = []
    for part in text.split(","):
        if ":" not in part:
            raise CliError(f"bad block {part!r}, expected CUT:LENGTH")
        r, length = part.split(":", 1)
        try:
            out.append([int(r), int(length)])
        except ValueError:
            raise CliError(f"bad block {part!r}, expected CUT:LENGTH") from None
    return out


def _emit(args: argparse.Namespace, doc: dict, human) -> None:
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        human(doc)


def _cmd_families(client: Client, args) -> int:
    doc = client.get("/v1/families")
    _emit(args, doc, lambda d: print("\n".join(d["families"])))
    return 0


def _cmd_canon(client: Client, args) -> int:
    doc = client.post("/v1/spec/canonical", {"spec": _spec_doc(args)})

    def human(d):
        sys.stdout.write(d["canonical"])
        print(f"# sha256: {d['sha256']}")

    _emit(args, doc, human)
    return 0


def _cmd_heights(client: Client, args) -> int:
    payload = {"spec": _spec_doc(args), "stages": args.stages}
    doc = client.post("/v1/heights", payload)

    def human(d):
        print("stage\theight\twidth\tmeasure\tcut")
        for row in d["stages"]:
            cut = "-" if row["cut"] is None else row["cut"]
            print(f"{row['stage']}\t{row['height']}\t{row['width']}\t{row['measure']}\t{cut}")

    _emit(args, doc, human)
    return 0


def _cmd_sidon(client: Client, args) -> int:
    payload = {"spec": _spec_doc(args), "stages": args.stages}
    if args.pair_cap is not None:
        payload["pair_cap"] = args.pair_cap
    doc = client.post("/v1/sidon", payload)

    def human(d):
        for v in d["verdicts"]:
            if v["is_sidon"]:
                print(f"stage {v['stage']}: sidon (margin {v['margin']})")
            else:
                w = v["witness"]
                where = (
                    f"shift {w['shift']} meets columns "
                    f"{w['first']['source']}->{w['first']['target']} and "
                    f"{w['second']['source']}->{w['second']['target']}"
                )
                print(f"stage {v['stage']}: NOT sidon ({where})")
        if d["first_failure"] is not None:
            print(f"first failure at stage {d['first_failure']}")

    _emit(args, doc, human)
    return 0


def _cmd_classify(client: Client, args) -> int:
    payload = {"spec": _spec_doc(args), "powers": _powers(args.powers)}
    doc = client.post("/v1/classify", payload)

    def human(d):
        for rep in d["reports"]:
            kind = "conservative" if rep["conservative"] else "dissipative"
            print(f"d={rep['power']}: {kind}, {rep['spectral']} (alpha {rep['alpha']})")
        for note in d["discrepancies"]:
            print(f"discrepancy: {note}")

    _emit(args, doc, human)
    return 0


def _cmd_infer_alpha(client: Client, args) -> int:
    payload: dict = {
        "max_denominator": args.max_denominator,
        "block_count": args.block_count,
    }
    if args.blocks:
        payload["blocks"] = _blocks(args.blocks)
    else:
        payload["spec"] = _spec_doc(args)
    doc = client.post("/v1/infer-alpha", payload)

    def human(d):
        blocks = " ".join(f"{r}:{length}" for r, length in d["blocks"])
        print(f"blocks: {blocks}")
        if d["alpha"] is None:
            print(f"no alpha: {d['reason']}")
        else:
            print(f"alpha = {d['alpha']}")

    _emit(args, doc, human)
    return 0


def _cmd_orbit(client: Client, args) -> int:
    digits: str | list[int] = args.digits
    if "," in args.digits or args.digits.isdigit():
        digits = [int(d) for d in args.digits.split(",") if d.strip()]
    payload = {
        "spec": _spec_doc(args),
        "start_stage": args.start_stage,
        "start_level": args.start_level,
        "steps": args.steps,
        "direction": "backward" if args.backward else "forward",
        "digits": digits,
        "seed": args.seed,
    }
    doc = client.post("/v1/orbit", payload)

    def human(d):
        print("step\tstage\tlevel")
        for row in d["points"]:
            print(f"{row['step']}\t{row['stage']}\t{row['level']}")

    _emit(args, doc, human)
    return 0


def _cmd_correlate(client: Client, args) -> int:
    payload = {"spec": _spec_doc(args), "stage": args.stage, "max_lag": args.max_lag}
    if args.stage_cap is not None:
        payload["stage_cap"] = args.stage_cap
    if args.size_cap is not None:
        payload["size_cap"] = args.size_cap
    doc = client.post("/v1/correlate", payload)

    def human(d):
        stab = d["stabilized_at"]
        print(f"# final stage {d['final_stage']}, stabilized at {stab if stab is not None else '-'}")
        unstable = set(d["unstable_lags"])
        print("lag\tcorrelation\tstable")
        for m, c in enumerate(d["values"]):
            print(f"{m}\t{c}\t{'false' if m in unstable else 'true'}")

    _emit(args, doc, human)
    return 0


def _cmd_spectrum(client: Client, args) -> int:
    payload = {
        "spec": _spec_doc(args),
        "stage": args.stage,
        "max_lag": args.max_lag,
        "power": args.power,
        "grid": args.grid,
        "force": args.force,
    }
    if args.stage_cap is not None:
        payload["stage_cap"] = args.stage_cap
    if args.size_cap is not None:
        payload["size_cap"] = args.size_cap
    doc = client.post("/v1/spectrum", payload)

    def human(d):
        den = d["density"]
        print(f"power {d['power']}, lag window {d['max_lag']}, grid {den['grid_size']}")
        print(f"table stable: {'yes' if d['stable'] else 'no'}")
        print(f"density mean {den['mean']!r}, min {den['minimum']!r}, max {den['maximum']!r}")
        print(
            f"power sums over lags 1..{d['max_lag']}: "
            f"sum c^d = {d['power_sum_d']}, sum c^2d = {d['power_sum_2d']}"
        )
        print(f"coefficient mass trend (exponent {d['trend']['exponent']}): {d['trend']['label']}")
        print(
            f"top {d['concentration_quantile']:.2%} of grid points carry "
            f"{d['concentration']:.2%} of the mass"
        )

    _emit(args, doc, human)
    return 0


def _cmd_run(client: Client, args) -> int:
    try:
        text = Path(args.config).read_text("utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}") from None
    doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise CliError("config file must hold a mapping")
    if args.seed is not None:
        doc["seed"] = args.seed
    result = client.post("/v1/run", {"config": doc})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, content in sorted(result["files"].items()):
        (out / name).write_text(content, "utf-8")
    if not args.json:
        manifest = json.loads(result["files"]["manifest.json"])
        for entry in manifest["tasks"]:
            status = entry["status"]
            label = entry["artifact"] or f"task {entry['index']} ({entry['task']})"
            line = f"{label}: {status}"
            if status == "error":
                line += f" ({entry['error']})"
            print(line)
            for note in entry.get("discrepancies", []):
                print(f"  discrepancy: {note}")
        print(f"bundle written to {out}")
    else:
        print(json.dumps({"out": str(out), "failed": result["failed"]}, indent=2))
    return 1 if result["failed"] else 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lab", description="Exact rank-one construction laboratory"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", metavar="URL", help="remote service base URL")
    common.add_argument("--json", action="store_true", help="print the raw JSON response")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("families", parents=[common], help="list built-in families")
    p.set_defaults(fn=_cmd_families)

    p = sub.add_parser("canon", parents=[common], help="canonicalize a spec and hash it")
    _add_spec_args(p)
    p.set_defaults(fn=_cmd_canon)

    p = sub.add_parser("heights", parents=[common], help="tower heights and measures")
    _add_spec_args(p)
    p.add_argument("--stages", type=int, required=True, help="number of stages")
    p.set_defaults(fn=_cmd_heights)

    p = sub.add_parser("sidon", parents=[common], help="check the disjointness property")
    _add_spec_args(p)
    p.add_argument("--stages", type=int, required=True, help="last stage to check")
    p.add_argument("--pair-cap", type=int, default=None, help="refuse above this many copy pairs")
    p.set_defaults(fn=_cmd_sidon)

    p = sub.add_parser("classify", parents=[common], help="classify tensor powers")
    _add_spec_args(p)
    p.add_argument("--powers", required=True, help="comma-separated powers, e.g. 10,11,20,21")
    p.set_defaults(fn=_cmd_classify)

    p = sub.add_parser("infer-alpha", parents=[common], help="recover alpha from block data")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec", metavar="FILE", help="construction spec file (YAML)")
    g.add_argument("--family", metavar="NAME", help="built-in family name")
    g.add_argument("--blocks", metavar="CUT:LEN,...", help="explicit blocks, e.g. 24:4,120:5")
    p.add_argument(
        "--set",
        dest="family_params",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="family parameter (repeatable, only with --family)",
    )
    p.add_argument("--max-denominator", type=int, default=64)
    p.add_argument("--block-count", type=int, default=3)
    p.set_defaults(fn=_cmd_infer_alpha)

    p = sub.add_parser("orbit", parents=[common], help="trace one orbit symbolically")
    _add_spec_args(p)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--start-stage", type=int, default=1)
    p.add_argument("--start-level", type=int, default=0)
    p.add_argument("--backward", action="store_true", help="apply the inverse map")
    p.add_argument(
        "--digits",
        default="seeded",
        help="'seeded', 'constant:<i>', or comma-separated digits",
    )
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_orbit)

    p = sub.add_parser("correlate", parents=[common], help="exact autocorrelation table")
    _add_spec_args(p)
    p.add_argument("--max-lag", type=int, required=True)
    p.add_argument("--stage", type=int, default=1, help="base stage of the level set")
    p.add_argument("--stage-cap", type=int, default=None)
    p.add_argument("--size-cap", type=int, default=None)
    p.set_defaults(fn=_cmd_correlate)

    p = sub.add_parser("spectrum", parents=[common], help="smoothed density diagnostics")
    _add_spec_args(p)
    p.add_argument("--max-lag", type=int, required=True)
    p.add_argument("--power", type=int, required=True)
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--stage", type=int, default=1)
    p.add_argument("--force", action="store_true", help="accept an unstable table")
    p.add_argument("--stage-cap", type=int, default=None)
    p.add_argument("--size-cap", type=int, default=None)
    p.set_defaults(fn=_cmd_spectrum)

    p = sub.add_parser("run", parents=[common], help="run a batch config into a bundle")
    p.add_argument("config", help="experiment config file (YAML)")
    p.add_argument("--out", required=True, help="output directory for the bundle")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        client = Client(getattr(args, "server", None))
        return args.fn(client, args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
