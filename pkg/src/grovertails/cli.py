"""Command-line front door.

Thin client over the analysis pipeline: parse flags (with GROVERTAILS_*
environment variables supplying defaults), build a RunConfig, run it either
in-process or against a running service (--server), and emit the report.

Exit status: 0 all checks passed, 2 a law check failed or a solver
assertion tripped, 1 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import AnalysisError, ConfigError, GroverTailsError, IoError
from .pipeline import FORMATS, MODES, RunConfig, RunResult, report_json, run

ENV_PREFIX = "GROVERTAILS_"
_USAGE_EXIT = 1
_ANALYSIS_EXIT = 2


def parse_complex(text: str) -> complex:
    """Parse "1", "0.5-0.3i", or "1+0j" (i and j both accepted)."""
    cleaned = text.strip().replace("i", "j").replace(" ", "")
    try:
        return complex(cleaned)
    except ValueError:
        raise ConfigError(f"cannot parse complex number {text!r}") from None


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise ConfigError(f"cannot parse integer list {text!r}") from None


def parse_complex_list(text: str) -> tuple[complex, ...]:
    return tuple(parse_complex(tok) for tok in text.split(",") if tok.strip() != "")


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; remap to 1, since 2 is
    reserved for failed verification."""

    def error(self, message):
        self.print_usage(sys.stderr)
        _diagnostic("ConfigError", message)
        raise SystemExit(_USAGE_EXIT)


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="grovertails",
        description="Analyze the driven Grover walk on a graph with semi-infinite tails.",
    )
    parser.add_argument("--graph", default=_env("GRAPH"), help="path to an edge-list file")
    parser.add_argument("--tails", default=_env("TAILS"),
                        help='comma-separated attachment vertices, e.g. "0,1"')
    parser.add_argument("--inflow", default=_env("INFLOW"),
                        help='comma-separated tail amplitudes, e.g. "1+0i,0"')
    parser.add_argument("--z", default=_env("Z") or "1", help="unit-modulus drive frequency")
    parser.add_argument("--mode", default=_env("MODE") or "all", choices=MODES)
    parser.add_argument("--steps", type=int, default=_int_env("STEPS"),
                        help="step budget for the driven evolution")
    parser.add_argument("--tol", type=float, default=_float_env("TOL", 1e-10),
                        help="convergence tolerance for the driven evolution")
    parser.add_argument("--truncation", type=int, default=_int_env("TRUNCATION"),
                        help="explicit tail length for cross-checks")
    parser.add_argument("--format", default=_env("FORMAT") or "json", choices=FORMATS,
                        dest="fmt")
    parser.add_argument("--seed", type=int, default=_int_env("SEED", 0),
                        help="seed for randomized conservation cuts")
    parser.add_argument("--out", default=_env("OUT"), help="write the report here instead of stdout")
    parser.add_argument("--server", default=_env("SERVER"),
                        help="base URL of a running service; run remotely instead of in-process")
    return parser


def _int_env(name: str, default: int | None = None) -> int | None:
    raw = _env(name)
    return default if raw is None else int(raw)


def _float_env(name: str, default: float) -> float:
    raw = _env(name)
    return default if raw is None else float(raw)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.graph is None:
        raise ConfigError("--graph is required (or set GROVERTAILS_GRAPH)")
    if args.tails is None:
        raise ConfigError("--tails is required (or set GROVERTAILS_TAILS)")
    inflow = None if args.inflow is None else parse_complex_list(args.inflow)
    return RunConfig(
        graph_path=args.graph,
        tails=parse_int_list(args.tails),
        inflow=inflow,
        z=parse_complex(args.z),
        mode=args.mode,
        steps=args.steps,
        tol=args.tol,
        truncation=args.truncation,
        fmt=args.fmt,
        seed=args.seed,
        out=args.out,
    )


def _diagnostic(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def _emit(result: RunResult, config: RunConfig) -> None:
    if config.fmt == "csv" and result.tables:
        payload = "".join(result.tables.values())
    else:
        payload = report_json(result.report)
    if config.out:
        try:
            with open(config.out, "w", encoding="utf-8") as handle:
                handle.write(payload)
        except OSError as exc:
            raise IoError(f"cannot write {config.out!r}: {exc}") from exc
    else:
        sys.stdout.write(payload)


def _run_remote(config: RunConfig, server: str) -> RunResult:
    import httpx

    payload = {
        "graph": (config.graph_text
                  if config.graph_text is not None
                  else _read_graph(config.graph_path)),
        "tails": list(config.tails),
        "inflow": None if config.inflow is None
        else [[z.real, z.imag] for z in config.inflow],
        "z": [config.z.real, config.z.imag],
        "mode": config.mode,
        "steps": config.steps,
        "tol": config.tol,
        "truncation": config.truncation,
        "seed": config.seed,
    }
    response = httpx.post(server.rstrip("/") + "/analyze", json=payload, timeout=300.0)
    if response.status_code != 200:
        raise IoError(f"service returned HTTP {response.status_code}: {response.text}")
    body = response.json()
    return RunResult(report=body["report"], exit_code=body["status"], tables={})


def _read_graph(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise IoError(f"cannot read graph file {path!r}: {exc}") from exc


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if args.server:
            if config.fmt != "json":
                raise ConfigError("remote runs support json output only")
            result = _run_remote(config, args.server)
        else:
            result = run(config)
        _emit(result, config)
        return result.exit_code
    except AnalysisError as exc:
        _diagnostic(type(exc).__name__, str(exc))
        return _ANALYSIS_EXIT
    except GroverTailsError as exc:
        _diagnostic(type(exc).__name__, str(exc))
        return _USAGE_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
