"""Command-line interface.

The CLI is a thin client over the HTTP API: by default it mounts the
FastAPI application in-process (no socket), while ``--server URL`` points
the same requests at a remote instance.  Responses come back as JSON
tables and are written as CSV files; ``serve`` starts the HTTP server
itself.

Exit codes: 0 success, 2 configuration error, 3 precision-window error,
4 numeric range error.
"""

from __future__ import annotations

import argparse
import asyncio
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

import httpx

from .builders import PRESET_NAMES
from .csvio import render_csv, write_atomic
from .errors import BdsmpError
from .figures import FIGURES

_EXIT_BY_CODE = {"config": 2, "precision": 3, "range": 4}

COMMANDS = ("expand", "exact", "simulate", "compare", "reproduce", "serve")


@dataclass
class RunConfig:
    model: Optional[str] = None  # preset name or path to a JSON descriptor
    command: str = "expand"
    L: int = 3
    eps: list[float] = field(default_factory=list)
    states: Optional[list[int]] = None
    output: Optional[str] = None
    seed: int = 0
    horizon: float = 1e6
    replications: int = 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bdsmp",
        description="Asymptotic expansions and simulation for perturbed "
        "birth-death semi-Markov models.",
    )
    p.add_argument("--command", choices=COMMANDS, default="expand")
    p.add_argument("--model", help="path to a JSON model descriptor")
    p.add_argument(
        "--preset",
        help=f"named example model ({', '.join(PRESET_NAMES)}); for "
        f"reproduce: a figure name ({', '.join(FIGURES)})",
    )
    p.add_argument("--L", type=int, default=3, help="expansion length (default 3)")
    p.add_argument("--eps", help="comma-separated perturbation sizes")
    p.add_argument("--states", help="comma-separated state filter")
    p.add_argument("--out", help="output CSV path (directory for reproduce)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, default=1e6)
    p.add_argument("--reps", type=int, default=0)
    p.add_argument("--server", help="base URL of a running server (default: in-process)")
    p.add_argument("--host", default="127.0.0.1", help="bind address for serve")
    p.add_argument("--port", type=int, default=8000, help="bind port for serve")
    return p


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise BdsmpError(f"bad numeric list {text!r}") from exc


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise BdsmpError(f"bad integer list {text!r}") from exc


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        model=args.model or args.preset,
        command=args.command,
        L=args.L,
        eps=_parse_floats(args.eps) if args.eps else [],
        states=_parse_ints(args.states) if args.states else None,
        output=args.out,
        seed=args.seed,
        horizon=args.horizon,
        replications=args.reps,
    )


def _model_ref(args: argparse.Namespace) -> dict[str, Any]:
    if (args.model is None) == (args.preset is None):
        raise BdsmpError("give exactly one of --model / --preset")
    if args.preset is not None:
        return {"preset": args.preset}
    import json

    try:
        with open(args.model) as fh:
            return {"descriptor": json.load(fh)}
    except (OSError, ValueError) as exc:
        raise BdsmpError(f"cannot read model descriptor {args.model!r}: {exc}") from exc


def _request(args: argparse.Namespace, cfg: RunConfig) -> tuple[str, dict[str, Any]]:
    if cfg.command == "expand":
        return "/v1/expand", {
            "model": _model_ref(args),
            "L": cfg.L,
            "states": cfg.states,
        }
    if cfg.command == "exact":
        if not cfg.eps:
            raise BdsmpError("exact needs --eps")
        return "/v1/exact", {
            "model": _model_ref(args),
            "eps": cfg.eps,
            "states": cfg.states,
        }
    if cfg.command == "compare":
        if not cfg.eps:
            raise BdsmpError("compare needs --eps")
        return "/v1/compare", {
            "model": _model_ref(args),
            "L": cfg.L,
            "eps": cfg.eps,
            "states": cfg.states,
        }
    if cfg.command == "simulate":
        if len(cfg.eps) != 1:
            raise BdsmpError("simulate needs --eps with exactly one value")
        return "/v1/simulate", {
            "model": _model_ref(args),
            "eps": cfg.eps[0],
            "horizon": cfg.horizon,
            "seed": cfg.seed,
            "replications": cfg.replications,
        }
    # reproduce
    figures = None
    if args.preset is not None:
        figures = [args.preset]
    return "/v1/reproduce", {"figures": figures}


def _post(server: Optional[str], path: str, payload: dict) -> tuple[int, dict]:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            r = client.post(path, json=payload)
            return r.status_code, r.json()

    from .service import create_app

    async def go() -> tuple[int, dict]:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://bdsmp.internal", timeout=600.0
        ) as client:
            r = await client.post(path, json=payload)
            return r.status_code, r.json()

    return asyncio.run(go())


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _handle_response(status: int, body: dict, cfg: RunConfig) -> int:
    if status == 422:  # request-shape rejection from the API layer
        sys.stderr.write(f"invalid request: {body.get('detail')}\n")
        return 2
    if status != 200:
        err = body.get("error", {})
        sys.stderr.write(f"{err.get('code', 'error')}: {err.get('message', body)}\n")
        return _EXIT_BY_CODE.get(err.get("code"), 2)

    version = body["version"]
    if "table" in body:
        t = body["table"]
        text = render_csv(
            t["columns"],
            t["rows"],
            digest=t["model_digest"],
            command=t["command"],
            version=version,
        )
        _emit(text, cfg.output)
        return 0

    out_dir = cfg.output or "."
    os.makedirs(out_dir, exist_ok=True)
    for t in body["tables"]:
        text = render_csv(
            t["columns"],
            t["rows"],
            digest=t["model_digest"],
            command=t["command"],
            version=version,
        )
        write_atomic(os.path.join(out_dir, f"{t['name']}.csv"), text)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if cfg.command == "serve":
            import uvicorn

            from .service import create_app

            uvicorn.run(create_app(), host=args.host, port=args.port)
            return 0
        path, payload = _request(args, cfg)
        status, body = _post(args.server, path, payload)
        return _handle_response(status, body, cfg)
    except BdsmpError as exc:
        sys.stderr.write(f"{exc}\n")
        return exc.exit_code
    except httpx.HTTPError as exc:
        sys.stderr.write(f"server unreachable: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
