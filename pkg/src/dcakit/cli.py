"""Command-line client for the analysis service.

Every subcommand is a thin wrapper over one service endpoint. By
default the service runs in-process (no network involved); pass
``--server`` to talk to a remote instance instead.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 solver
failure (every record failed).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import httpx

_EXIT_CODES = {"config": 1, "data": 2, "solver": 3, "internal": 1}


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    # In-process transport; imported lazily so remote use stays light.
    from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _fail(payload: dict) -> int:
    kind = payload.get("error_kind", "internal")
    print(f"error ({kind}): {payload.get('message', 'unknown error')}",
          file=sys.stderr)
    return _EXIT_CODES.get(kind, 1)


def _post(args, path: str, body: dict) -> tuple[int, dict | None]:
    try:
        with _client(getattr(args, "server", None)) as client:
            response = client.post(path, json=body)
    except httpx.HTTPError as exc:
        print(f"error (transport): {exc}", file=sys.stderr)
        return 1, None
    if response.status_code != 200:
        try:
            payload = response.json()
        except ValueError:
            payload = {"message": response.text}
        return _fail(payload), None
    return 0, response.json()


def _cmd_synth(args) -> int:
    body = {"classes": args.classes, "dims": args.dims, "rows": args.rows,
            "spread": args.spread, "seed": args.seed}
    code, payload = _post(args, "/datasets/synthetic", body)
    if code:
        return code
    Path(args.out).write_text(payload["csv_text"], encoding="utf-8")
    print(f"wrote {payload['rows']} rows x {payload['dims']} features to {args.out}")
    return 0


def _cmd_experiment(args, endpoint: str) -> int:
    path = Path(args.config)
    if not path.is_file():
        print(f"error (config): config file not found: {path}", file=sys.stderr)
        return 1
    body = {"config_text": path.read_text(), "format": args.format,
            "threads": args.threads}
    if args.seed is not None:
        body["seed_override"] = args.seed
    code, payload = _post(args, endpoint, body)
    if code:
        return code
    Path(args.out).write_text(payload["content"], encoding="utf-8")
    print(f"wrote {payload['record_count']} records "
          f"({payload['failed_count']} failed) to {args.out}")
    for entry in payload["aggregates"]:
        parts = " ".join(f"{k}={v}" for k, v in entry.items())
        print(f"  {parts}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--out", required=True, help="output file path")
    parser.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallel record evaluation (default 1)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override master_seed from the config")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service "
                             "(default: run in-process)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcakit",
        description="Data collaboration analysis experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p_synth.add_argument("--classes", type=int, required=True)
    p_synth.add_argument("--dims", type=int, required=True)
    p_synth.add_argument("--rows", type=int, required=True)
    p_synth.add_argument("--spread", type=float, required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--server", default=None)
    p_synth.set_defaults(func=_cmd_synth)

    p_acc = sub.add_parser("accuracy", help="run the accuracy protocol")
    _add_common(p_acc)
    p_acc.set_defaults(func=lambda a: _cmd_experiment(a, "/experiments/accuracy"))

    p_tim = sub.add_parser("timing", help="run the timing protocol")
    _add_common(p_tim)
    p_tim.set_defaults(func=lambda a: _cmd_experiment(a, "/experiments/timing"))

    p_serve = sub.add_parser("serve", help="run the service over HTTP")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
