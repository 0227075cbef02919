"""Command-line client for the qdamp service.

The CLI is a thin HTTP client: every subcommand builds a JSON request,
posts it to the service, and writes the returned artifacts to disk.  By
default the service runs in-process (no network, no separate server); pass
`--server http://host:port` to target a running instance started with
`qdamp serve`.

Subcommands:
    geometry     expansion profiles and the boundary-angle sweep
    convergence  the full noisy-vs-noiseless convergence experiment
    haar-ref     build and cache a Haar reference signature
    serve        run the HTTP service with uvicorn

On failure a single machine-readable JSON line is printed to stderr and the
exit code is nonzero.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx


class ServiceError(Exception):
    """Non-2xx response from the service."""

    def __init__(self, status_code: int, detail):
        super().__init__(f"service returned {status_code}")
        self.status_code = status_code
        self.detail = detail


def _post_in_process(path: str, payload: dict) -> httpx.Response:
    from .service import app  # imported lazily: pulls in the compute stack

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://qdamp.local", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def call_service(server: str | None, path: str, payload: dict) -> dict:
    """POST a request either in process or to a remote server."""
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            response = client.post(path, json=payload)
    else:
        response = _post_in_process(path, payload)
    if response.status_code != 200:
        try:
            detail = response.json()
        except ValueError:
            detail = {"raw": response.text}
        raise ServiceError(response.status_code, detail)
    return response.json()


def _parse_gammas(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad gamma list {text!r}: {exc}") from exc


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


def _cmd_geometry(args) -> int:
    payload = {
        "gammas": args.gammas,
        "resolution": args.resolution,
        "include_sweep": not args.no_sweep,
    }
    data = call_service(args.server, "/geometry", payload)
    out = _out_dir(args)
    for prof in data["profiles"]:
        tag = repr(float(prof["gamma"]))
        _write(out / f"lambda_profile_g{tag}.csv", prof["csv"])
        _write(out / f"lambda_profile_g{tag}.json", _dump(prof["json_doc"]))
    if data.get("sweep_csv"):
        _write(out / "theta_c_sweep.csv", data["sweep_csv"])
    return 0


def _cmd_convergence(args) -> int:
    payload: dict = {}
    if args.preset:
        from .experiment import PRESETS

        payload.update(PRESETS[args.preset])
    if args.config:
        payload.update(json.loads(Path(args.config).read_text()))
    overrides = {
        "qubits": args.qubits,
        "depth": args.depth,
        "ensemble": args.ensemble,
        "gammas": args.gammas,
        "init": args.init,
        "master_seed": args.seed,
        "m_haar": args.m_haar,
        "record_stride": args.stride,
        "noise_placement": args.noise_placement,
        "workers": args.workers,
        "checkpoint_path": args.checkpoint,
    }
    payload.update({k: v for k, v in overrides.items() if v is not None})
    data = call_service(args.server, "/convergence", payload)
    out = _out_dir(args)
    _write(out / "distance.csv", data["distance_csv"])
    _write(out / "convergence.json", _dump(data["json_doc"]))
    print(f"config hash {data['config_hash']}  wall {data['wall_seconds']:.1f}s")
    return 0


def _cmd_haar_ref(args) -> int:
    payload = {"qubits": args.qubits, "m_haar": args.m_haar}
    if args.seed is not None:
        payload["master_seed"] = args.seed
    data = call_service(args.server, "/haar-reference", payload)
    out = _out_dir(args)
    _write(out / "haar_reference.json", _dump(data["json_doc"]))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("qdamp.service:app", host=args.host, port=args.port)
    return 0


def _dump(doc: dict) -> str:
    from .experiment import dump_json

    return dump_json(doc)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdamp",
        description="Amplitude-damping geometry and noisy random-circuit experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    geo = sub.add_parser("geometry", help="export expansion profiles")
    geo.add_argument("--gammas", type=_parse_gammas, default=[0.01, 0.1, 0.2, 0.45])
    geo.add_argument("--resolution", type=int, default=512)
    geo.add_argument("--no-sweep", action="store_true", help="skip the theta_c sweep table")
    geo.add_argument("--out", default="results")
    geo.add_argument("--server", default=None, help="base URL of a running service")
    geo.set_defaults(handler=_cmd_geometry)

    conv = sub.add_parser("convergence", help="run the convergence experiment")
    conv.add_argument("--preset", choices=["desk", "paper"], default=None)
    conv.add_argument("--config", default=None, help="JSON file with config fields")
    conv.add_argument("--qubits", type=int, default=None)
    conv.add_argument("--depth", type=int, default=None)
    conv.add_argument("--ensemble", type=int, default=None)
    conv.add_argument("--gammas", type=_parse_gammas, default=None)
    conv.add_argument("--init", choices=["zeros", "ones"], default=None)
    conv.add_argument("--seed", type=int, default=None)
    conv.add_argument("--m-haar", type=int, default=None, dest="m_haar")
    conv.add_argument("--stride", type=int, default=None)
    conv.add_argument(
        "--noise-placement", choices=["idle_only", "all_qubits"], default=None
    )
    conv.add_argument("--workers", type=int, default=None)
    conv.add_argument("--checkpoint", default=None, help="moment checkpoint file")
    conv.add_argument("--out", default="results")
    conv.add_argument("--server", default=None)
    conv.set_defaults(handler=_cmd_convergence)

    haar = sub.add_parser("haar-ref", help="build and cache a Haar reference")
    haar.add_argument("--qubits", type=int, required=True)
    haar.add_argument("--m-haar", type=int, default=3000, dest="m_haar")
    haar.add_argument("--seed", type=int, default=None)
    haar.add_argument("--out", default="results")
    haar.add_argument("--server", default=None)
    haar.set_defaults(handler=_cmd_haar_ref)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8123)
    srv.set_defaults(handler=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ServiceError as exc:
        line = {"error": "service_error", "status": exc.status_code, "detail": exc.detail}
        print(json.dumps(line), file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(json.dumps({"error": "transport_error", "message": str(exc)}), file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
