"""Command-line entry points: ``gateway``, ``mock-wps`` and ``audit``.

``wpsrest`` bundles the three as subcommands.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from pydantic import ValidationError

FAULT_FLAGS = {"none": "none", "server-busy": "server_busy", "drop": "drop_connection"}


def _gateway_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--backend", required=True, help="WPS endpoint URL")
    p.add_argument("--base-uri", required=True, help="public base URI used in links")
    p.add_argument("--cache-ttl", type=float, default=300.0, metavar="S")
    p.add_argument("--retry-after", type=int, default=30, metavar="S")
    p.add_argument("--journal", default=None, metavar="PATH")


def _mock_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8081)
    p.add_argument("--path", default="/wps", help="endpoint path")
    p.add_argument("--fault", choices=sorted(FAULT_FLAGS), default="none")
    p.add_argument("--latency-ms", type=int, default=0)


def _audit_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("url")
    p.add_argument("--style", choices=("auto", "raw-wps", "resource"), default="auto")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--timeout", type=float, default=10.0, metavar="S")


def _run_gateway(args: argparse.Namespace) -> int:
    from wpsrest.gateway import GatewayConfig, serve

    try:
        config = GatewayConfig(
            host=args.host,
            port=args.port,
            backend=args.backend,
            base_uri=args.base_uri,
            cache_ttl=args.cache_ttl,
            retry_after=args.retry_after,
            journal=args.journal,
        )
    except ValidationError as exc:
        print(f"gateway: invalid configuration\n{exc}", file=sys.stderr)
        return 2
    serve(config)
    return 0


def _run_mock(args: argparse.Namespace) -> int:
    from wpsrest.mock import FaultConfig, MockWPS, make_server

    try:
        fault = FaultConfig(FAULT_FLAGS[args.fault], args.latency_ms)
    except ValueError as exc:
        print(f"mock-wps: {exc}", file=sys.stderr)
        return 2
    mock = MockWPS(fault=fault)
    server = make_server(mock, args.host, args.port)
    host, port = server.server_address[:2]
    mock.endpoint_url = f"http://{host}:{port}{args.path}"
    print(f"mock WPS listening on {mock.endpoint_url} (fault={args.fault}, latency={args.latency_ms}ms)", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _run_audit(args: argparse.Namespace) -> int:
    from wpsrest.auditor import render_report, run_audit

    try:
        report = run_audit(args.url, args.style, timeout=args.timeout)
    except ValueError as exc:
        print(f"audit: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(render_report(report, args.format).decode("utf-8"))
    sys.stdout.flush()
    return 0 if report.reachable else 2


def _single(name: str, add, run, argv: Sequence[str] | None) -> int:
    parser = argparse.ArgumentParser(prog=name)
    add(parser)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return run(args)


def gateway_main(argv: Sequence[str] | None = None) -> int:
    return _single("gateway", _gateway_args, _run_gateway, argv)


def mock_main(argv: Sequence[str] | None = None) -> int:
    return _single("mock-wps", _mock_args, _run_mock, argv)


def audit_main(argv: Sequence[str] | None = None) -> int:
    return _single("audit", _audit_args, _run_audit, argv)


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="wpsrest")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, add, run in (
        ("gateway", _gateway_args, _run_gateway),
        ("mock-wps", _mock_args, _run_mock),
        ("audit", _audit_args, _run_audit),
    ):
        add(sub.add_parser(name))
        sub.choices[name].set_defaults(run=run)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.run(args)


if __name__ == "__main__":
    sys.exit(main())
