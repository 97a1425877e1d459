"""Command-line interface.

The CLI is a thin client of the HTTP service: every command builds a
request, sends it to a server (``--server URL``) or to an in-process
instance of the same app, and renders the response. Exit codes: 0
success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

API_PREFIX = "/api/v1"
_EXIT_BY_KIND = {"usage": 1, "data": 2, "numeric": 3}

BENCH_COLUMNS = ["Loss", "Accuracy", "DSC", "Specificity", "Sensitivity", "Precision", "MAE"]


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message, 1)


class ApiClient:
    """HTTP client against a remote server or the in-process app."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
        else:
            from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)

    def close(self):
        self._client.close()

    def request(self, method: str, path: str, payload: dict | None = None) -> dict:
        try:
            resp = self._client.request(method, API_PREFIX + path, json=payload)
        except httpx.HTTPError as exc:
            raise CliError(f"cannot reach server: {exc}", 1) from None
        if resp.status_code == 200:
            return resp.json()
        try:
            body = resp.json()
        except json.JSONDecodeError:
            raise CliError(f"server error (HTTP {resp.status_code})", 3) from None
        if isinstance(body, dict) and "error" in body:
            err = body["error"]
            raise CliError(err.get("message", "error"), _EXIT_BY_KIND.get(err.get("kind"), 3))
        # FastAPI request-validation errors
        raise CliError(f"invalid request: {json.dumps(body.get('detail', body))}", 1)

    def post(self, path: str, payload: dict) -> dict:
        return self.request("POST", path, payload)

    def get(self, path: str) -> dict:
        return self.request("GET", path)


def _emit(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _fmt_moments(m: dict) -> str:
    lines = [
        f"n:               {m['n']}",
        f"mean:            {m['mean']:.6f}",
        f"std:             {m['std']:.6f}",
        f"skewness:        {m['skewness']:.6f}",
        f"kurtosis_excess: {m['kurtosis_excess']:.6f}",
    ]
    return "\n".join(lines)


def cmd_analyze(args, client: ApiClient) -> int:
    payload = {
        "manifest": str(Path(args.manifest).resolve()),
        "include_empty": args.include_empty,
        "force_loss": args.force_loss,
    }
    resp = client.post("/analyze", payload)
    if args.format == "json":
        _emit(json.dumps(resp, indent=2), args.out)
    else:
        text = (
            f"samples:         {resp['n_samples']} ({resp['n_present']} ROI-present)\n"
            + _fmt_moments(resp["moments"])
            + f"\nselected_loss:   {resp['selected_loss']}"
            + ("  (forced)" if resp.get("forced") else "")
        )
        _emit(text, args.out)
    return 0


def cmd_gen(args, client: ApiClient) -> int:
    payload = {
        "out_dir": str(Path(args.out_dir).resolve()),
        "count": args.count,
        "width": args.width,
        "height": args.height,
        "roi_fraction": args.roi_fraction,
        "regime": args.regime,
        "noise_sigma": args.noise_sigma,
        "contrast": args.contrast,
        "seed": args.seed,
    }
    resp = client.post("/generate", payload)
    if args.format == "json":
        _emit(json.dumps(resp, indent=2), args.out)
    else:
        lines = [
            f"manifest:        {resp['manifest']}",
            f"samples:         {resp['count']} ({resp['n_present']} ROI-present)",
        ]
        if resp.get("moments"):
            lines.append(_fmt_moments(resp["moments"]))
            lines.append(f"selected_loss:   {resp['selected_loss']}")
        _emit("\n".join(lines), args.out)
    return 0


def cmd_train(args, client: ApiClient) -> int:
    payload = {
        "manifest": str(Path(args.manifest).resolve()),
        "loss": args.loss,
        "ratio": args.ratio,
        "epochs": args.epochs,
        "learning_rate": args.lr,
        "batch_size": args.batch,
        "seed": args.seed,
        "threshold": args.threshold,
        "include_empty": args.include_empty,
        "model_out": str(Path(args.model_out).resolve()) if args.model_out else None,
        "history_out": str(Path(args.history_out).resolve()) if args.history_out else None,
    }
    resp = client.post("/train", payload)
    if args.format == "json":
        _emit(json.dumps(resp, indent=2), args.out)
    else:
        losses = resp["epoch_losses"]
        lines = [
            f"trained on:      {resp['n_train']} samples",
            f"selected_loss:   {resp['selected_loss']}",
        ]
        if resp.get("moments_at_selection"):
            lines.append(_fmt_moments(resp["moments_at_selection"]))
        if losses:
            lines.append(f"loss:            {losses[0]:.6f} -> {losses[-1]:.6f} over {len(losses)} epochs")
        lines.append(f"weights:         {resp['model']['weights']}")
        _emit("\n".join(lines), args.out)
    return 0


def _metric_line(rec: dict, label: str) -> str:
    return (
        f"{label:<12} {rec['accuracy']:>8.4f} {rec['dsc']:>8.4f} {rec['specificity']:>11.4f} "
        f"{rec['sensitivity']:>11.4f} {rec['precision']:>9.4f} {rec['mae']:>8.4f}"
    )


def cmd_eval(args, client: ApiClient) -> int:
    payload = {
        "manifest": str(Path(args.manifest).resolve()),
        "model_path": str(Path(args.model).resolve()),
        "threshold": args.threshold,
    }
    resp = client.post("/evaluate", payload)
    if args.format == "json":
        # JSONL: one record per image, then the aggregate
        lines = []
        for rec in resp["per_image"]:
            lines.append(json.dumps(rec))
        agg = dict(resp["aggregate"])
        agg["id"] = "aggregate"
        lines.append(json.dumps(agg))
        _emit("\n".join(lines), args.out)
    else:
        header = f"{'Sample':<12} {'Accuracy':>8} {'DSC':>8} {'Specificity':>11} {'Sensitivity':>11} {'Precision':>9} {'MAE':>8}"
        lines = [header]
        for rec in resp["per_image"]:
            lines.append(_metric_line(rec, rec["id"]))
        lines.append(_metric_line(resp["aggregate"], "aggregate"))
        _emit("\n".join(lines), args.out)
    return 0


def cmd_bench(args, client: ApiClient) -> int:
    ratios = [float(x) for x in args.ratios.split(",") if x != ""]
    losses = [x.strip() for x in args.losses.split(",") if x.strip()]
    payload = {
        "manifest": str(Path(args.manifest).resolve()),
        "ratios": ratios,
        "losses": losses,
        "seed": args.seed,
        "epochs": args.epochs,
        "learning_rate": args.lr,
        "batch_size": args.batch,
        "test_fraction": args.test_fraction,
        "threshold": args.threshold,
    }
    resp = client.post("/bench", payload)
    if args.format == "json":
        _emit(json.dumps(resp, indent=2), args.out)
        return 0
    lines = []
    for ratio in ratios:
        lines.append(f"ratio {ratio:g}")
        lines.append(
            f"{BENCH_COLUMNS[0]:<12} {BENCH_COLUMNS[1]:>8} {BENCH_COLUMNS[2]:>8} "
            f"{BENCH_COLUMNS[3]:>11} {BENCH_COLUMNS[4]:>11} {BENCH_COLUMNS[5]:>9} {BENCH_COLUMNS[6]:>8}"
        )
        for row in resp["rows"]:
            if row["ratio"] != ratio:
                continue
            if row.get("skipped"):
                lines.append(f"{row['display']:<12} skipped: {row['skipped']}")
            else:
                lines.append(_metric_line(row, row["display"]))
        lines.append("")
    _emit("\n".join(lines).rstrip("\n"), args.out)
    return 0


def cmd_serve(args, client=None) -> int:
    import uvicorn

    uvicorn.run("calf.service.app:app", host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="calf", description="Adaptive segmentation loss toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, manifest=True):
        if manifest:
            p.add_argument("manifest", help="corpus manifest (JSONL)")
        p.add_argument("--server", default=None, help="service URL (default: in-process)")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--out", default=None, help="write output to a file instead of stdout")
        p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("analyze", help="report area moments and the selected loss")
    common(p)
    p.add_argument("--include-empty", action="store_true", help="count ROI-absent masks as area 0")
    p.add_argument("--force-loss", default=None, help="override the selector's choice")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    common(p, manifest=False)
    p.add_argument("--out-dir", required=True, help="corpus output directory")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--roi-fraction", type=float, default=0.7)
    p.add_argument("--regime", default=None, help="target selector branch (fisher, logit, ...)")
    p.add_argument("--noise-sigma", type=float, default=8.0)
    p.add_argument("--contrast", type=float, default=60.0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train the tiny segmenter")
    common(p)
    p.add_argument("--loss", default="auto", help="loss kind, or 'auto' for moment selection")
    p.add_argument("--ratio", type=float, default=0.409, help="ROI-present fraction filter")
    p.add_argument("--no-ratio", action="store_true", help="train on the corpus as-is")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=10.0)
    p.add_argument("--batch", type=int, default=1)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--include-empty", action="store_true")
    p.add_argument("--model-out", default=None, help="write the model JSON here")
    p.add_argument("--history-out", default=None, help="write the training history JSON here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on a corpus")
    common(p)
    p.add_argument("--model", required=True, help="model JSON path")
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="loss-by-ratio benchmark sweep")
    common(p)
    p.add_argument("--ratios", default="0.409", help="comma-separated ratios")
    p.add_argument(
        "--losses",
        default="bce,dice,tversky,iou,focal,bce_dice,calf",
        help="comma-separated losses ('calf' = auto-selected)",
    )
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=10.0)
    p.add_argument("--batch", type=int, default=1)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "train" and args.no_ratio:
            args.ratio = None
        client = ApiClient(args.server)
        try:
            return args.func(args, client)
        finally:
            client.close()
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
