"""The depth-provider command: add depth sources to a session directory.

    depth-provider infer --session DIR [--model ID] [--source fm] [--overwrite]
    depth-provider stub  --session DIR --mode echo-gt|constant|degraded ...

Exit codes: 0 success, 1 runtime failure (bad session, unknown model,
source collision), 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .providers import (
    Constant,
    Degraded,
    EchoGt,
    ProviderConfig,
    ProviderError,
    infer_session,
    stub_session,
)
from .sessionio import SessionFormatError

logger = logging.getLogger("depth_provider")


def _parse_clamp(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected MIN,MAX got {text!r}")
    return float(parts[0]), float(parts[1])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="depth-provider",
        description="Add model-predicted or stubbed depth sources to an RGBD session.",
    )
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    pi = sub.add_parser("infer", help="run a metric-depth model over the session")
    pi.add_argument("--session", required=True, help="session directory")
    pi.add_argument("--model", default=ProviderConfig.model,
                    help="model identifier or module:attr plugin (default: %(default)s)")
    pi.add_argument("--source", default=ProviderConfig.source,
                    help="output depth source name (default: %(default)s)")
    pi.add_argument("--device", default=ProviderConfig.device)
    pi.add_argument("--batch-size", type=int, default=ProviderConfig.batch_size)
    pi.add_argument("--clamp", type=_parse_clamp, default=ProviderConfig.clamp,
                    metavar="MIN,MAX", help="depth clamp range in meters (default: 0.01,65)")
    pi.add_argument("--overwrite", action="store_true",
                    help="replace the source if it already exists")

    ps = sub.add_parser("stub", help="write a synthetic depth source (no model needed)")
    ps.add_argument("--session", required=True, help="session directory")
    ps.add_argument("--mode", required=True, choices=["echo-gt", "constant", "degraded"])
    ps.add_argument("--depth", type=float, default=2.0,
                    help="constant mode: meters stored at valid pixels")
    ps.add_argument("--sigma", type=float, default=0.02,
                    help="degraded mode: Gaussian noise sigma in meters")
    ps.add_argument("--dropout", type=float, default=0.1,
                    help="degraded mode: fraction of valid pixels zeroed")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--source", default=ProviderConfig.source)
    ps.add_argument("--overwrite", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "infer":
            config = ProviderConfig(
                model=args.model, device=args.device, batch_size=args.batch_size,
                source=args.source, clamp=args.clamp, overwrite=args.overwrite,
            )
            report = infer_session(args.session, config)
        else:
            if args.mode == "echo-gt":
                mode = EchoGt()
            elif args.mode == "constant":
                mode = Constant(depth=args.depth)
            else:
                mode = Degraded(sigma=args.sigma, dropout=args.dropout, seed=args.seed)
            report = stub_session(args.session, mode, source=args.source,
                                  overwrite=args.overwrite)
    except (ProviderError, SessionFormatError, ValueError, OSError) as e:
        print(f"depth-provider: error: {e}", file=sys.stderr)
        return 1
    print(f"wrote depth source {report.source!r} for {len(report.written)} frames"
          + (f", skipped {len(report.skipped)}" if report.skipped else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
