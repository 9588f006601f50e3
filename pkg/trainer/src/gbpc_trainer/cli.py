"""Command line front end for the trainer.

Subcommands:

* train   fit the few-shot network on a dataset manifest
* infer   fuse two images with a trained checkpoint
* parity  replay kernel fixtures and report per-component errors

Exit codes mirror the prior toolkit: 0 success, 2 usage error,
3 missing input file, 4 invalid input or contract violation.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .data import ManifestError
from .infer import DecodeError, fuse_images
from .parity import ParityError, kernel_parity
from .train import TrainConfig, train

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_INVALID_INPUT = 4

_OVERRIDES = {"pos": (1.0, 0.0), "even": (0.5, 0.5), "bnd": (0.0, 1.0),
              "manifest": None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbpc-train",
        description="Few-shot fusion CNN under the adaptive prior loss",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("train", help="fit the network on a manifest",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--manifest", required=True, help="dataset manifest JSONL")
    p.add_argument("--fixtures", required=True,
                   help="kernel parity fixtures JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=16, dest="batch_size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--override", choices=sorted(_OVERRIDES), default="manifest",
                   help="coefficient source: per-patch sidecars or a fixed "
                        "(r_pos, r_bnd) ablation setting")
    p.add_argument("--no-pos", action="store_true",
                   help="drop the positive-region Sobel term")
    p.add_argument("--no-bnd", action="store_true",
                   help="drop the boundary-region Sobel term")
    p.add_argument("--no-laplacian", action="store_true",
                   help="drop the Laplacian term")
    p.add_argument("--n-shot", type=int, default=None, dest="n_shot",
                   help="train on the first N source pairs only")
    p.add_argument("--json", action="store_true", help="print a JSON summary")

    p = subs.add_parser("infer", help="fuse two images with a checkpoint",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--a", required=True, help="source image A")
    p.add_argument("--b", required=True, help="source image B")
    p.add_argument("--out", required=True, help="output fused PNG")
    p.add_argument("--json", action="store_true", help="print a JSON summary")

    p = subs.add_parser("parity", help="replay kernel parity fixtures",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--fixtures", required=True)
    p.add_argument("--atol", type=float, default=1e-4)
    p.add_argument("--json", action="store_true", help="print a JSON report")

    return parser


def _cmd_train(args) -> int:
    config = TrainConfig(
        manifest=args.manifest, fixtures=args.fixtures, out_dir=args.out,
        epochs=args.epochs, lr=args.lr, batch_size=args.batch_size,
        seed=args.seed, override=_OVERRIDES[args.override],
        use_pos=not args.no_pos, use_bnd=not args.no_bnd,
        use_laplacian=not args.no_laplacian, n_shot=args.n_shot)
    result = train(config)
    summary = {
        "checkpoint": str(result.checkpoint_path),
        "loss_curve": str(result.curve_path),
        "epochs": len(result.epoch_losses),
        "first_epoch_loss": result.epoch_losses[0],
        "final_epoch_loss": result.epoch_losses[-1],
    }
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"checkpoint -> {result.checkpoint_path} "
              f"(loss {result.epoch_losses[0]:.6g} -> "
              f"{result.epoch_losses[-1]:.6g} over "
              f"{len(result.epoch_losses)} epochs)")
    return EXIT_OK


def _cmd_infer(args) -> int:
    out = fuse_images(args.checkpoint, args.a, args.b, args.out)
    if args.json:
        print(json.dumps({"fused": str(out)}))
    else:
        print(f"fused -> {out}")
    return EXIT_OK


def _cmd_parity(args) -> int:
    report = kernel_parity(args.fixtures, atol=args.atol)
    if args.json:
        payload = {
            "fixtures": report.fixtures,
            "atol": report.atol,
            "ok": report.ok,
            "cases": [{"name": c.name, "ok": c.ok, "errors": c.errors}
                      for c in report.cases],
        }
        print(json.dumps(payload, sort_keys=True))
    else:
        worst = {comp: max(c.errors[comp] for c in report.cases)
                 for comp in report.cases[0].errors} if report.cases else {}
        print(f"parity {'ok' if report.ok else 'FAILED'} over "
              f"{len(report.cases)} cases (atol {report.atol:g})")
        for comp, err in worst.items():
            print(f"  {comp}: max {err:.3e}")
        for line in report.failures():
            print(f"  FAIL {line}")
    return EXIT_OK if report.ok else EXIT_INVALID_INPUT


_COMMANDS = {"train": _cmd_train, "infer": _cmd_infer, "parity": _cmd_parity}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"gbpc-train: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (ManifestError, ParityError, DecodeError, ValueError) as exc:
        print(f"gbpc-train: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
