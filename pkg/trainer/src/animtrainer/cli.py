"""Command-line entry points: train a toy model and evaluate it."""

from __future__ import annotations

import argparse
import json
import sys

from animtrainer.evaluate import eval_baseline
from animtrainer.train import TrainRun, load_checkpoint, train_toy


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="animtrainer",
        description="Train and evaluate a toy frame interpolator on a triplet dataset",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train on a generated dataset")
    p_train.add_argument("manifest", help="path to manifest.json")
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--steps", type=int, default=1500)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--crop-size", type=int, default=128)
    p_train.add_argument("--batch-size", type=int, default=4)
    p_train.add_argument("--lr", type=float, default=1e-3)
    p_train.add_argument("--holdout", type=int, default=32)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint against the baseline")
    p_eval.add_argument("manifest")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--ids", required=True,
                        help="comma-separated holdout entry ids")

    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            run = TrainRun(
                manifest_path=args.manifest, out_dir=args.out, steps=args.steps,
                crop_size=args.crop_size, batch_size=args.batch_size,
                learning_rate=args.lr, seed=args.seed, holdout_count=args.holdout,
            )
            result = train_toy(run)
            table = eval_baseline(args.manifest, result.holdout_ids, result.model)
            print(json.dumps({
                "checkpoint": str(result.checkpoint_path),
                "log": str(result.log_path),
                "final_l1": result.losses[-1][1],
                "mean_baseline_db": table["mean_baseline_db"],
                "mean_model_db": table["mean_model_db"],
            }, indent=2))
        else:
            model = load_checkpoint(args.checkpoint)
            ids = [int(x) for x in args.ids.split(",") if x]
            print(json.dumps(eval_baseline(args.manifest, ids, model), indent=2))
    except (OSError, ValueError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
