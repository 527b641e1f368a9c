"""Toy frame-interpolation trainer for animsynth-format datasets.

Consumes a generated dataset purely through its on-disk interface
(manifest.json, PNG frames) and trains a small network predicting the
middle frame of each triplet from the outer two.
"""

from animtrainer.data import Triplet, load_manifest, load_triplets, split_holdout
from animtrainer.evaluate import eval_baseline
from animtrainer.metrics import psnr
from animtrainer.model import ToyInterpolator
from animtrainer.train import TrainResult, TrainRun, train_toy

__all__ = [
    "Triplet",
    "load_manifest",
    "load_triplets",
    "split_holdout",
    "eval_baseline",
    "psnr",
    "ToyInterpolator",
    "TrainRun",
    "TrainResult",
    "train_toy",
]
