"""A small encoder-decoder that predicts the middle frame of a triplet."""

from __future__ import annotations

import torch
import torch.nn as nn


class ToyInterpolator(nn.Module):
    """Predicts frame 2 from frames 1 and 3 (6 input channels).

    The network regresses a residual on top of the per-pixel average
    (I1 + I3) / 2; the last convolution starts at zero, so the untrained
    model reproduces the average exactly and training only has to learn
    the correction around moving content.
    """

    def __init__(self):
        super().__init__()
        act = nn.ReLU(inplace=True)
        self.encoder = nn.Sequential(
            nn.Conv2d(6, 16, 3, padding=1), act,
            nn.Conv2d(16, 32, 3, stride=2, padding=1), act,
            nn.Conv2d(32, 64, 3, stride=2, padding=1), act,
            nn.Conv2d(64, 64, 3, padding=1), act,
            nn.Conv2d(64, 64, 3, padding=1), act,
            nn.Conv2d(64, 64, 3, padding=1), act,
        )
        self.decoder = nn.Sequential(
            nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
            nn.Conv2d(64, 32, 3, padding=1), act,
            nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
            nn.Conv2d(32, 16, 3, padding=1), act,
            nn.Conv2d(16, 3, 3, padding=1),
        )
        last = self.decoder[-1]
        nn.init.zeros_(last.weight)
        nn.init.zeros_(last.bias)

    def forward(self, i1: torch.Tensor, i3: torch.Tensor) -> torch.Tensor:
        x = torch.cat([i1, i3], dim=1)
        residual = self.decoder(self.encoder(x))
        return ((i1 + i3) * 0.5 + residual).clamp(0.0, 1.0)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())
