"""A compact four-level encoder-decoder producing per-pixel logits."""

import torch
import torch.nn.functional as F
from torch import nn


def _block(cin, cout):
    # group norm rather than batch norm: per-image statistics, so eval
    # mode matches train mode exactly and single-image batches are fine
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, padding=1),
        nn.GroupNorm(4, cout),
        nn.ReLU(inplace=True),
        nn.Conv2d(cout, cout, 3, padding=1),
        nn.GroupNorm(4, cout),
        nn.ReLU(inplace=True),
    )


def _up_to(x, ref):
    return F.interpolate(x, size=ref.shape[-2:], mode="bilinear", align_corners=False)


class FgNet(nn.Module):
    """Three pooling stages down, bilinear stages up, skip concats.

    About half a million parameters at the default width. Inputs of any
    size work: odd extents are reflect-padded to a multiple of 8 and the
    logits cropped back.
    """

    def __init__(self, base: int = 16):
        super().__init__()
        c1, c2, c3, c4 = base, base * 2, base * 4, base * 8
        self.enc1 = _block(3, c1)
        self.enc2 = _block(c1, c2)
        self.enc3 = _block(c2, c3)
        self.mid = _block(c3, c4)
        self.dec3 = _block(c4 + c3, c3)
        self.dec2 = _block(c3 + c2, c2)
        self.dec1 = _block(c2 + c1, c1)
        self.head = nn.Conv2d(c1, 1, 1)
        self.pool = nn.MaxPool2d(2)

    def forward(self, x):
        h, w = x.shape[-2:]
        pad_h, pad_w = (-h) % 8, (-w) % 8
        if pad_h or pad_w:
            x = F.pad(x, (0, pad_w, 0, pad_h), mode="reflect")
        e1 = self.enc1(x)
        e2 = self.enc2(self.pool(e1))
        e3 = self.enc3(self.pool(e2))
        m = self.mid(self.pool(e3))
        d3 = self.dec3(torch.cat([_up_to(m, e3), e3], dim=1))
        d2 = self.dec2(torch.cat([_up_to(d3, e2), e2], dim=1))
        d1 = self.dec1(torch.cat([_up_to(d2, e1), e1], dim=1))
        return self.head(d1)[..., :h, :w]


def parameter_count(model) -> int:
    return sum(p.numel() for p in model.parameters())
