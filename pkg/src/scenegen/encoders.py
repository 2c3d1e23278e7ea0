"""Canvas encoders and the convolutional recurrent cell.

Each task has its own canvas encoder. Layout canvases pass through a strided
stem, two residual blocks, and a bilinear resize to the 28x28 grid. Composite
canvases enter through a grouped convolution that folds each category's three
color channels into one, then six residual blocks. Abstract scenes use a
pluggable extractor: anything exposing ``out_channels`` and mapping
(B, 3, H, W) to (B, C, grid_h, grid_w). A small trainable CNN is the default
so nothing requires external weights.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn


class ResidualBlock(nn.Module):
    """Two 3x3 convolutions and a skip connection.

    The skip is the identity when shape is preserved, otherwise a strided
    1x1 convolution.
    """

    def __init__(self, in_channels, out_channels, stride=1, negative_slope=0.0):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, out_channels, 3, stride=stride, padding=1)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, padding=1)
        if in_channels == out_channels and stride == 1:
            self.skip = nn.Identity()
        else:
            self.skip = nn.Conv2d(in_channels, out_channels, 1, stride=stride)
        self.negative_slope = negative_slope

    def _act(self, x):
        return F.leaky_relu(x, self.negative_slope) if self.negative_slope else F.relu(x)

    def forward(self, x):
        h = self._act(self.conv1(x))
        h = self.conv2(h)
        return self._act(h + self.skip(x))


class LayoutCanvasEncoder(nn.Module):
    """(|V|, 64, 64) one-hot canvas -> (256, 28, 28) feature map."""

    def __init__(self, in_channels, base_channels=128, out_channels=256, grid=(28, 28)):
        super().__init__()
        self.stem = nn.Conv2d(in_channels, base_channels, 7, stride=2, padding=3)
        self.block1 = ResidualBlock(base_channels, base_channels, stride=1)
        self.block2 = ResidualBlock(base_channels, out_channels, stride=2)
        self.grid = grid
        self.in_channels = in_channels
        self.out_channels = out_channels

    def forward(self, x):
        if x.shape[1] != self.in_channels:
            raise ValueError(f"expected {self.in_channels} channels, got {x.shape[1]}")
        h = F.relu(self.stem(x))
        h = self.block1(h)
        h = self.block2(h)
        return F.interpolate(h, size=self.grid, mode="bilinear", align_corners=False)


class CompositeCanvasEncoder(nn.Module):
    """(3|V|, 128, 128) layered canvas -> (4|V|, 32, 32) feature map.

    The stem is depthwise-grouped: each category's three color channels
    convolve to a single output channel. LeakyReLU(0.2) throughout.
    """

    def __init__(self, vocab_size):
        super().__init__()
        v = vocab_size
        self.stem = nn.Conv2d(3 * v, v, 7, stride=2, padding=3, groups=v)
        self.blocks = nn.Sequential(
            ResidualBlock(v, v, stride=1, negative_slope=0.2),
            ResidualBlock(v, 2 * v, stride=1, negative_slope=0.2),
            ResidualBlock(2 * v, 2 * v, stride=1, negative_slope=0.2),
            ResidualBlock(2 * v, 3 * v, stride=2, negative_slope=0.2),
            ResidualBlock(3 * v, 3 * v, stride=1, negative_slope=0.2),
            ResidualBlock(3 * v, 4 * v, stride=1, negative_slope=0.2),
        )
        self.in_channels = 3 * v
        self.out_channels = 4 * v

    def forward(self, x):
        if x.shape[1] != self.in_channels:
            raise ValueError(f"expected {self.in_channels} channels, got {x.shape[1]}")
        h = F.leaky_relu(self.stem(x), 0.2)
        return self.blocks(h)


class SmallAbstractEncoder(nn.Module):
    """Trainable fallback extractor for RGB canvases: 4 convolutions then an
    adaptive pool onto the prediction grid. Production runs can swap in a
    frozen pretrained backbone that honors the same contract."""

    def __init__(self, out_channels=64, grid=(28, 28)):
        super().__init__()
        mid = max(out_channels // 2, 8)
        self.features = nn.Sequential(
            nn.Conv2d(3, mid, 3, stride=2, padding=1), nn.ReLU(),
            nn.Conv2d(mid, out_channels, 3, stride=2, padding=1), nn.ReLU(),
            nn.Conv2d(out_channels, out_channels, 3, padding=1), nn.ReLU(),
            nn.Conv2d(out_channels, out_channels, 3, padding=1), nn.ReLU(),
        )
        self.pool = nn.AdaptiveAvgPool2d(grid)
        self.out_channels = out_channels

    def forward(self, x):
        if x.shape[1] != 3:
            raise ValueError(f"expected an RGB canvas, got {x.shape[1]} channels")
        return self.pool(self.features(x))


class ConvGRUCell(nn.Module):
    """GRU gating applied per spatial location with 3x3 convolutions.

    Update gate at 1 replaces the state with the candidate; at 0 it carries
    the previous state through unchanged.
    """

    def __init__(self, in_channels, hidden_channels, kernel_size=3):
        super().__init__()
        padding = kernel_size // 2
        self.gates = nn.Conv2d(
            in_channels + hidden_channels, 2 * hidden_channels, kernel_size, padding=padding
        )
        self.candidate = nn.Conv2d(
            in_channels + hidden_channels, hidden_channels, kernel_size, padding=padding
        )
        self.in_channels = in_channels
        self.hidden_channels = hidden_channels

    def forward(self, x, hidden):
        if x.shape[1] != self.in_channels or hidden.shape[1] != self.hidden_channels:
            raise ValueError(
                f"channel mismatch: input {x.shape[1]} vs {self.in_channels}, "
                f"hidden {hidden.shape[1]} vs {self.hidden_channels}"
            )
        if x.shape[2:] != hidden.shape[2:]:
            raise ValueError(
                f"spatial mismatch: {tuple(x.shape[2:])} vs {tuple(hidden.shape[2:])}"
            )
        stacked = torch.cat([x, hidden], dim=1)
        update, reset = torch.sigmoid(self.gates(stacked)).chunk(2, dim=1)
        candidate = torch.tanh(self.candidate(torch.cat([x, reset * hidden], dim=1)))
        return (1.0 - update) * hidden + update * candidate


class SpatialReplicator(nn.Module):
    """Broadcast the text encoder's last hidden state over every grid cell."""

    def __init__(self, text_dim, hidden_channels):
        super().__init__()
        self.project = (
            nn.Identity() if text_dim == hidden_channels else nn.Linear(text_dim, hidden_channels)
        )
        self.hidden_channels = hidden_channels

    def forward(self, last_hidden, grid):
        h, w = grid
        v = self.project(last_hidden)
        return v[:, :, None, None].expand(-1, -1, h, w).contiguous()
