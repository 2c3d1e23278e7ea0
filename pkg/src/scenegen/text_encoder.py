"""Bidirectional GRU text encoder.

Per-word features are the concatenation of the recurrent state and the word
embedding, one row per real token. The final forward/backward states seed the
scene decoder's hidden map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence


@dataclass
class TextFeatures:
    features: torch.Tensor  # (B, M, 2*hidden + embed_dim)
    last_hidden: torch.Tensor  # (B, 2*hidden)
    mask: torch.Tensor  # (B, M) bool, False on padding

    @property
    def width(self) -> int:
        return self.features.shape[-1]


class TextEncoder(nn.Module):
    """Single-layer BiGRU over word embeddings, 256 units per direction."""

    def __init__(
        self,
        vocab_size: int,
        embed_dim: int = 300,
        hidden: int = 256,
        pad_id: int = 0,
        pretrained: np.ndarray | None = None,
        freeze_embeddings: bool = False,
    ):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=pad_id)
        if pretrained is not None:
            if pretrained.shape != (vocab_size, embed_dim):
                raise ValueError(
                    f"pretrained table {pretrained.shape} does not match "
                    f"({vocab_size}, {embed_dim})"
                )
            with torch.no_grad():
                self.embedding.weight.copy_(torch.from_numpy(pretrained))
        self.embedding.weight.requires_grad_(not freeze_embeddings)
        self.rnn = nn.GRU(embed_dim, hidden, batch_first=True, bidirectional=True)
        self.hidden = hidden
        self.feature_dim = 2 * hidden + embed_dim

    def forward(self, tokens: torch.Tensor, lengths: torch.Tensor) -> TextFeatures:
        if tokens.dim() != 2:
            raise ValueError(f"tokens must be (B, M), got {tuple(tokens.shape)}")
        if int(tokens.max()) >= self.embedding.num_embeddings:
            raise ValueError("token id outside the embedding table")
        if int(lengths.min()) < 1:
            raise ValueError("every sequence needs at least one token")
        total = tokens.shape[1]
        embedded = self.embedding(tokens)
        packed = pack_padded_sequence(
            embedded, lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        states, final = self.rnn(packed)
        states, _ = pad_packed_sequence(states, batch_first=True, total_length=total)
        mask = torch.arange(total, device=tokens.device)[None, :] < lengths[:, None]
        features = torch.cat([states, embedded], dim=-1) * mask.unsqueeze(-1)
        last_hidden = torch.cat([final[0], final[1]], dim=-1)
        return TextFeatures(features=features, last_hidden=last_hidden, mask=mask)

    def encode_one(self, token_ids: list[int]) -> TextFeatures:
        """Convenience wrapper for a single unpadded sentence."""
        device = self.embedding.weight.device
        tokens = torch.tensor([token_ids], dtype=torch.long, device=device)
        lengths = torch.tensor([len(token_ids)], dtype=torch.long, device=device)
        return self(tokens, lengths)
