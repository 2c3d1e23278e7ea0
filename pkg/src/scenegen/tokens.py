"""Tokenization, the text-side vocabulary, and pretrained embedding files."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError

_PUNCT = re.compile(r"[^a-z0-9\s]")

PAD_WORD = "<pad>"
UNK_WORD = "<unk>"


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace."""
    if not isinstance(text, str) or not text.strip():
        raise ValueError("cannot tokenize empty text")
    words = _PUNCT.sub(" ", text.lower()).split()
    if not words:
        raise ValueError(f"no tokens left after stripping punctuation: {text!r}")
    return words


@dataclass
class TokenVocabulary:
    """Word list with pad/unk specials; encodes to dense ids."""

    words: list[str] = field(default_factory=lambda: [PAD_WORD, UNK_WORD])

    pad_id = 0
    unk_id = 1

    def __post_init__(self):
        if self.words[:2] != [PAD_WORD, UNK_WORD]:
            raise ValueError("token vocabulary must start with pad and unk")
        self._index = {w: i for i, w in enumerate(self.words)}
        if len(self._index) != len(self.words):
            raise ValueError("duplicate words in token vocabulary")

    def __len__(self) -> int:
        return len(self.words)

    def id(self, word: str) -> int:
        return self._index.get(word, self.unk_id)

    def word(self, token_id: int) -> str:
        return self.words[token_id]

    def encode(self, text: str, max_len: int = 50) -> list[int]:
        """Token ids for a sentence, truncated to ``max_len``."""
        return [self.id(w) for w in tokenize(text)[:max_len]]

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.words) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TokenVocabulary":
        words = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(words=words)


def build_token_vocabulary(texts, min_count: int = 1) -> TokenVocabulary:
    counts: dict[str, int] = {}
    for text in texts:
        for word in tokenize(text):
            counts[word] = counts.get(word, 0) + 1
    kept = sorted(w for w, c in counts.items() if c >= min_count)
    return TokenVocabulary(words=[PAD_WORD, UNK_WORD] + kept)


def load_embedding_file(path) -> tuple[dict[str, np.ndarray], int]:
    """Plain-text embeddings: one token per line, space-separated floats."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.rstrip().split(" ")
        word, values = parts[0], parts[1:]
        if dim is None:
            dim = len(values)
            if dim == 0:
                raise ParseError("no embedding values on first line", path=path, line=lineno)
        elif len(values) != dim:
            raise ParseError(
                f"expected {dim} values, got {len(values)}", path=path, line=lineno
            )
        try:
            vectors[word] = np.array(values, dtype=np.float32)
        except ValueError:
            raise ParseError("bad float in embedding row", path=path, line=lineno) from None
    if not vectors:
        raise ParseError("empty embedding file", path=path)
    return vectors, dim


def embedding_matrix(
    vocab: TokenVocabulary,
    pretrained: dict[str, np.ndarray] | None = None,
    dim: int = 300,
    seed: int = 0,
) -> np.ndarray:
    """Initial embedding rows for a vocabulary.

    Rows for words present in ``pretrained`` are copied; everything else gets
    the unk vector, the mean of all loaded vectors. Without a pretrained
    table, rows are small random normals. The pad row is zero either way.
    """
    if pretrained:
        dim = len(next(iter(pretrained.values())))
        unk = np.mean(np.stack(list(pretrained.values())), axis=0)
        out = np.tile(unk, (len(vocab), 1)).astype(np.float32)
        for i, word in enumerate(vocab.words):
            if word in pretrained:
                out[i] = pretrained[word]
    else:
        rng = np.random.default_rng(seed)
        out = rng.normal(scale=0.1, size=(len(vocab), dim)).astype(np.float32)
    out[vocab.pad_id] = 0.0
    return out
