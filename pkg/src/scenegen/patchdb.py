"""Foreground patch records, on-disk database, and exact retrieval index.

A patch is a segmented foreground region: a color crop, a binary mask, and a
semantic label map of its context window (the segment box enlarged by 50% per
side). Retrieval is an exact linear scan under Euclidean distance; corpora at
this scale are small enough that correctness beats index structures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from PIL import Image

from .errors import NoNegativeAvailable, ParseError, PlacementError, RetrievalMiss
from .scene import ObjectToken, TaskSpec, continuize_location, size_bin_center

DB_VERSION = "patchdb.v1"
INDEX_VERSION = "patchindex.v1"


@dataclass
class PatchRecord:
    """One segment: color pixels, foreground mask, and context label map.

    ``context`` stores vocabulary indices shifted by +1 (0 = empty) over the
    context window; expand to one-hot with :func:`context_onehot`. Boxes are
    pixel (x0, y0, x1, y1) in the source image.
    """

    patch_id: str
    category: str
    color: np.ndarray  # uint8 (H, W, 3), context window crop
    mask: np.ndarray  # bool (H, W), segment foreground within the window
    context: np.ndarray  # int32 (H, W), category index + 1, 0 = empty
    source_image_id: str
    box: tuple[int, int, int, int]
    context_box: tuple[int, int, int, int]
    embedding: Optional[np.ndarray] = None  # float32 (128,)

    def __post_init__(self):
        if self.mask.sum() == 0:
            raise ValueError(f"patch {self.patch_id} has an empty mask")
        if self.color.shape[:2] != self.mask.shape or self.context.shape != self.mask.shape:
            raise ValueError(f"patch {self.patch_id} has inconsistent window shapes")


def enlarge_box(box, image_size, factor=0.5):
    """Grow a pixel box by ``factor`` of its own size in each direction, clipped."""
    x0, y0, x1, y1 = box
    w_img, h_img = image_size
    dw = (x1 - x0) * factor
    dh = (y1 - y0) * factor
    return (
        int(max(x0 - dw, 0)),
        int(max(y0 - dh, 0)),
        int(min(x1 + dw, w_img)),
        int(min(y1 + dh, h_img)),
    )


def context_onehot(record: PatchRecord, vocab_size: int, out_size: int = 64) -> np.ndarray:
    """Expand the stored label map to a (|V|, out_size, out_size) one-hot array."""
    labels = np.asarray(
        Image.fromarray(record.context.astype(np.uint16)).resize(
            (out_size, out_size), Image.NEAREST
        )
    ).astype(np.int32)
    onehot = np.zeros((vocab_size, out_size, out_size), dtype=np.float32)
    rows, cols = np.nonzero(labels)
    onehot[labels[rows, cols] - 1, rows, cols] = 1.0
    return onehot


class PatchDatabase:
    """In-memory collection of patch records with category grouping."""

    def __init__(self, records: Iterable[PatchRecord] = ()):
        self._records: dict[str, PatchRecord] = {}
        self.by_category: dict[str, list[str]] = {}
        for record in records:
            self.add(record)

    def add(self, record: PatchRecord) -> None:
        if record.patch_id in self._records:
            raise ValueError(f"duplicate patch id {record.patch_id}")
        self._records[record.patch_id] = record
        self.by_category.setdefault(record.category, []).append(record.patch_id)

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, patch_id: str) -> bool:
        return patch_id in self._records

    def get(self, patch_id: str) -> PatchRecord:
        try:
            return self._records[patch_id]
        except KeyError:
            raise RetrievalMiss(f"patch id {patch_id!r} not in database") from None

    def records(self) -> list[PatchRecord]:
        return list(self._records.values())

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        rows = [DB_VERSION, "id\tcategory\tsource\tx0\ty0\tx1\ty1\tcx0\tcy0\tcx1\tcy1"]
        for record in self._records.values():
            Image.fromarray(record.color).save(directory / f"{record.patch_id}.color.png")
            Image.fromarray(record.mask.astype(np.uint8) * 255).save(
                directory / f"{record.patch_id}.mask.png"
            )
            Image.fromarray(record.context.astype(np.uint16)).save(
                directory / f"{record.patch_id}.context.png"
            )
            rows.append(
                "\t".join(
                    [record.patch_id, record.category, record.source_image_id]
                    + [str(v) for v in record.box]
                    + [str(v) for v in record.context_box]
                )
            )
        (directory / "index.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, directory) -> "PatchDatabase":
        directory = Path(directory)
        index_path = directory / "index.tsv"
        if not index_path.exists():
            raise ParseError("patch database index missing", path=index_path)
        lines = index_path.read_text(encoding="utf-8").splitlines()
        if not lines or lines[0] != DB_VERSION:
            raise ParseError(f"expected header {DB_VERSION}", path=index_path, line=1)
        db = cls()
        for lineno, line in enumerate(lines[2:], start=3):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 11:
                raise ParseError("expected 11 columns", path=index_path, line=lineno)
            patch_id, category, source = parts[:3]
            box = tuple(int(v) for v in parts[3:7])
            context_box = tuple(int(v) for v in parts[7:11])
            color = np.asarray(Image.open(directory / f"{patch_id}.color.png"))
            mask = np.asarray(Image.open(directory / f"{patch_id}.mask.png")) > 0
            context = np.asarray(Image.open(directory / f"{patch_id}.context.png")).astype(np.int32)
            db.add(
                PatchRecord(
                    patch_id=patch_id,
                    category=category,
                    color=color,
                    mask=mask,
                    context=context,
                    source_image_id=source,
                    box=box,
                    context_box=context_box,
                )
            )
        return db


@dataclass
class PatchIndex:
    """Per-category embedding matrix for exact nearest-neighbor lookup."""

    ids: dict[str, list[str]] = field(default_factory=dict)
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    dim: int = 128

    def add(self, patch_id: str, category: str, vector: np.ndarray) -> None:
        vector = np.asarray(vector, dtype=np.float32)
        if vector.shape != (self.dim,):
            raise ValueError(f"expected a {self.dim}-d vector, got {vector.shape}")
        if not np.all(np.isfinite(vector)):
            raise ValueError(f"non-finite embedding for patch {patch_id}")
        ids = self.ids.setdefault(category, [])
        if patch_id in ids:
            raise ValueError(f"duplicate patch id {patch_id} in index")
        ids.append(patch_id)
        stack = self.vectors.get(category)
        row = vector[None, :]
        self.vectors[category] = row if stack is None else np.concatenate([stack, row])

    def finalize(self) -> None:
        """Sort each category by id so argmin tie-breaking lands on the smallest id."""
        for category, ids in self.ids.items():
            order = sorted(range(len(ids)), key=lambda i: ids[i])
            self.ids[category] = [ids[i] for i in order]
            self.vectors[category] = self.vectors[category][order]

    def retrieve(self, query: np.ndarray, category: str) -> str:
        """Exact nearest neighbor under Euclidean distance; ties take the smallest id."""
        if category not in self.ids or not self.ids[category]:
            raise RetrievalMiss(f"no patches indexed for category {category!r}")
        query = np.asarray(query, dtype=np.float32)
        if query.shape != (self.dim,):
            raise ValueError(f"expected a {self.dim}-d query, got {query.shape}")
        vectors = self.vectors[category]
        dists = np.einsum("nd,nd->n", vectors - query, vectors - query)
        return self.ids[category][int(np.argmin(dists))]

    def save(self, path) -> None:
        path = Path(path)
        rows = [f"{INDEX_VERSION}\t{self.dim}"]
        for category in sorted(self.ids):
            for patch_id, vec in zip(self.ids[category], self.vectors[category]):
                values = " ".join(f"{v:.8e}" for v in vec)
                rows.append(f"{patch_id}\t{category}\t{values}")
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "PatchIndex":
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines:
            raise ParseError("empty index file", path=path)
        header = lines[0].split("\t")
        if header[0] != INDEX_VERSION or len(header) != 2:
            raise ParseError(f"expected header {INDEX_VERSION}", path=path, line=1)
        index = cls(dim=int(header[1]))
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                patch_id, category, values = line.split("\t")
                vector = np.array(values.split(), dtype=np.float32)
            except ValueError:
                raise ParseError("bad index row", path=path, line=lineno) from None
            index.add(patch_id, category, vector)
        index.finalize()
        return index


def build_index(db: PatchDatabase, embed_fn) -> PatchIndex:
    """Embed every record with ``embed_fn(record) -> (128,)`` and index it."""
    index = PatchIndex()
    for record in db.records():
        vector = np.asarray(embed_fn(record), dtype=np.float32)
        record.embedding = vector
        index.add(record.patch_id, record.category, vector)
    index.finalize()
    return index


def sample_negative(
    db: PatchDatabase, category: str, exclude_id: str, rng: np.random.Generator
) -> PatchRecord:
    """Uniform draw over same-category patches, excluding the positive."""
    candidates = [pid for pid in db.by_category.get(category, []) if pid != exclude_id]
    if not candidates:
        raise NoNegativeAvailable(
            f"category {category!r} has no patch other than {exclude_id!r}"
        )
    return db.get(candidates[int(rng.integers(len(candidates)))])


def composite_place(
    canvas: np.ndarray,
    record: PatchRecord,
    cell: tuple[int, int],
    size_index: int,
    task: TaskSpec,
) -> tuple[int, int, int, int]:
    """Paint a patch into its category's channel triple of a composite canvas.

    The patch is rescaled so its foreground area matches the size bin's target
    sqrt-area fraction, centered on the cell, and alpha-masked in. Painted
    pixels are kept strictly positive so emptiness stays decodable. Returns
    the painted pixel box.
    """
    n_channels, h, w = canvas.shape
    vocab = task.vocabulary
    if n_channels != 3 * len(vocab):
        raise ValueError(f"composite canvas must have {3 * len(vocab)} channels")
    cat_index = vocab.index(record.category)

    target_area = (size_bin_center(size_index) ** 2) * h * w
    mask_area = float(record.mask.sum())
    scale = float(np.sqrt(target_area / mask_area))
    new_w = max(int(round(record.mask.shape[1] * scale)), 1)
    new_h = max(int(round(record.mask.shape[0] * scale)), 1)
    color = np.asarray(Image.fromarray(record.color).resize((new_w, new_h)))
    mask = (
        np.asarray(
            Image.fromarray(record.mask.astype(np.uint8) * 255).resize(
                (new_w, new_h), Image.NEAREST
            )
        )
        > 0
    )

    cx, cy = continuize_location(cell, task.grid)
    left = int(round(cx * w - new_w / 2.0))
    top = int(round(cy * h - new_h / 2.0))
    x0, y0 = max(left, 0), max(top, 0)
    x1, y1 = min(left + new_w, w), min(top + new_h, h)
    if x0 >= x1 or y0 >= y1:
        raise PlacementError(
            f"patch {record.patch_id} at cell {cell} falls entirely outside the canvas"
        )
    sub_mask = mask[y0 - top : y1 - top, x0 - left : x1 - left]
    sub_color = color[y0 - top : y1 - top, x0 - left : x1 - left].astype(np.float32) / 255.0
    sub_color = np.maximum(sub_color, 1.0 / 255.0)
    region = canvas[3 * cat_index : 3 * cat_index + 3, y0:y1, x0:x1]
    region[:, sub_mask] = sub_color[sub_mask].T
    return x0, y0, x1, y1


def flatten_composite(canvas: np.ndarray, task: TaskSpec) -> np.ndarray:
    """Collapse the layered canvas to RGB: stuff first, objects in front."""
    vocab = task.vocabulary
    _, h, w = canvas.shape
    out = np.zeros((3, h, w), dtype=np.float32)
    stuff = [i for i in vocab.category_ids() if vocab.is_stuff(i)]
    things = [i for i in vocab.category_ids() if not vocab.is_stuff(i)]
    for cat in stuff + things:
        triple = canvas[3 * cat : 3 * cat + 3]
        present = triple.max(axis=0) > 0
        out[:, present] = triple[:, present]
    return out


def place_token(canvas: np.ndarray, token: ObjectToken, db: PatchDatabase, task: TaskSpec):
    if token.patch_id is None:
        raise PlacementError("composite token has no patch id")
    record = db.get(token.patch_id)
    size_index = token.attribute(task.attributes, "size")
    return composite_place(canvas, record, token.cell, size_index, task)
