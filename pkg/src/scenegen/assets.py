"""Clip-art asset manifests and abstract-scene rendering.

The manifest is a key-value text file. Category lines define the vocabulary
order; ``person`` marks categories with pose/expression attributes::

    version = assets.v1
    canvas_width = 500
    canvas_height = 400
    size_scales = 1.0 0.7 0.49
    background = background.png
    category = mike mike.png person
    category = sun sun.png
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .errors import AssetNotFound, ParseError
from .scene import ObjectToken, Scene, TaskSpec, Vocabulary, continuize_location

MANIFEST_VERSION = "assets.v1"


@dataclass
class CategoryAsset:
    name: str
    filename: str
    person: bool = False


class AssetLibrary:
    """Resolves categories to sprite images and renders abstract scenes."""

    def __init__(
        self,
        root: Path,
        categories: list[CategoryAsset],
        canvas_size: tuple[int, int],
        size_scales: tuple[float, ...],
        background: Optional[str] = None,
    ):
        self.root = Path(root)
        self.categories = categories
        self.canvas_size = canvas_size  # (W, H)
        self.size_scales = size_scales
        self.background = background
        self._by_name = {c.name: c for c in categories}
        self._cache: dict[str, Image.Image] = {}

    def vocabulary(self) -> Vocabulary:
        return Vocabulary(
            [c.name for c in self.categories],
            person_categories=[c.name for c in self.categories if c.person],
        )

    def sprite(self, name: str) -> Image.Image:
        if name not in self._by_name:
            raise AssetNotFound(f"no asset entry for category {name!r}")
        if name not in self._cache:
            path = self.root / self._by_name[name].filename
            if not path.exists():
                raise AssetNotFound(f"asset file missing for {name!r}: {path}")
            self._cache[name] = Image.open(path).convert("RGBA")
        return self._cache[name]

    def background_image(self) -> Image.Image:
        w, h = self.canvas_size
        if self.background:
            path = self.root / self.background
            if not path.exists():
                raise AssetNotFound(f"background image missing: {path}")
            return Image.open(path).convert("RGB").resize((w, h))
        return Image.new("RGB", (w, h), (255, 255, 255))

    def sprite_box(self, token: ObjectToken, task: TaskSpec) -> tuple[float, float, float, float]:
        """Normalized extent of a placed sprite, for overlap metrics."""
        name = task.vocabulary.name(token.category)
        img = self.sprite(name)
        scale = self.size_scales[token.attribute(task.attributes, "size")]
        cw, ch = self.canvas_size
        half_w = img.width * scale / cw / 2.0
        half_h = img.height * scale / ch / 2.0
        cx, cy = continuize_location(token.cell, task.grid)
        return cx - half_w, cy - half_h, cx + half_w, cy + half_h

    def render(self, scene: Scene, task: TaskSpec, size: Optional[tuple[int, int]] = None) -> np.ndarray:
        """Paint the scene in sequence order; returns float32 (3, H, W) in [0, 1]."""
        base = self.background_image()
        if size is not None:
            base = base.resize((size[1], size[0]))
        w, h = base.size
        for token in scene.objects:
            name = task.vocabulary.name(token.category)
            img = self.sprite(name)
            scale = self.size_scales[token.attribute(task.attributes, "size")]
            sw = max(int(round(img.width * scale)), 1)
            sh = max(int(round(img.height * scale)), 1)
            sprite = img.resize((sw, sh))
            if token.attribute(task.attributes, "direction") == 1:
                sprite = sprite.transpose(Image.FLIP_LEFT_RIGHT)
            cx, cy = continuize_location(token.cell, task.grid)
            left = int(round(cx * w - sw / 2.0))
            top = int(round(cy * h - sh / 2.0))
            base.paste(sprite, (left, top), sprite)
        arr = np.asarray(base, dtype=np.float32) / 255.0
        return arr.transpose(2, 0, 1)


def load_manifest(path) -> AssetLibrary:
    path = Path(path)
    if not path.exists():
        raise AssetNotFound(f"asset manifest not found: {path}")
    version = None
    canvas = [None, None]
    scales: tuple[float, ...] = ()
    background = None
    categories: list[CategoryAsset] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", path=path, line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "version":
            version = value
        elif key == "canvas_width":
            canvas[0] = int(value)
        elif key == "canvas_height":
            canvas[1] = int(value)
        elif key == "size_scales":
            scales = tuple(float(v) for v in value.split())
        elif key == "background":
            background = value
        elif key == "category":
            parts = value.split()
            if len(parts) < 2:
                raise ParseError("category needs 'name file [person]'", path=path, line=lineno)
            categories.append(
                CategoryAsset(parts[0], parts[1], person=len(parts) > 2 and parts[2] == "person")
            )
        else:
            raise ParseError(f"unknown manifest key {key!r}", path=path, line=lineno)
    if version != MANIFEST_VERSION:
        raise ParseError(f"unsupported manifest version {version!r}", path=path)
    if canvas[0] is None or canvas[1] is None or not scales or not categories:
        raise ParseError("manifest missing canvas size, scales, or categories", path=path)
    return AssetLibrary(
        root=path.parent,
        categories=categories,
        canvas_size=(canvas[0], canvas[1]),
        size_scales=scales,
        background=background,
    )


def save_manifest(library: AssetLibrary, path) -> None:
    lines = [
        f"version = {MANIFEST_VERSION}",
        f"canvas_width = {library.canvas_size[0]}",
        f"canvas_height = {library.canvas_size[1]}",
        "size_scales = " + " ".join(str(s) for s in library.size_scales),
    ]
    if library.background:
        lines.append(f"background = {library.background}")
    for cat in library.categories:
        suffix = " person" if cat.person else ""
        lines.append(f"category = {cat.name} {cat.filename}{suffix}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
