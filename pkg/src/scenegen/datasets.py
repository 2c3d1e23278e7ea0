"""Corpus ingestion: abstract scene tables, COCO-style layouts, patch database.

Parsers produce :class:`TrainingExample` lists with deterministic ordering.
Text stays raw here; token ids are filled in once a token vocabulary exists.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, ImageDraw
from scipy import ndimage

from .assets import AssetLibrary
from .categories import COCO_ID_TO_NAME, STUFF_SUPERCATEGORIES
from .errors import ParseError
from .patchdb import PatchDatabase, PatchRecord, enlarge_box
from .scene import (
    ObjectToken,
    Scene,
    TaskKind,
    TaskSpec,
    aspect_bin,
    discretize_location,
    order_objects,
    size_bin,
)
from .tokens import TokenVocabulary

log = logging.getLogger(__name__)

MIN_SEGMENT_PIXELS = 16

# 4-connectivity: conservative region splitting for stuff components
FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass
class TrainingExample:
    example_id: str
    text: str
    scene: Scene
    task: TaskKind
    tokens: Optional[list[int]] = None

    def encode(self, vocab: TokenVocabulary, max_len: int = 50) -> "TrainingExample":
        self.tokens = vocab.encode(self.text, max_len=max_len)
        return self


@dataclass
class SplitSpec:
    """Named train/val/test subsets as index lists into the example list."""

    train: list[int] = field(default_factory=list)
    val: list[int] = field(default_factory=list)
    test: list[int] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        return {"train": len(self.train), "val": len(self.val), "test": len(self.test)}


def abstract_splits(n: int) -> SplitSpec:
    """Reserve the tail for evaluation: 1000 test and 497 val on the full
    corpus, proportional fractions on smaller ones."""
    test_n = 1000 if n >= 9997 else max(min(n // 10, n - 1), 0)
    val_n = 497 if n >= 9997 else max(n // 20, 0)
    train_n = n - test_n - val_n
    order = list(range(n))
    return SplitSpec(
        train=order[:train_n],
        val=order[train_n : train_n + val_n],
        test=order[train_n + val_n :],
    )


@dataclass
class _RawClipArt:
    category: str
    x: float  # normalized center
    y: float
    y_bottom: float
    category_index: int
    size: int
    direction: int
    pose: int
    expression: int


def _parse_clipart_row(parts, lineno, path, library, task):
    png, idx_s, _kind, px, py, z, flip = parts
    name = png[:-4] if png.endswith(".png") else png
    try:
        cat_index = task.vocabulary.index(name)
    except KeyError:
        raise ParseError(f"unknown clip-art {png!r}", path=path, line=lineno) from None
    w, h = library.canvas_size
    try:
        idx = int(idx_s)
        x = float(px) / w
        y = float(py) / h
        size = int(z)
        direction = int(flip)
    except ValueError:
        raise ParseError("bad numeric field in clip-art row", path=path, line=lineno) from None
    if not (0 <= size < 3 and 0 <= direction < 2):
        raise ParseError(f"size/flip out of range: z={z} flip={flip}", path=path, line=lineno)
    person = task.vocabulary.is_person(cat_index)
    # person sprite index packs pose and expression: idx = pose * 5 + expression
    pose = idx // 5 if person else 0
    expression = idx % 5 if person else 0
    if person and not (0 <= pose < 7):
        raise ParseError(f"person sprite index {idx} out of range", path=path, line=lineno)
    sprite = library.sprite(name)
    scale = library.size_scales[size]
    y_bottom = y + sprite.height * scale / h / 2.0
    return _RawClipArt(name, x, y, y_bottom, cat_index, size, direction, pose, expression)


def parse_abstract(directory, library: AssetLibrary, task: TaskSpec):
    """Read the published text-table layout into examples plus a split.

    Empty scenes are dropped. The (up to three) sentences of a scene are
    concatenated in file order into one description.
    """
    directory = Path(directory)
    scenes_path = directory / "Scenes.txt"
    if not scenes_path.exists():
        raise ParseError("Scenes.txt not found", path=scenes_path)
    lines = scenes_path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty scene table", path=scenes_path)
    try:
        declared = int(lines[0].split()[0])
    except (ValueError, IndexError):
        raise ParseError("first line must hold the scene count", path=scenes_path, line=1) from None

    raw_scenes: dict[int, list[_RawClipArt]] = {}
    cursor = 1
    order = []
    while cursor < len(lines):
        if not lines[cursor].strip():
            cursor += 1
            continue
        head = lines[cursor].split()
        if len(head) != 2:
            raise ParseError("expected '<scene id> <count>'", path=scenes_path, line=cursor + 1)
        try:
            scene_id, count = int(head[0]), int(head[1])
        except ValueError:
            raise ParseError("bad scene header", path=scenes_path, line=cursor + 1) from None
        cursor += 1
        arts = []
        for _ in range(count):
            if cursor >= len(lines):
                raise ParseError("truncated scene table", path=scenes_path, line=cursor)
            parts = lines[cursor].split()
            if len(parts) != 7:
                raise ParseError("expected 7 clip-art fields", path=scenes_path, line=cursor + 1)
            arts.append(_parse_clipart_row(parts, cursor + 1, scenes_path, library, task))
            cursor += 1
        raw_scenes[scene_id] = arts
        order.append(scene_id)
    if len(order) != declared:
        log.warning("scene table declares %d scenes but holds %d", declared, len(order))

    sentences = _read_sentences(directory)
    examples = []
    for scene_id in order:
        arts = raw_scenes[scene_id]
        if not arts:
            continue  # empty scenes are filtered out
        parts = sentences.get(scene_id)
        if not parts:
            raise ParseError(f"scene {scene_id} has no sentences", path=scenes_path)
        text = " ".join(parts)
        ordered = order_objects(
            arts,
            y=lambda a: a.y_bottom,
            x=lambda a: a.x,
            category=lambda a: a.category_index,
        )
        tokens = [
            ObjectToken(
                category=a.category_index,
                cell=discretize_location((a.x, a.y), task.grid),
                attributes=(a.size, a.direction, a.pose, a.expression),
            )
            for a in ordered
        ]
        scene = Scene(task=TaskKind.ABSTRACT, objects=tokens, text=text)
        examples.append(
            TrainingExample(example_id=f"scene{scene_id:05d}", text=text, scene=scene,
                            task=TaskKind.ABSTRACT)
        )
    return examples, abstract_splits(len(examples))


def _read_sentences(directory: Path) -> dict[int, list[str]]:
    sent_dir = directory / "SimpleSentences"
    files = sorted(sent_dir.glob("*.txt")) if sent_dir.exists() else []
    if not files:
        files = sorted(directory.glob("Sentences*.txt"))
    collected: dict[int, list[tuple[int, int, int, str]]] = {}
    for file_order, path in enumerate(files):
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split("\t") if "\t" in line else line.split(None, 2)
            if len(parts) != 3:
                raise ParseError("expected 'scene index sentence'", path=path, line=lineno)
            try:
                scene_id, sent_idx = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError("bad sentence key", path=path, line=lineno) from None
            collected.setdefault(scene_id, []).append(
                (file_order, sent_idx, lineno, parts[2].strip())
            )
    return {
        scene_id: [text for _, _, _, text in sorted(rows)]
        for scene_id, rows in collected.items()
    }


def parse_layout(instances_path, captions_path, task: TaskSpec) -> list[TrainingExample]:
    """COCO-style boxes + captions into one example per caption.

    Boxes are normalized by image size and ordered bottom to top. Degenerate
    zero-area boxes are dropped with a warning; an unknown category id is a
    parse error.
    """
    instances_path, captions_path = Path(instances_path), Path(captions_path)
    instances = _load_json(instances_path)
    captions = _load_json(captions_path)

    images = {img["id"]: img for img in instances.get("images", [])}
    id_to_name = dict(COCO_ID_TO_NAME)
    for cat in instances.get("categories", []):
        id_to_name[cat["id"]] = cat["name"]

    per_image: dict[int, list] = {}
    for ann in sorted(instances.get("annotations", []), key=lambda a: a["id"]):
        image = images.get(ann["image_id"])
        if image is None:
            raise ParseError(f"annotation {ann['id']} references missing image "
                             f"{ann['image_id']}", path=instances_path)
        name = id_to_name.get(ann["category_id"])
        if name is None:
            raise ParseError(f"unknown category id {ann['category_id']}", path=instances_path)
        try:
            cat_index = task.vocabulary.index(name)
        except KeyError:
            raise ParseError(f"category {name!r} not in task vocabulary",
                             path=instances_path) from None
        bx, by, bw, bh = ann["bbox"]
        if bw <= 0 or bh <= 0:
            log.warning("dropping degenerate box %s on image %d", ann["bbox"], ann["image_id"])
            continue
        w_img, h_img = image["width"], image["height"]
        per_image.setdefault(ann["image_id"], []).append(
            dict(
                category=cat_index,
                x=(bx + bw / 2.0) / w_img,
                y=(by + bh / 2.0) / h_img,
                y_bottom=(by + bh) / h_img,
                size=np.sqrt((bw * bh) / (w_img * h_img)),
                ratio=bw / bh,
            )
        )

    scenes: dict[int, Scene] = {}
    for image_id, boxes in per_image.items():
        ordered = order_objects(
            boxes,
            y=lambda b: b["y_bottom"],
            x=lambda b: b["x"],
            category=lambda b: b["category"],
        )
        image = images[image_id]
        tokens = [
            ObjectToken(
                category=b["category"],
                cell=discretize_location((b["x"], b["y"]), task.grid),
                attributes=(size_bin(min(b["size"], 1.0)), aspect_bin(b["ratio"])),
            )
            for b in ordered
        ]
        scenes[image_id] = Scene(
            task=task.kind, objects=tokens, image_size=(image["width"], image["height"])
        )

    examples = []
    for ann in sorted(captions.get("annotations", []), key=lambda a: a["id"]):
        scene = scenes.get(ann["image_id"])
        if scene is None:
            continue  # caption for an image without usable objects
        examples.append(
            TrainingExample(
                example_id=f"img{ann['image_id']:012d}_cap{ann['id']}",
                text=ann["caption"],
                scene=scene,
                task=task.kind,
            )
        )
    return examples


def _load_json(path: Path) -> dict:
    if not path.exists():
        raise ParseError("annotation file not found", path=path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}", path=path) from None


def _polygon_mask(segmentation, width: int, height: int) -> np.ndarray:
    mask = Image.new("L", (width, height), 0)
    draw = ImageDraw.Draw(mask)
    for poly in segmentation:
        points = list(zip(poly[0::2], poly[1::2]))
        if len(points) >= 3:
            draw.polygon(points, fill=1)
    return np.asarray(mask, dtype=bool)


def _mask_bbox(mask: np.ndarray) -> tuple[int, int, int, int]:
    rows = np.any(mask, axis=1)
    cols = np.any(mask, axis=0)
    y0, y1 = np.flatnonzero(rows)[[0, -1]]
    x0, x1 = np.flatnonzero(cols)[[0, -1]]
    return int(x0), int(y0), int(x1) + 1, int(y1) + 1


def _crop_record(patch_id, category, image, mask, context_map, source_id):
    box = _mask_bbox(mask)
    w_img, h_img = image.shape[1], image.shape[0]
    cx0, cy0, cx1, cy1 = enlarge_box(box, (w_img, h_img))
    return PatchRecord(
        patch_id=patch_id,
        category=category,
        color=image[cy0:cy1, cx0:cx1].copy(),
        mask=mask[cy0:cy1, cx0:cx1].copy(),
        context=context_map[cy0:cy1, cx0:cx1].copy(),
        source_image_id=source_id,
        box=box,
        context_box=(cx0, cy0, cx1, cy1),
    )


def build_patch_db(
    images_dir,
    instances_path,
    stuff_dir,
    task: TaskSpec,
    min_pixels: int = MIN_SEGMENT_PIXELS,
) -> PatchDatabase:
    """One record per instance segment plus one per stuff connected component.

    Stuff label maps are single-channel PNGs holding 1-based indices into the
    15 super-categories (0 = unlabeled). Components are 4-connected. Segments
    below ``min_pixels`` are skipped with a warning.
    """
    images_dir, stuff_dir = Path(images_dir), Path(stuff_dir)
    instances = _load_json(Path(instances_path))
    images = {img["id"]: img for img in instances.get("images", [])}
    id_to_name = dict(COCO_ID_TO_NAME)
    for cat in instances.get("categories", []):
        id_to_name[cat["id"]] = cat["name"]

    anns_by_image: dict[int, list] = {}
    for ann in sorted(instances.get("annotations", []), key=lambda a: a["id"]):
        anns_by_image.setdefault(ann["image_id"], []).append(ann)

    db = PatchDatabase()
    for image_id in sorted(images):
        info = images[image_id]
        stem = Path(info["file_name"]).stem
        image_path = images_dir / info["file_name"]
        if not image_path.exists():
            raise ParseError("image file missing", path=image_path)
        image = np.asarray(Image.open(image_path).convert("RGB"))
        h_img, w_img = image.shape[:2]

        stuff_labels = np.zeros((h_img, w_img), dtype=np.int32)
        stuff_path = stuff_dir / f"{stem}.png"
        if stuff_path.exists():
            stuff_labels = np.asarray(Image.open(stuff_path)).astype(np.int32)

        # context map: stuff painted first, object instances in front
        context_map = np.zeros((h_img, w_img), dtype=np.int32)
        for raw in range(1, len(STUFF_SUPERCATEGORIES) + 1):
            region = stuff_labels == raw
            if region.any():
                name = STUFF_SUPERCATEGORIES[raw - 1]
                context_map[region] = task.vocabulary.index(name) + 1

        instance_masks = []
        for ann in anns_by_image.get(image_id, []):
            if ann.get("iscrowd"):
                log.warning("skipping crowd annotation %d", ann["id"])
                continue
            name = id_to_name.get(ann["category_id"])
            if name is None:
                raise ParseError(f"unknown category id {ann['category_id']}",
                                 path=Path(instances_path))
            segmentation = ann.get("segmentation")
            if segmentation:
                mask = _polygon_mask(segmentation, w_img, h_img)
            else:
                bx, by, bw, bh = (int(round(v)) for v in ann["bbox"])
                mask = np.zeros((h_img, w_img), dtype=bool)
                mask[by : by + bh, bx : bx + bw] = True
            if mask.sum() < min_pixels:
                log.warning("skipping tiny segment %d (%d px)", ann["id"], int(mask.sum()))
                continue
            context_map[mask] = task.vocabulary.index(name) + 1
            instance_masks.append((ann, name, mask))

        for ann, name, mask in instance_masks:
            db.add(
                _crop_record(
                    f"i{image_id:06d}_{ann['id']:06d}", name, image, mask, context_map, stem
                )
            )

        for raw in range(1, len(STUFF_SUPERCATEGORIES) + 1):
            region = stuff_labels == raw
            if not region.any():
                continue
            name = STUFF_SUPERCATEGORIES[raw - 1]
            labeled, n_components = ndimage.label(region, structure=FOUR_CONNECTED)
            for comp in range(1, n_components + 1):
                mask = labeled == comp
                if mask.sum() < min_pixels:
                    log.warning(
                        "skipping tiny stuff component %s/%d on image %d", name, comp, image_id
                    )
                    continue
                db.add(
                    _crop_record(
                        f"s{image_id:06d}_{raw:02d}_{comp:03d}", name, image, mask,
                        context_map, stem,
                    )
                )
    return db
