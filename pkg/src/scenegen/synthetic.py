"""Procedural fixtures: clip-art assets, abstract corpora, COCO-style files.

Everything here is deterministic given a seed, small enough for CPU work, and
written in the same on-disk layouts the real datasets use, so the parsing and
training code paths are exercised end to end without any downloads.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .assets import AssetLibrary, CategoryAsset, save_manifest
from .categories import COCO_CATEGORIES, STUFF_SUPERCATEGORIES

# 58 clip-art categories; mike and jenny are the person categories.
ABSTRACT_CATEGORIES = (
    "mike", "jenny", "bear", "cat", "dog", "duck", "owl", "snake",
    "sun", "cloud", "lightning", "rainbow", "helicopter", "balloon", "airplane",
    "rocket", "kite", "frisbee", "soccer_ball", "basketball", "baseball",
    "tennis_ball", "beach_ball", "football", "shovel", "pail", "fire", "grill",
    "hotdog", "hamburger", "pizza", "soda", "popcorn", "ketchup", "mustard",
    "apple", "sandwich", "juice", "tree", "apple_tree", "pine_tree", "bush",
    "flower", "slide", "swing", "sandbox", "table", "bench", "tent", "hat",
    "crown", "cap", "sunglasses", "glasses", "wand", "bat", "racket", "drum",
)
PERSON_CATEGORIES = ("mike", "jenny")

POSE_WORDS = ("standing", "sitting", "waving", "running", "jumping", "kneeling", "crawling")
EXPRESSION_WORDS = ("happy", "sad", "angry", "surprised", "scared")
SIZE_WORDS = ("big", "medium", "small")
DIRECTION_WORDS = ("rightward", "leftward")
REGION_WORDS = (
    ("top left", "top", "top right"),
    ("left", "middle", "right"),
    ("bottom left", "bottom", "bottom right"),
)


def _sprite_image(index: int, size: int) -> Image.Image:
    """A deterministic colored shape; distinct enough per category."""
    rng = np.random.default_rng(1000 + index)
    color = tuple(int(v) for v in rng.integers(40, 256, size=3)) + (255,)
    img = Image.new("RGBA", (size, size), (0, 0, 0, 0))
    draw = ImageDraw.Draw(img)
    shape = index % 4
    pad = max(size // 8, 1)
    box = (pad, pad, size - pad, size - pad)
    if shape == 0:
        draw.ellipse(box, fill=color)
    elif shape == 1:
        draw.rectangle(box, fill=color)
    elif shape == 2:
        draw.polygon([(size // 2, pad), (size - pad, size - pad), (pad, size - pad)], fill=color)
    else:
        draw.pieslice(box, 30, 330, fill=color)
    # small off-center notch so horizontal flips are visible
    draw.rectangle((size // 2, pad, size // 2 + max(size // 10, 1), pad + max(size // 10, 1)),
                   fill=(255, 255, 255, 255))
    return img


def make_clipart_assets(
    directory,
    categories=ABSTRACT_CATEGORIES,
    person_categories=PERSON_CATEGORIES,
    canvas_size=(64, 64),
    sprite_size=None,
) -> Path:
    """Write sprite PNGs plus a manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sprite_size = sprite_size or max(canvas_size[0] // 4, 8)
    entries = []
    for i, name in enumerate(categories):
        filename = f"{name}.png"
        _sprite_image(i, sprite_size).save(directory / filename)
        entries.append(CategoryAsset(name, filename, person=name in person_categories))
    background = Image.new("RGB", canvas_size, (170, 210, 240))
    draw = ImageDraw.Draw(background)
    draw.rectangle((0, int(canvas_size[1] * 0.7), canvas_size[0], canvas_size[1]),
                   fill=(110, 190, 110))
    background.save(directory / "background.png")
    library = AssetLibrary(
        root=directory,
        categories=entries,
        canvas_size=canvas_size,
        size_scales=(1.0, 0.7, 0.49),
        background="background.png",
    )
    manifest = directory / "assets.manifest"
    save_manifest(library, manifest)
    return manifest


def _region_word(x: float, y: float) -> str:
    return REGION_WORDS[min(int(y * 3), 2)][min(int(x * 3), 2)]


def describe_object(name, x, y, size, direction, pose=None, expression=None) -> str:
    place = _region_word(x, y)
    if pose is not None:
        return (
            f"{SIZE_WORDS[size]} {name} is {POSE_WORDS[pose]} and "
            f"{EXPRESSION_WORDS[expression]} at the {place} facing {DIRECTION_WORDS[direction]}"
        )
    return f"the {SIZE_WORDS[size]} {name} sits at the {place} facing {DIRECTION_WORDS[direction]}"


def make_abstract_corpus(
    directory,
    n_scenes: int = 32,
    seed: int = 0,
    categories=ABSTRACT_CATEGORIES,
    canvas_size=(64, 64),
    max_objects: int = 3,
    include_empty: int = 0,
) -> Path:
    """Write a corpus in the published text-table layout under ``directory``.

    Scenes.txt holds one header line per scene followed by one clip-art row
    per object: ``<png> <idx> <type> <x> <y> <z> <flip>``. Sentences live in
    SimpleSentences/SimpleSentences1_*.txt as ``scene<TAB>index<TAB>text``.
    Every scene contains at least one person so pose/expression metrics are
    well defined.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    w, h = canvas_size
    others = [c for c in categories if c not in PERSON_CATEGORIES]

    scene_rows: list[str] = []
    sentence_rows: list[str] = []
    total = n_scenes + include_empty
    empties = set(rng.choice(total, size=include_empty, replace=False)) if include_empty else set()
    for scene_idx in range(total):
        if scene_idx in empties:
            scene_rows.append(f"{scene_idx} 0")
            for k in range(3):
                sentence_rows.append(f"{scene_idx}\t{k}\tnothing to see here")
            continue
        n_objects = int(rng.integers(2, max_objects + 1))
        person = str(rng.choice(PERSON_CATEGORIES))
        rest = list(rng.choice(others, size=n_objects - 1, replace=False))
        fragments = []
        scene_rows.append(f"{scene_idx} {n_objects}")
        for name in [person] + rest:
            x = float(rng.uniform(0.1, 0.9))
            y = float(rng.uniform(0.1, 0.9))
            size = int(rng.integers(0, 3))
            direction = int(rng.integers(0, 2))
            is_person = name in PERSON_CATEGORIES
            pose = int(rng.integers(0, 7)) if is_person else 0
            expression = int(rng.integers(0, 5)) if is_person else 0
            idx = pose * len(EXPRESSION_WORDS) + expression if is_person else 0
            kind = 0 if is_person else 1
            px, py = int(round(x * w)), int(round(y * h))
            scene_rows.append(f"{name}.png {idx} {kind} {px} {py} {size} {direction}")
            fragments.append(
                describe_object(
                    name.replace("_", " "), x, y, size, direction,
                    pose if is_person else None, expression if is_person else None,
                )
            )
        sentences = fragments[:3]
        while len(sentences) < 3:
            sentences.append("they are playing outside")
        for k, sentence in enumerate(sentences):
            sentence_rows.append(f"{scene_idx}\t{k}\t{sentence} .")

    (directory / "Scenes.txt").write_text(
        f"{total}\n" + "\n".join(scene_rows) + "\n", encoding="utf-8"
    )
    sent_dir = directory / "SimpleSentences"
    sent_dir.mkdir(exist_ok=True)
    (sent_dir / f"SimpleSentences1_{total}.txt").write_text(
        "\n".join(sentence_rows) + "\n", encoding="utf-8"
    )
    return directory


def make_layout_fixture(directory, n_images: int = 4, seed: int = 0) -> tuple[Path, Path]:
    """COCO-style instance + caption JSON files for layout parsing tests."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    images, annotations, captions = [], [], []
    ann_id = 1
    for image_id in range(1, n_images + 1):
        width, height = 640, 480
        images.append(
            {"id": image_id, "width": width, "height": height,
             "file_name": f"{image_id:012d}.jpg"}
        )
        n_objects = int(rng.integers(1, 4))
        names = []
        for _ in range(n_objects):
            cid, name = COCO_CATEGORIES[int(rng.integers(0, len(COCO_CATEGORIES)))]
            bw = float(rng.uniform(40, 200))
            bh = float(rng.uniform(40, 200))
            bx = float(rng.uniform(0, width - bw))
            by = float(rng.uniform(0, height - bh))
            annotations.append(
                {"id": ann_id, "image_id": image_id, "category_id": cid,
                 "bbox": [bx, by, bw, bh], "area": bw * bh, "iscrowd": 0}
            )
            names.append(name)
            ann_id += 1
        for k in range(2):
            captions.append(
                {"id": 1000 * image_id + k, "image_id": image_id,
                 "caption": f"a photo of {' and '.join(names)}"}
            )
    instances = {
        "images": images,
        "annotations": annotations,
        "categories": [{"id": cid, "name": name} for cid, name in COCO_CATEGORIES],
    }
    caps = {"images": images, "annotations": captions}
    inst_path = directory / "instances.json"
    caps_path = directory / "captions.json"
    inst_path.write_text(json.dumps(instances), encoding="utf-8")
    caps_path.write_text(json.dumps(caps), encoding="utf-8")
    return inst_path, caps_path


def make_composite_fixture(directory, n_images: int = 3, seed: int = 0):
    """Images, instance polygons, and stuff label maps for patch-db building.

    Each image has a two-band stuff background (sky over ground) and one to
    three elliptical object instances. Returns (images_dir, instances_json,
    stuff_dir).
    """
    directory = Path(directory)
    images_dir = directory / "images"
    stuff_dir = directory / "stuff"
    images_dir.mkdir(parents=True, exist_ok=True)
    stuff_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    sky = STUFF_SUPERCATEGORIES.index("sky") + 1
    ground = STUFF_SUPERCATEGORIES.index("ground") + 1
    images, annotations = [], []
    ann_id = 1
    for image_id in range(1, n_images + 1):
        width, height = 128, 96
        horizon = int(rng.integers(height // 3, 2 * height // 3))
        img = Image.new("RGB", (width, height), (90, 140, 220))
        draw = ImageDraw.Draw(img)
        draw.rectangle((0, horizon, width, height), fill=(90, 180, 90))
        labels = np.zeros((height, width), dtype=np.uint8)
        labels[:horizon] = sky
        labels[horizon:] = ground

        n_objects = int(rng.integers(1, 4))
        for _ in range(n_objects):
            cid, name = COCO_CATEGORIES[int(rng.integers(0, 20))]
            rw = int(rng.integers(18, 40))
            rh = int(rng.integers(18, 40))
            cx = int(rng.integers(rw, width - rw))
            cy = int(rng.integers(rh, height - rh))
            color = tuple(int(v) for v in rng.integers(60, 255, size=3))
            draw.ellipse((cx - rw, cy - rh, cx + rw, cy + rh), fill=color)
            # diamond polygon inscribed in the ellipse box
            poly = [cx, cy - rh, cx + rw, cy, cx, cy + rh, cx - rw, cy]
            annotations.append(
                {"id": ann_id, "image_id": image_id, "category_id": cid,
                 "segmentation": [[float(v) for v in poly]],
                 "bbox": [float(cx - rw), float(cy - rh), float(2 * rw), float(2 * rh)],
                 "area": float(2 * rw * rh), "iscrowd": 0}
            )
            ann_id += 1
        name = f"{image_id:012d}"
        img.save(images_dir / f"{name}.jpg")
        Image.fromarray(labels).save(stuff_dir / f"{name}.png")
        images.append({"id": image_id, "width": width, "height": height,
                       "file_name": f"{name}.jpg"})

    instances = {
        "images": images,
        "annotations": annotations,
        "categories": [{"id": cid, "name": name} for cid, name in COCO_CATEGORIES],
    }
    inst_path = directory / "instances.json"
    inst_path.write_text(json.dumps(instances), encoding="utf-8")
    return images_dir, inst_path, stuff_dir
