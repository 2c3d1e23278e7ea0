"""Canvas tensors: the spatial encoding of a partially built scene.

Three encodings, one per task:

* abstract: an RGB render of the clip-arts, painted in sequence order;
* layout: a (|V|, H, W) one-hot map, later boxes overwrite earlier ones;
* composite: a (3|V|, H, W) stack where each category owns three channels
  holding the color pixels of its placed patches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .scene import ObjectToken, Scene, TaskKind, TaskSpec, token_box


@dataclass
class Canvas:
    task: TaskKind
    data: np.ndarray  # float32, channel-first

    def copy(self) -> "Canvas":
        return Canvas(self.task, self.data.copy())


def canvas_channels(task: TaskSpec) -> int:
    if task.kind == TaskKind.ABSTRACT:
        return 3
    if task.kind == TaskKind.LAYOUT:
        return len(task.vocabulary)
    return 3 * len(task.vocabulary)


def empty_canvas(task: TaskSpec, size: Optional[tuple[int, int]] = None) -> Canvas:
    h, w = size or task.canvas_size
    return Canvas(task.kind, np.zeros((canvas_channels(task), h, w), dtype=np.float32))


def box_to_cells(box, raster: tuple[int, int]):
    """Raster rows/cols covered by a normalized box (right-open, clipped)."""
    h, w = raster
    x0, y0, x1, y1 = box
    r0 = min(max(int(math.floor(y0 * h)), 0), h - 1)
    c0 = min(max(int(math.floor(x0 * w)), 0), w - 1)
    r1 = min(max(int(math.ceil(y1 * h)), r0 + 1), h)
    c1 = min(max(int(math.ceil(x1 * w)), c0 + 1), w)
    return slice(r0, r1), slice(c0, c1)


def paint_layout_token(data: np.ndarray, token: ObjectToken, task: TaskSpec) -> None:
    rows, cols = box_to_cells(token_box(token, task), data.shape[1:])
    data[:, rows, cols] = 0.0
    data[token.category, rows, cols] = 1.0


def build_canvas(
    task: TaskSpec,
    objects: Sequence[ObjectToken],
    assets=None,
    size: Optional[tuple[int, int]] = None,
) -> Canvas:
    """Render the canvas for a scene prefix.

    ``assets`` is the task's renderer handle: an AssetLibrary for abstract
    scenes, a PatchDatabase for composites, unused for layouts. Building is
    prefix-consistent: painting one more token onto the result equals building
    from the longer prefix.
    """
    if task.kind == TaskKind.ABSTRACT:
        if assets is None:
            raise ValueError("abstract canvases need an asset library")
        scene = Scene(task=task.kind, objects=list(objects))
        return Canvas(task.kind, assets.render(scene, task, size=size))

    canvas = empty_canvas(task, size=size)
    if task.kind == TaskKind.LAYOUT:
        for token in objects:
            paint_layout_token(canvas.data, token, task)
        return canvas

    from .patchdb import place_token

    if objects and assets is None:
        raise ValueError("composite canvases need a patch database")
    for token in objects:
        place_token(canvas.data, token, assets, task)
    return canvas


def scene_canvas_sequence(
    task: TaskSpec,
    scene: Scene,
    assets=None,
    size: Optional[tuple[int, int]] = None,
) -> list[Canvas]:
    """Canvases B_0 .. B_T for teacher forcing: one per growing prefix."""
    if task.kind == TaskKind.ABSTRACT:
        return [
            build_canvas(task, scene.objects[:t], assets=assets, size=size)
            for t in range(len(scene.objects) + 1)
        ]
    # layout/composite placements are strictly additive per token, so paint
    # incrementally instead of rebuilding each prefix
    out = [empty_canvas(task, size=size)]
    from .patchdb import place_token

    for token in scene.objects:
        step = out[-1].copy()
        if task.kind == TaskKind.LAYOUT:
            paint_layout_token(step.data, token, task)
        else:
            place_token(step.data, token, assets, task)
        out.append(step)
    return out
