"""Scene file format: line-delimited JSON records with a versioned header.

The first line is a header object carrying the format version, the task kind,
and the reproducibility chain (config hash + seed). Every following line is
one scene. Object locations are stored as normalized cell centers, so files
round-trip exactly through discretization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import ParseError
from .scene import (
    ObjectToken,
    Scene,
    TaskKind,
    TaskSpec,
    continuize_location,
    discretize_location,
)

FORMAT_VERSION = "scene.v1"


@dataclass
class SceneFileHeader:
    task: TaskKind
    config_hash: str = ""
    seed: int = 0

    def to_json(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "task": self.task.value,
            "config_hash": self.config_hash,
            "seed": self.seed,
        }


def token_to_record(token: ObjectToken, task: TaskSpec) -> dict:
    x, y = continuize_location(token.cell, task.grid)
    record = {
        "category": task.vocabulary.name(token.category),
        "x": x,
        "y": y,
        "attributes": {
            name: value for name, value in zip(task.attributes.names, token.attributes)
        },
    }
    if token.appearance is not None:
        record["appearance"] = [round(float(v), 8) for v in token.appearance]
    if token.patch_id is not None:
        record["patch"] = token.patch_id
    return record


def token_from_record(record: dict, task: TaskSpec) -> ObjectToken:
    attrs = record["attributes"]
    appearance = record.get("appearance")
    token = ObjectToken(
        category=task.vocabulary.index(record["category"]),
        cell=discretize_location((record["x"], record["y"]), task.grid),
        attributes=tuple(attrs[name] for name in task.attributes.names),
        appearance=tuple(appearance) if appearance is not None else None,
        patch_id=record.get("patch"),
    )
    token.validate(task)
    return token


def write_scenes(
    path,
    task: TaskSpec,
    scenes,
    config_hash: str = "",
    seed: int = 0,
) -> None:
    header = SceneFileHeader(task.kind, config_hash=config_hash, seed=seed)
    lines = [json.dumps(header.to_json())]
    for scene in scenes:
        record = {"objects": [token_to_record(t, task) for t in scene.objects]}
        if scene.image_size is not None:
            record["image_size"] = list(scene.image_size)
        if scene.text is not None:
            record["text"] = scene.text
        if scene.truncated:
            record["truncated"] = True
        lines.append(json.dumps(record))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_scenes(path, task: TaskSpec) -> tuple[SceneFileHeader, list[Scene]]:
    path = Path(path)
    if not path.exists():
        raise ParseError("scene file not found", path=path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty scene file", path=path)
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad header: {exc}", path=path, line=1) from None
    if head.get("format") != FORMAT_VERSION:
        raise ParseError(f"unsupported format {head.get('format')!r}", path=path, line=1)
    task_kind = TaskKind(head["task"])
    if task_kind != task.kind:
        raise ParseError(
            f"file holds {task_kind.value} scenes, expected {task.kind.value}", path=path, line=1
        )
    header = SceneFileHeader(
        task=task_kind, config_hash=head.get("config_hash", ""), seed=head.get("seed", 0)
    )
    scenes = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            image_size = record.get("image_size")
            scenes.append(
                Scene(
                    task=task_kind,
                    objects=[token_from_record(r, task) for r in record["objects"]],
                    image_size=tuple(image_size) if image_size else None,
                    text=record.get("text"),
                    truncated=record.get("truncated", False),
                )
            )
        except ParseError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"bad scene record: {exc}", path=path, line=lineno) from None
    return header, scenes
