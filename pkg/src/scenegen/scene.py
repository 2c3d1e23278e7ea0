"""Scene data model: tasks, vocabularies, attribute spaces, and grid geometry.

A scene is an ordered list of object tokens. Each token names a category from
the task vocabulary, a cell on the task's prediction grid, and a tuple of
discrete attribute indices (plus, for composite scenes, a unit-norm appearance
vector and the id of the retrieved patch).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence


class TaskKind(str, Enum):
    ABSTRACT = "abstract"
    LAYOUT = "layout"
    COMPOSITE = "composite"


# Prediction grid per task. Composite uses a coarser 32x32 grid; the other
# two tasks predict locations on 28x28.
GRID_SIZES = {
    TaskKind.ABSTRACT: (28, 28),
    TaskKind.LAYOUT: (28, 28),
    TaskKind.COMPOSITE: (32, 32),
}

# Raster resolution of the canvas tensor fed to the scene encoder.
CANVAS_SIZES = {
    TaskKind.ABSTRACT: (64, 64),
    TaskKind.LAYOUT: (64, 64),
    TaskKind.COMPOSITE: (128, 128),
}

PAD, SOS, EOS = "pad", "sos", "eos"
SPECIAL_TOKENS = (PAD, SOS, EOS)

# The 17 aspect-ratio scales (width / height), index 8 is square.
ASPECT_RATIOS = tuple(
    [1.0 / d for d in range(9, 1, -1)] + [float(n) for n in range(1, 10)]
)

N_SIZE_BINS = 17


class Vocabulary:
    """Category names plus the three special tokens pad/sos/eos.

    Indices are dense: specials occupy 0..2, categories follow in the given
    order. ``person_categories`` marks the categories whose pose/expression
    attributes are meaningful (abstract scenes only).
    """

    def __init__(
        self,
        categories: Sequence[str],
        person_categories: Iterable[str] = (),
        stuff_categories: Iterable[str] = (),
    ):
        categories = tuple(categories)
        if len(set(categories)) != len(categories):
            raise ValueError("duplicate category names")
        for name in categories:
            if name in SPECIAL_TOKENS:
                raise ValueError(f"category name collides with special token: {name}")
        for label, names in (("person", person_categories), ("stuff", stuff_categories)):
            unknown = set(names) - set(categories)
            if unknown:
                raise ValueError(f"{label} categories not in vocabulary: {sorted(unknown)}")
        self.categories = categories
        self._index = {name: i + len(SPECIAL_TOKENS) for i, name in enumerate(categories)}
        self.person_indices = frozenset(self._index[name] for name in person_categories)
        self.stuff_indices = frozenset(self._index[name] for name in stuff_categories)

    pad_id = 0
    sos_id = 1
    eos_id = 2

    def __len__(self) -> int:
        return len(SPECIAL_TOKENS) + len(self.categories)

    def index(self, name: str) -> int:
        if name in SPECIAL_TOKENS:
            return SPECIAL_TOKENS.index(name)
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown category: {name}") from None

    def name(self, index: int) -> str:
        if 0 <= index < len(SPECIAL_TOKENS):
            return SPECIAL_TOKENS[index]
        try:
            return self.categories[index - len(SPECIAL_TOKENS)]
        except IndexError:
            raise IndexError(f"index {index} outside vocabulary of size {len(self)}") from None

    def is_special(self, index: int) -> bool:
        return 0 <= index < len(SPECIAL_TOKENS)

    def is_person(self, index: int) -> bool:
        return index in self.person_indices

    def is_stuff(self, index: int) -> bool:
        return index in self.stuff_indices

    def category_ids(self) -> range:
        return range(len(SPECIAL_TOKENS), len(self))


@dataclass(frozen=True)
class AttributeSpace:
    """Discrete attribute layout for one task, in fixed channel order."""

    names: tuple[str, ...]
    cardinalities: tuple[int, ...]
    appearance_dim: int = 0

    def __post_init__(self):
        if len(self.names) != len(self.cardinalities):
            raise ValueError("names and cardinalities must align")
        if any(c < 1 for c in self.cardinalities):
            raise ValueError("attribute cardinalities must be positive")

    def cardinality(self, name: str) -> int:
        return self.cardinalities[self.names.index(name)]

    @property
    def total_channels(self) -> int:
        """Channel count of the attribute head: 1 location plane + one plane
        per discrete attribute value + the appearance dimensions."""
        return 1 + sum(self.cardinalities) + self.appearance_dim


ABSTRACT_ATTRIBUTES = AttributeSpace(
    names=("size", "direction", "pose", "expression"),
    cardinalities=(3, 2, 7, 5),
)
LAYOUT_ATTRIBUTES = AttributeSpace(
    names=("size", "aspect_ratio"),
    cardinalities=(N_SIZE_BINS, len(ASPECT_RATIOS)),
)
COMPOSITE_ATTRIBUTES = AttributeSpace(
    names=("size", "aspect_ratio"),
    cardinalities=(N_SIZE_BINS, len(ASPECT_RATIOS)),
    appearance_dim=128,
)

TASK_ATTRIBUTES = {
    TaskKind.ABSTRACT: ABSTRACT_ATTRIBUTES,
    TaskKind.LAYOUT: LAYOUT_ATTRIBUTES,
    TaskKind.COMPOSITE: COMPOSITE_ATTRIBUTES,
}


@dataclass(frozen=True)
class TaskSpec:
    """Everything task-dependent in one place: vocabulary, attributes, grids."""

    kind: TaskKind
    vocabulary: Vocabulary
    attributes: AttributeSpace
    grid: tuple[int, int] = None  # (H, W); defaults per task kind
    canvas_size: tuple[int, int] = None  # (H, W) canvas raster

    def __post_init__(self):
        if self.grid is None:
            object.__setattr__(self, "grid", GRID_SIZES[self.kind])
        if self.canvas_size is None:
            object.__setattr__(self, "canvas_size", CANVAS_SIZES[self.kind])

    @property
    def n_cells(self) -> int:
        return self.grid[0] * self.grid[1]


@dataclass(frozen=True)
class ObjectToken:
    """One placed object: category, grid cell, attribute indices.

    ``appearance`` (composite only) is a unit-L2 vector; ``patch_id`` records
    the retrieved patch for canvas building and provenance.
    """

    category: int
    cell: tuple[int, int]
    attributes: tuple[int, ...]
    appearance: Optional[tuple[float, ...]] = None
    patch_id: Optional[str] = None

    def validate(self, task: TaskSpec) -> None:
        vocab, attrs = task.vocabulary, task.attributes
        if not (0 <= self.category < len(vocab)) or vocab.is_special(self.category):
            raise ValueError(f"category {self.category} is not a placeable index")
        h, w = task.grid
        row, col = self.cell
        if not (0 <= row < h and 0 <= col < w):
            raise ValueError(f"cell {self.cell} outside {h}x{w} grid")
        if len(self.attributes) != len(attrs.names):
            raise ValueError(
                f"expected {len(attrs.names)} attributes, got {len(self.attributes)}"
            )
        for value, name, card in zip(self.attributes, attrs.names, attrs.cardinalities):
            if not (0 <= value < card):
                raise ValueError(f"attribute {name}={value} outside 0..{card - 1}")
        if attrs.appearance_dim:
            if self.appearance is not None:
                vec = self.appearance
                if len(vec) != attrs.appearance_dim:
                    raise ValueError(
                        f"appearance vector has {len(vec)} dims, expected {attrs.appearance_dim}"
                    )
                norm = math.sqrt(math.fsum(v * v for v in vec))
                if abs(norm - 1.0) > 1e-4:
                    raise ValueError(f"appearance vector norm {norm:.6f} is not 1")
        elif self.appearance is not None:
            raise ValueError("appearance vector only valid for composite tasks")

    def attribute(self, space: AttributeSpace, name: str) -> int:
        return self.attributes[space.names.index(name)]


@dataclass
class Scene:
    """An ordered object sequence for one task.

    ``image_size`` (W, H) keeps the source resolution for denormalization;
    ``text`` carries the paired description when known.
    """

    task: TaskKind
    objects: list[ObjectToken] = field(default_factory=list)
    image_size: Optional[tuple[int, int]] = None
    text: Optional[str] = None
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.objects)

    def validate(self, spec: TaskSpec) -> None:
        if spec.kind != self.task:
            raise ValueError(f"scene task {self.task} does not match spec {spec.kind}")
        for token in self.objects:
            token.validate(spec)

    def categories(self) -> list[int]:
        return [t.category for t in self.objects]


# ---------------------------------------------------------------------------
# Grid geometry


def _require_finite(value: float, label: str) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{label} must be finite, got {value!r}")


def discretize_location(xy: tuple[float, float], grid: tuple[int, int]) -> tuple[int, int]:
    """Map normalized (x, y) to a (row, col) grid cell; boundary values clamp."""
    x, y = xy
    _require_finite(x, "x")
    _require_finite(y, "y")
    h, w = grid
    row = min(max(int(math.floor(y * h)), 0), h - 1)
    col = min(max(int(math.floor(x * w)), 0), w - 1)
    return row, col


def continuize_location(cell: tuple[int, int], grid: tuple[int, int]) -> tuple[float, float]:
    """Return the normalized (x, y) center of a grid cell."""
    row, col = cell
    h, w = grid
    if not (0 <= row < h and 0 <= col < w):
        raise ValueError(f"cell {cell} outside {h}x{w} grid")
    return (col + 0.5) / w, (row + 0.5) / h


def size_bin(s: float) -> int:
    """Bin a normalized size (sqrt of the area fraction) into 17 even scales."""
    _require_finite(s, "size")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"normalized size must lie in [0, 1], got {s}")
    return min(int(math.floor(s * N_SIZE_BINS)), N_SIZE_BINS - 1)


def size_bin_center(index: int) -> float:
    if not 0 <= index < N_SIZE_BINS:
        raise ValueError(f"size bin {index} outside 0..{N_SIZE_BINS - 1}")
    return (index + 0.5) / N_SIZE_BINS


def aspect_bin(ratio: float) -> int:
    """Nearest of the 17 aspect scales in log space; ties go to the smaller index."""
    _require_finite(ratio, "aspect ratio")
    if ratio <= 0:
        raise ValueError(f"aspect ratio must be positive, got {ratio}")
    log_r = math.log(ratio)
    best, best_err = 0, float("inf")
    for i, candidate in enumerate(ASPECT_RATIOS):
        err = abs(log_r - math.log(candidate))
        if err < best_err:
            best, best_err = i, err
    return best


def order_objects(
    objects: Iterable,
    *,
    y: Callable = None,
    x: Callable = None,
    category: Callable = None,
    bottom_first: bool = True,
) -> list:
    """Canonical generation order.

    Objects closest to the camera come first: larger y (the box bottom edge,
    with y growing downward) sorts earlier, then x left to right, then the
    category index. ``bottom_first=False`` flips the vertical direction should
    a dataset's coordinate convention disagree.
    """
    y = y or (lambda o: o.y)
    x = x or (lambda o: o.x)
    category = category or (lambda o: o.category)
    sign = -1.0 if bottom_first else 1.0

    def key(obj):
        return (sign * y(obj), x(obj), category(obj))

    return sorted(objects, key=key)


def token_box(token: ObjectToken, task: TaskSpec) -> tuple[float, float, float, float]:
    """Normalized (x0, y0, x1, y1) box implied by a layout/composite token.

    The size bin center gives the sqrt-area fraction; the aspect bin fixes
    width/height. Coordinates may extend past [0, 1]; consumers clip.
    """
    if task.kind == TaskKind.ABSTRACT:
        raise ValueError("abstract tokens take their extent from the asset library")
    cx, cy = continuize_location(token.cell, task.grid)
    f = size_bin_center(token.attribute(task.attributes, "size"))
    r = ASPECT_RATIOS[token.attribute(task.attributes, "aspect_ratio")]
    half_w = f * math.sqrt(r) / 2.0
    half_h = f / math.sqrt(r) / 2.0
    return cx - half_w, cy - half_h, cx + half_w, cy + half_h


def normalized_box_size(box: tuple[float, float, float, float]) -> float:
    """sqrt(box area / image area) for a normalized box."""
    x0, y0, x1, y1 = box
    return math.sqrt(max(x1 - x0, 0.0) * max(y1 - y0, 0.0))


def replace_token(token: ObjectToken, **kwargs) -> ObjectToken:
    return replace(token, **kwargs)
