"""Sequential text-to-scene generation.

The package builds three kinds of scene representations from natural-language
descriptions: clip-art abstract scenes, semantic object layouts, and synthetic
image composites assembled from retrieved patches. Generation is sequential:
a recurrent decoder attends over the input text and the current canvas, emits
one object per step, then predicts its location and attributes.
"""

from .scene import (
    ASPECT_RATIOS,
    AttributeSpace,
    ObjectToken,
    Scene,
    TaskKind,
    TaskSpec,
    Vocabulary,
    aspect_bin,
    continuize_location,
    discretize_location,
    order_objects,
    size_bin,
    token_box,
)
from .categories import abstract_task, composite_task, layout_task

__all__ = [
    "ASPECT_RATIOS",
    "AttributeSpace",
    "ObjectToken",
    "Scene",
    "TaskKind",
    "TaskSpec",
    "Vocabulary",
    "aspect_bin",
    "continuize_location",
    "discretize_location",
    "order_objects",
    "size_bin",
    "token_box",
    "abstract_task",
    "composite_task",
    "layout_task",
]

__version__ = "0.1.0"
