import numpy as np
import pytest

from scenegen.assets import load_manifest
from scenegen.categories import abstract_task, composite_task, layout_task
from scenegen.scene import AttributeSpace, TaskKind, TaskSpec, Vocabulary
from scenegen.synthetic import make_abstract_corpus, make_clipart_assets


@pytest.fixture(scope="session")
def clipart_library(tmp_path_factory):
    manifest = make_clipart_assets(tmp_path_factory.mktemp("cliparts"))
    return load_manifest(manifest)


@pytest.fixture(scope="session")
def abstract_spec(clipart_library):
    return abstract_task(clipart_library)


@pytest.fixture(scope="session")
def layout_spec():
    return layout_task()


@pytest.fixture(scope="session")
def composite_spec():
    return composite_task()


@pytest.fixture(scope="session")
def abstract_corpus(tmp_path_factory):
    return make_abstract_corpus(
        tmp_path_factory.mktemp("corpus"), n_scenes=6, seed=3, include_empty=1
    )


def make_toy_task(n_categories=3, grid=(4, 4), kind=TaskKind.LAYOUT, appearance_dim=0):
    """A miniature layout-flavored task for gradient and shape tests."""
    vocab = Vocabulary([f"cat{i}" for i in range(n_categories)])
    attrs = AttributeSpace(
        names=("size", "aspect_ratio"), cardinalities=(3, 3), appearance_dim=appearance_dim
    )
    return TaskSpec(kind=kind, vocabulary=vocab, attributes=attrs, grid=grid,
                    canvas_size=(grid[0] * 2, grid[1] * 2))


@pytest.fixture
def toy_task():
    return make_toy_task()


@pytest.fixture
def rng():
    return np.random.default_rng(0)
