import math

import pytest

from scenegen.errors import ParseError
from scenegen.scene import ObjectToken, Scene
from scenegen.sceneio import read_scenes, write_scenes


def sample_scene(spec, kind):
    if kind == "layout":
        tokens = [
            ObjectToken(category=3, cell=(14, 7), attributes=(8, 8)),
            ObjectToken(category=40, cell=(3, 20), attributes=(2, 16)),
        ]
        return Scene(task=spec.kind, objects=tokens, image_size=(640, 480),
                     text="a photo of things")
    norm = 1.0 / math.sqrt(128)
    tokens = [
        ObjectToken(category=5, cell=(10, 10), attributes=(4, 12),
                    appearance=tuple([norm] * 128), patch_id="p0001"),
    ]
    return Scene(task=spec.kind, objects=tokens, text="composite", truncated=True)


class TestRoundTrip:
    def test_layout_round_trip(self, layout_spec, tmp_path):
        scene = sample_scene(layout_spec, "layout")
        path = tmp_path / "scenes.jsonl"
        write_scenes(path, layout_spec, [scene], config_hash="abc123", seed=7)
        header, scenes = read_scenes(path, layout_spec)
        assert header.config_hash == "abc123"
        assert header.seed == 7
        assert len(scenes) == 1
        restored = scenes[0]
        assert restored.image_size == (640, 480)
        assert restored.text == "a photo of things"
        assert [t.category for t in restored.objects] == [3, 40]
        assert [t.cell for t in restored.objects] == [(14, 7), (3, 20)]
        assert [t.attributes for t in restored.objects] == [(8, 8), (2, 16)]

    def test_composite_round_trip(self, composite_spec, tmp_path):
        scene = sample_scene(composite_spec, "composite")
        path = tmp_path / "scenes.jsonl"
        write_scenes(path, composite_spec, [scene])
        _, scenes = read_scenes(path, composite_spec)
        token = scenes[0].objects[0]
        assert token.patch_id == "p0001"
        assert token.appearance is not None
        assert len(token.appearance) == 128
        assert scenes[0].truncated

    def test_abstract_round_trip(self, abstract_spec, tmp_path):
        token = ObjectToken(
            category=abstract_spec.vocabulary.index("mike"), cell=(20, 5),
            attributes=(1, 1, 3, 2),
        )
        scene = Scene(task=abstract_spec.kind, objects=[token], text="mike waves")
        path = tmp_path / "scenes.jsonl"
        write_scenes(path, abstract_spec, [scene])
        _, scenes = read_scenes(path, abstract_spec)
        assert scenes[0].objects[0] == token
        assert scenes[0].text == "mike waves"

    def test_many_scenes_keep_order(self, layout_spec, tmp_path):
        scenes = [
            Scene(task=layout_spec.kind,
                  objects=[ObjectToken(category=3 + i, cell=(i, i), attributes=(0, 0))])
            for i in range(5)
        ]
        path = tmp_path / "scenes.jsonl"
        write_scenes(path, layout_spec, scenes)
        _, restored = read_scenes(path, layout_spec)
        assert [s.objects[0].category for s in restored] == [3, 4, 5, 6, 7]


class TestErrors:
    def test_missing_file(self, layout_spec, tmp_path):
        with pytest.raises(ParseError):
            read_scenes(tmp_path / "nope.jsonl", layout_spec)

    def test_bad_header(self, layout_spec, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"format": "scene.v9", "task": "layout"}\n')
        with pytest.raises(ParseError):
            read_scenes(path, layout_spec)

    def test_task_mismatch(self, layout_spec, composite_spec, tmp_path):
        path = tmp_path / "scenes.jsonl"
        write_scenes(path, layout_spec, [])
        with pytest.raises(ParseError):
            read_scenes(path, composite_spec)

    def test_bad_record_reports_line(self, layout_spec, tmp_path):
        path = tmp_path / "scenes.jsonl"
        write_scenes(path, layout_spec, [])
        with path.open("a") as fh:
            fh.write('{"objects": [{"category": "not-a-thing", "x": 0, "y": 0,'
                     ' "attributes": {}}]}\n')
        with pytest.raises(ParseError) as err:
            read_scenes(path, layout_spec)
        assert ":2" in str(err.value)
