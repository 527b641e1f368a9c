import json
import shutil

import numpy as np
import pytest

from animtrainer.data import load_manifest, load_triplets, split_holdout


class TestLoadManifest:
    def test_valid(self, small_manifest):
        doc = load_manifest(small_manifest)
        assert len(doc["entries"]) == 10

    def test_wrong_version(self, tmp_path):
        bad = tmp_path / "manifest.json"
        bad.write_text(json.dumps({"version": "other/9", "entries": []}))
        with pytest.raises(ValueError, match="version"):
            load_manifest(bad)

    def test_missing_entries(self, tmp_path):
        bad = tmp_path / "manifest.json"
        bad.write_text(json.dumps({"version": "animsynth/1"}))
        with pytest.raises(ValueError, match="entry list"):
            load_manifest(bad)


class TestLoadTriplets:
    def test_shapes_and_range(self, small_manifest):
        triplets = load_triplets(small_manifest)
        assert len(triplets) == 10
        for t in triplets:
            assert t.i1.shape == t.i2.shape == t.i3.shape == (64, 64, 3)
            assert t.i1.min() >= 0.0 and t.i1.max() <= 1.0

    def test_shuffle_deterministic(self, small_manifest):
        a = [t.entry_id for t in load_triplets(small_manifest, seed=5)]
        b = [t.entry_id for t in load_triplets(small_manifest, seed=5)]
        c = [t.entry_id for t in load_triplets(small_manifest, seed=6)]
        assert a == b
        assert a != c

    def test_entry_filter(self, small_manifest):
        triplets = load_triplets(small_manifest, entry_ids={1, 4})
        assert sorted(t.entry_id for t in triplets) == [1, 4]

    def test_tampered_small_set_exceeds_tolerance(self, small_manifest, tmp_path):
        clone = tmp_path / "clone"
        shutil.copytree(small_manifest.parent, clone)
        doc = json.loads((clone / "manifest.json").read_text())
        (clone / doc["entries"][0]["paths"]["i2"]).write_bytes(b"not a png")
        # 1 of 10 unreadable is over the 1% tolerance
        with pytest.raises(RuntimeError, match="unreadable"):
            load_triplets(clone / "manifest.json")

    def test_tampered_large_set_skips_with_warning(self, train_manifest, caplog):
        target = None
        doc = json.loads(train_manifest.read_text())
        target = train_manifest.parent / doc["entries"][0]["paths"]["i1"]
        original = target.read_bytes()
        try:
            target.write_bytes(b"garbage")
            with caplog.at_level("WARNING"):
                triplets = load_triplets(train_manifest)
            assert len(triplets) == len(doc["entries"]) - 1
            assert any("skipping entry" in r.message for r in caplog.records)
        finally:
            target.write_bytes(original)


class TestSplitHoldout:
    def test_disjoint_and_complete(self, small_manifest):
        train, hold = split_holdout(small_manifest, 3, seed=1)
        assert not set(train) & set(hold)
        assert sorted(train + hold) == list(range(10))

    def test_deterministic(self, small_manifest):
        assert split_holdout(small_manifest, 3, 1) == split_holdout(small_manifest, 3, 1)

    def test_bad_count(self, small_manifest):
        with pytest.raises(ValueError):
            split_holdout(small_manifest, 0, 1)
        with pytest.raises(ValueError):
            split_holdout(small_manifest, 10, 1)
