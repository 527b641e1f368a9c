import json

import numpy as np
import pytest
from PIL import Image

from animsynth.cli import main
from animsynth.config import GenConfig
from animsynth.dataset import DatasetManifest


@pytest.fixture()
def config_path(source_dir, tmp_path):
    config = GenConfig(
        width=128, height=96, count=2, global_seed=7,
        source_dir=str(source_dir), layer_count=(2, 3),
    )
    path = tmp_path / "cfg.json"
    path.write_text(config.to_json())
    return path


@pytest.fixture()
def generated(config_path, tmp_path):
    out = tmp_path / "ds"
    code = main(["generate", "--config", str(config_path), "--out", str(out)])
    assert code == 0
    return out


class TestGenerate:
    def test_generate_and_summary(self, config_path, tmp_path, capsys):
        out = tmp_path / "d"
        code = main(["generate", "--config", str(config_path), "--out", str(out),
                     "--count", "1", "--seed", "3"])
        captured = capsys.readouterr()
        assert code == 0
        assert "generated=1 failed=0" in captured.out
        manifest = DatasetManifest.load(out)
        assert manifest.global_seed == 3
        assert len(manifest.entries) == 1

    def test_missing_source_dir(self, tmp_path, capsys):
        cfg = GenConfig(source_dir=str(tmp_path / "missing")).to_json()
        path = tmp_path / "cfg.json"
        path.write_text(cfg)
        code = main(["generate", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "missing" in capsys.readouterr().err

    def test_bad_config(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text("{\"nonsense\": true}")
        code = main(["generate", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_print_default_config(self, capsys):
        assert main(["--print-default-config"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["canvas"] == {"width": 512, "height": 384}
        assert doc["alpha"] == 0.1


class TestValidate:
    def test_fresh_dataset_ok(self, generated, capsys):
        assert main(["validate", str(generated)]) == 0
        assert (generated / "validation_report.json").exists()

    def test_corrupt_flo_fails(self, generated):
        manifest = DatasetManifest.load(generated)
        target = generated / manifest.entries[0]["paths"]["f12"]
        data = bytearray(target.read_bytes())
        data[0] ^= 0xFF
        target.write_bytes(bytes(data))
        assert main(["validate", str(generated)]) == 1
        report = json.loads((generated / "validation_report.json").read_text())
        assert any(f.get("id") == 0 for f in report["failures"])

    def test_no_manifest(self, tmp_path):
        assert main(["validate", str(tmp_path)]) == 2


class TestPreview:
    def test_strip_layout(self, generated, tmp_path):
        out = tmp_path / "strip.png"
        assert main(["preview", str(generated), "--id", "0", "--out", str(out)]) == 0
        img = Image.open(out)
        assert img.size == (128 * 5, 96)

    def test_unknown_id(self, generated, tmp_path):
        code = main(["preview", str(generated), "--id", "99",
                     "--out", str(tmp_path / "x.png")])
        assert code == 2

    def test_identity_scene_panels(self, source_dir, tmp_path):
        config = GenConfig(
            width=128, height=96, count=1, global_seed=1,
            source_dir=str(source_dir), layer_count=(1, 1), background_static=True,
        )
        cfg = tmp_path / "cfg.json"
        cfg.write_text(config.to_json())
        out = tmp_path / "ds"
        assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
        strip_path = tmp_path / "strip.png"
        assert main(["preview", str(out), "--id", "0", "--out", str(strip_path)]) == 0
        strip = np.asarray(Image.open(strip_path), dtype=float)
        w = 128
        panels = [strip[:, i * w:(i + 1) * w] for i in range(5)]
        assert (panels[0] == panels[1]).all() and (panels[0] == panels[2]).all()
        # zero flow renders a uniform neutral flow panel
        assert panels[3].std() == 0.0


class TestStats:
    def test_stats_json(self, generated, capsys):
        assert main(["stats", str(generated)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["entries"] == 2
        assert doc["mean_flow_magnitude"] > 0.0
        assert 0.0 < doc["mask_area_fraction"] < 1.0

    def test_identity_dataset_zero_flow(self, source_dir, tmp_path, capsys):
        config = GenConfig(
            width=128, height=96, count=2, global_seed=1,
            source_dir=str(source_dir), layer_count=(1, 1), background_static=True,
        )
        cfg = tmp_path / "cfg.json"
        cfg.write_text(config.to_json())
        out = tmp_path / "ds"
        assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
        capsys.readouterr()
        assert main(["stats", str(out)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["mean_flow_magnitude"] == 0.0

    def test_no_manifest(self, tmp_path):
        assert main(["stats", str(tmp_path)]) == 2
