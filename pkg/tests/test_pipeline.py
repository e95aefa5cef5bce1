import hashlib
import json
import os

import numpy as np
import pytest

from topovox.grid import BinaryGrid, new_grid
from topovox.homology import betti_numbers
from topovox.pipeline import (
    DatasetConfig,
    LabelMismatchError,
    SampleManifest,
    VoxelFormatError,
    export_slice,
    file_checksum,
    generate_dataset,
    read_voxels,
    verify_sample,
    write_voxels,
)
from topovox import cli
from topovox import seeds as sd


# ---------------------------------------------------------------------------
# TVOX format


def test_round_trip_random_4d(tmp_path, rng):
    g = BinaryGrid(rng.random((16, 16, 16, 16)) < 0.5)
    path = tmp_path / "g.tvox"
    write_voxels(path, g)
    assert read_voxels(path) == g


@pytest.mark.parametrize(
    "dims", [(5, 1), (1, 7), (1, 1), (3, 4, 5), (1, 6, 1), (2, 1, 3, 4)]
)
def test_round_trip_edge_dims(tmp_path, rng, dims):
    g = BinaryGrid(rng.random(dims) < 0.5)
    path = tmp_path / "edge.tvox"
    write_voxels(path, g)
    assert read_voxels(path) == g


def test_header_layout(tmp_path):
    g = new_grid([64, 64], fill=1)
    path = tmp_path / "h.tvox"
    write_voxels(path, g)
    raw = path.read_bytes()
    assert raw[:4] == b"TVOX"
    assert raw[4] == 1 and raw[5] == 2
    assert int.from_bytes(raw[6:10], "little") == 64
    assert int.from_bytes(raw[10:14], "little") == 64
    assert len(raw) == 14 + 512


def test_format_errors(tmp_path):
    path = tmp_path / "bad.tvox"
    path.write_bytes(b"NOPE" + bytes(20))
    with pytest.raises(VoxelFormatError, match="magic"):
        read_voxels(path)
    g = new_grid([8, 8], fill=1)
    good = tmp_path / "good.tvox"
    write_voxels(good, g)
    raw = good.read_bytes()
    trunc = tmp_path / "trunc.tvox"
    trunc.write_bytes(raw[:-3])
    with pytest.raises(VoxelFormatError, match="offset"):
        read_voxels(trunc)
    vers = tmp_path / "vers.tvox"
    vers.write_bytes(raw[:4] + bytes([9]) + raw[5:])
    with pytest.raises(VoxelFormatError, match="version"):
        read_voxels(vers)


def test_bit_flip_breaks_checksum(tmp_path):
    cfg = DatasetConfig(count=1, dims=(24, 24), mode="embed", out_dir=str(tmp_path / "d"), master_seed=0)
    [(voxel_path, manifest_path)] = generate_dataset(cfg)
    raw = bytearray(voxel_path.read_bytes())
    raw[-1] ^= 0x80
    voxel_path.write_bytes(bytes(raw))
    report = verify_sample(voxel_path, manifest_path)
    assert not report.passed and not report.checksum_ok


# ---------------------------------------------------------------------------
# manifests and generation


def test_generated_samples_verify(tmp_path):
    cfg = DatasetConfig(
        count=4, dims=(32, 32), mode="cutout", out_dir=str(tmp_path / "ds"), master_seed=3
    )
    pairs = generate_dataset(cfg)
    assert len(pairs) == 4
    for voxel_path, manifest_path in pairs:
        report = verify_sample(voxel_path, manifest_path)
        assert report.passed, report.summary()
        manifest = SampleManifest.from_json(manifest_path.read_text())
        assert manifest.engine_verified


def test_generation_is_byte_identical(tmp_path):
    hashes = []
    for name in ("a", "b"):
        cfg = DatasetConfig(
            count=3,
            dims=(28, 28, 28),
            mode="mixed",
            out_dir=str(tmp_path / name),
            master_seed=17,
        )
        pairs = generate_dataset(cfg)
        digest = hashlib.sha256()
        for voxel_path, manifest_path in pairs:
            digest.update(voxel_path.read_bytes())
            digest.update(manifest_path.read_bytes())
        hashes.append(digest.hexdigest())
    assert hashes[0] == hashes[1]


def test_manifest_round_trip(tmp_path):
    cfg = DatasetConfig(count=1, dims=(24, 24), out_dir=str(tmp_path / "m"), master_seed=1)
    [(voxel_path, manifest_path)] = generate_dataset(cfg)
    manifest = SampleManifest.from_json(manifest_path.read_text())
    again = SampleManifest.from_json(manifest.to_json())
    assert again == manifest
    assert manifest.voxel_checksum == file_checksum(voxel_path)


def test_tampered_label_fails_verification(tmp_path):
    cfg = DatasetConfig(count=1, dims=(24, 24), out_dir=str(tmp_path / "t"), master_seed=2)
    [(voxel_path, manifest_path)] = generate_dataset(cfg)
    doc = json.loads(manifest_path.read_text())
    doc["label"]["betti"][1] += 1
    manifest_path.write_text(json.dumps(doc, indent=2, sort_keys=True))
    report = verify_sample(voxel_path, manifest_path)
    assert report.checksum_ok and not report.passed


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_deformed_samples_keep_labels(tmp_path):
    cfg = DatasetConfig(
        count=2,
        dims=(40, 40),
        mode="embed",
        deform_iterations=60,
        dilate_iterations=1,
        out_dir=str(tmp_path / "def"),
        master_seed=8,
    )
    for voxel_path, manifest_path in generate_dataset(cfg):
        report = verify_sample(voxel_path, manifest_path)
        assert report.passed, report.summary()
        manifest = SampleManifest.from_json(manifest_path.read_text())
        assert manifest.deform_report is not None
        assert manifest.deform_report["volume_before"] == manifest.deform_report["volume_after"]


def test_4d_generation(tmp_path):
    cfg = DatasetConfig(
        count=2, dims=(18, 18, 18, 18), mode="mixed", out_dir=str(tmp_path / "q"), master_seed=5
    )
    for voxel_path, manifest_path in generate_dataset(cfg):
        assert verify_sample(voxel_path, manifest_path).passed


def test_output_dir_env_override(tmp_path, monkeypatch):
    target = tmp_path / "env_dir"
    monkeypatch.setenv("TOPOVOX_OUT", str(target))
    cfg = DatasetConfig(count=1, dims=(24, 24), out_dir=str(tmp_path / "ignored"), master_seed=0)
    pairs = generate_dataset(cfg)
    assert pairs[0][0].parent == target
    assert not (tmp_path / "ignored").exists()


def test_config_round_trip():
    cfg = DatasetConfig(count=5, dims=(16, 16, 16), mode="embed", master_seed=9)
    again = DatasetConfig.from_json(cfg.to_json())
    assert again == cfg


def test_custom_dilate_element(tmp_path):
    element = {"mask": [[0, 1, 0], [1, 1, 1], [0, 1, 0]], "origin": [1, 1]}
    cfg = DatasetConfig(
        count=1,
        dims=(28, 28),
        mode="embed",
        dilate_iterations=2,
        dilate_element=element,
        out_dir=str(tmp_path / "el"),
        master_seed=6,
    )
    [(voxel_path, manifest_path)] = generate_dataset(cfg)
    assert verify_sample(voxel_path, manifest_path).passed
    assert DatasetConfig.from_json(cfg.to_json()).dilate_element == element


def test_config_validation():
    with pytest.raises(ValueError):
        DatasetConfig(mode="wat")
    with pytest.raises(ValueError):
        DatasetConfig(verify_rate=1.5)
    with pytest.raises(ValueError):
        DatasetConfig(count=0)
    with pytest.raises(ValueError):
        DatasetConfig(shape_weights={"ball": -1.0})


# ---------------------------------------------------------------------------
# slice export


def test_export_slice_2d_full_image(tmp_path):
    g = new_grid([8, 10])
    g.data[2:5, 3:7] = True
    voxel_path = tmp_path / "g.tvox"
    write_voxels(voxel_path, g)
    out = tmp_path / "g.pgm"
    export_slice(voxel_path, {}, out)
    raw = out.read_bytes()
    assert raw.startswith(b"P5\n10 8\n255\n")
    pixels = np.frombuffer(raw[len(b"P5\n10 8\n255\n"):], dtype=np.uint8).reshape(8, 10)
    assert (pixels[2:5, 3:7] == 255).all()
    assert pixels.sum() == 255 * 12


def test_export_slice_of_solid_torus_is_annulus(tmp_path):
    g = new_grid([32] * 3)
    sd.rasterize_implicit(
        g, sd.ImplicitShape("solid_torus", (15.5, 15.5, 15.5), (8.0, 3.0))
    )
    voxel_path = tmp_path / "t.tvox"
    write_voxels(voxel_path, g)
    out = tmp_path / "t.pgm"
    export_slice(voxel_path, {2: 15}, out)
    raw = out.read_bytes()
    header_end = raw.index(b"255\n") + 4
    plane = np.frombuffer(raw[header_end:], dtype=np.uint8).reshape(32, 32) > 0
    assert betti_numbers(BinaryGrid(plane)).betti == (1, 1, 0, 0)


def test_export_slice_4d(tmp_path):
    g = new_grid([6, 6, 6, 6], fill=1)
    voxel_path = tmp_path / "q.tvox"
    write_voxels(voxel_path, g)
    out = tmp_path / "q.pgm"
    export_slice(voxel_path, {2: 3, 3: 3}, out)
    assert out.read_bytes().startswith(b"P5\n6 6\n255\n")


def test_export_slice_validation(tmp_path):
    g = new_grid([6, 6, 6])
    voxel_path = tmp_path / "v.tvox"
    write_voxels(voxel_path, g)
    with pytest.raises(ValueError):
        export_slice(voxel_path, {}, tmp_path / "x.pgm")
    with pytest.raises(ValueError):
        export_slice(voxel_path, {5: 0}, tmp_path / "x.pgm")
    with pytest.raises(ValueError):
        export_slice(voxel_path, {2: 9}, tmp_path / "x.pgm")


# ---------------------------------------------------------------------------
# CLI


def test_cli_gen_verify_stats_render(tmp_path, capsys):
    out_dir = tmp_path / "cli_ds"
    rc = cli.main(
        [
            "gen",
            "--count", "2",
            "--dims", "24", "24",
            "--mode", "embed",
            "--seed", "4",
            "--out", str(out_dir),
        ]
    )
    assert rc == 0
    assert len(list(out_dir.glob("*.tvox"))) == 2

    rc = cli.main(["verify", str(out_dir)])
    assert rc == 0
    assert "2/2 samples passed" in capsys.readouterr().out

    rc = cli.main(["stats", str(out_dir)])
    assert rc == 0
    assert "2 samples" in capsys.readouterr().out

    voxels = sorted(out_dir.glob("*.tvox"))[0]
    rc = cli.main(["render-slice", str(voxels), "--out", str(tmp_path / "s.pgm")])
    assert rc == 0
    assert (tmp_path / "s.pgm").exists()


def test_cli_verify_fails_on_tamper(tmp_path, capsys):
    out_dir = tmp_path / "cli_bad"
    cli.main(["gen", "--count", "1", "--dims", "24", "24", "--seed", "1", "--out", str(out_dir)])
    manifest_path = next(out_dir.glob("*.json"))
    doc = json.loads(manifest_path.read_text())
    doc["label"]["betti"][0] += 1
    manifest_path.write_text(json.dumps(doc))
    rc = cli.main(["verify", str(out_dir)])
    assert rc == 1


def test_cli_deform_and_thicken(tmp_path, capsys):
    g = new_grid([32, 32])
    idx = np.indices((32, 32)).astype(float)
    g.data[:] = ((idx[0] - 15.5) ** 2 + (idx[1] - 15.5) ** 2) <= 64.0
    src = tmp_path / "disc.tvox"
    write_voxels(src, g)

    rc = cli.main(
        ["deform", str(src), "--iterations", "40", "--out", str(tmp_path / "d.tvox")]
    )
    assert rc == 0
    deformed = read_voxels(tmp_path / "d.tvox")
    assert betti_numbers(deformed).betti == (1, 0, 0, 0)

    rc = cli.main(
        ["thicken", str(src), "--iterations", "2", "--out", str(tmp_path / "t.tvox")]
    )
    assert rc == 0
    thick = read_voxels(tmp_path / "t.tvox")
    assert betti_numbers(thick).betti == (1, 0, 0, 0)
