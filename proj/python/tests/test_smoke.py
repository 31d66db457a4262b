import json
import math
from pathlib import Path

import numpy as np
import pytest

import specmap


def test_version_and_constants():
    assert specmap.__version__
    assert specmap.UNDEFINED_ANGLE == -1.0
    assert specmap.UNCLASSIFIED == -1


def test_spectral_angle_anchors():
    e1 = [1, 0, 0, 0, 0, 0]
    assert specmap.spectral_angle(e1, [0, 1, 0, 0, 0, 0]) == pytest.approx(math.pi / 2, abs=1e-12)
    assert specmap.spectral_angle(e1, [1, 1, 0, 0, 0, 0]) == pytest.approx(math.pi / 4, abs=1e-12)
    assert specmap.spectral_angle(e1, [0] * 6) is None


def numpy_angles(cube, valid, ref):
    ref = np.asarray(ref, dtype=float)
    dot = cube @ ref
    nu = (cube * cube).sum(axis=2)
    nv = ref @ ref
    with np.errstate(invalid="ignore", divide="ignore"):
        ang = np.arccos(np.clip(dot / np.sqrt(nu * nv), -1.0, 1.0))
    ang[(nu == 0) | (valid == 0)] = -1.0
    return ang


def test_sam_map_matches_numpy():
    rng = np.random.default_rng(1)
    cube = rng.random((17, 23, 6))
    valid = (rng.random((17, 23)) > 0.2).astype(np.uint8)
    cube[0, 0] = 0.0
    ref = rng.random(6)
    got = specmap.sam_map(cube, valid, ref, workers=2)
    np.testing.assert_allclose(got, numpy_angles(cube, valid, ref), atol=1e-12)
    region = specmap.threshold_region(got, 0.3)
    assert np.array_equal(region.astype(bool), (got >= 0) & (got <= 0.3))


def test_classify_multi_matches_numpy_argmin():
    rng = np.random.default_rng(2)
    cube = rng.random((32, 32, 6))
    valid = np.ones((32, 32), dtype=np.uint8)
    refs = [rng.random(6) for _ in range(3)]
    labels = specmap.classify_multi(cube, valid, refs, 0.35)
    angles = np.stack([numpy_angles(cube, valid, r) for r in refs])
    best = angles.argmin(axis=0)
    expected = np.where(angles.min(axis=0) <= 0.35, best, -1)
    assert np.array_equal(labels, expected)


def test_calibration_round_trip():
    rng = np.random.default_rng(3)
    vis = rng.uniform(0.05, 1.0, (20, 30, 3))
    cal, r_norm = specmap.calibrate_vis(vis, [2, 2, 9, 9])
    med = np.median(cal[2:10, 2:10].reshape(-1, 3), axis=0)
    np.testing.assert_allclose(med, 0.99, rtol=1e-9)
    np.testing.assert_allclose(cal * np.asarray(r_norm), vis, rtol=1e-15)
    stray = [0.02, 0.015, 0.01]
    uvf = cal * np.asarray(stray)
    out, clamped = specmap.calibrate_uvf(uvf, stray, cal)
    assert clamped == 0
    assert not out.any()


def test_rle_round_trip():
    rng = np.random.default_rng(4)
    mask = (rng.random((9, 13)) > 0.5).astype(np.uint8)
    rows = specmap.encode_rle_rows(mask)
    assert all(sum(r) == 13 for r in rows)
    assert np.array_equal(specmap.decode_rle_rows(rows, 13, 9), mask)


def test_rasterize_shared_diagonal():
    uvs = np.array([[[0, 0], [1, 0], [1, 1]], [[0, 0], [1, 1], [0, 1]]], dtype=float)
    ids = specmap.rasterize_occupancy(uvs, 8, 8)
    assert set(np.unique(ids)) == {0, 1}
    assert specmap.uv_to_texel(0.0, 0.0, 8, 8) == (0, 7)


def test_pfm_round_trip(tmp_path):
    tex = np.arange(2 * 3 * 3, dtype=np.float32).reshape(2, 3, 3).astype(float)
    specmap.write_pfm(tmp_path / "t.pfm", tex)
    assert np.array_equal(specmap.read_texture(tmp_path / "t.pfm"), tex)


def test_fixture_pipeline(tmp_path):
    info = specmap.make_fixture(tmp_path)
    manifest = Path(info["manifest"])
    specmap.calibrate(manifest)
    specmap.build_cube(manifest)
    run = Path(specmap.classify(manifest, uv=info["pick_uv"], theta_max=0.15))
    region = specmap.read_texture(run / "region.pfm")[:, :, 0]
    truth = specmap.read_texture(info["ground_truth"])[:, :, 0]
    assert np.array_equal(region == 1, truth == 0)
    stats = json.loads((run / "stats.json").read_text())
    assert stats["stats"]["count"] == info["material_a_texels"]
    mesh = specmap.load_mesh(tmp_path / "mesh.obj")
    assert mesh["faces"].shape == (500, 3)


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(specmap.ValidationError):
        specmap.calibrate(tmp_path / "missing.toml")
    with pytest.raises(ValueError):
        specmap.sam_map(np.zeros((2, 2)), np.ones((2, 2), dtype=np.uint8), [1, 0])
    info = specmap.make_fixture(tmp_path)
    with pytest.raises(specmap.ValidationError, match="build-cube"):
        specmap.classify(info["manifest"], texel=(1, 1))
