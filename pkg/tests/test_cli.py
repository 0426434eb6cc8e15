import asyncio
import json

import numpy as np
import numpy.testing as npt
import pytest

import main
from multires.handlers.common import EXIT_CONTRACT, EXIT_INPUT, EXIT_OK, EXIT_REGRESSION
from multires.metrics.report import load_report


def _run(*argv) -> int:
    return asyncio.run(main.main([str(a) for a in argv]))


def _render(scenes_dir, out, *extra) -> int:
    return _run("render", "--scene", scenes_dir / "crease.json", "--effect", "ssao", "--size", "32x32", "--samples", 8, "--out", out, *extra)


def test_render_writes_images_and_report(scenes_dir, tmp_path):
    out = tmp_path / "run"
    assert _render(scenes_dir, out) == EXIT_OK
    for name in ("multires.png", "multires.npy", "multires.ppm", "reference.png", "diff.png", "edges.png", "pyramid.png", "level1_alpha.png", "level4_stencil.png", "report.json"):
        assert (out / name).is_file(), name
    report = load_report(out / "report.json")
    assert report.effect == "ssao"
    assert report.resolution == (32, 32)
    assert report.samples == 8
    assert 0.0 < report.work.work_ratio <= 1.328125
    assert report.quality.rms >= 0.0
    assert any(key.startswith("multires.") for key in report.timings_ms)


def test_render_is_deterministic(scenes_dir, tmp_path):
    assert _render(scenes_dir, tmp_path / "a") == EXIT_OK
    assert _render(scenes_dir, tmp_path / "b") == EXIT_OK
    a, b = load_report(tmp_path / "a" / "report.json"), load_report(tmp_path / "b" / "report.json")
    assert a.deterministic_dump() == b.deterministic_dump()
    npt.assert_array_equal(np.load(tmp_path / "a" / "multires.npy"), np.load(tmp_path / "b" / "multires.npy"))


def test_reference_only(scenes_dir, tmp_path):
    out = tmp_path / "ref"
    assert _render(scenes_dir, out, "--reference-only") == EXIT_OK
    assert not (out / "multires.png").exists()
    report = load_report(out / "report.json")
    assert report.work.work_ratio == 1.0
    assert report.quality is None


def test_missing_scene(tmp_path):
    code = _run("render", "--scene", tmp_path / "missing.json", "--effect", "ssao", "--size", "32x32", "--out", tmp_path)
    assert code == EXIT_INPUT


def test_malformed_scene(tmp_path):
    scene = tmp_path / "bad.json"
    scene.write_text(json.dumps({"triangles": []}), encoding="utf-8")
    code = _run("render", "--scene", scene, "--effect", "ssao", "--size", "32x32", "--out", tmp_path / "out")
    assert code == EXIT_INPUT


def test_size_not_divisible_by_eight(scenes_dir, tmp_path):
    code = _run("render", "--scene", scenes_dir / "crease.json", "--effect", "ssao", "--size", "100x100", "--out", tmp_path)
    assert code == EXIT_CONTRACT


def test_bad_arguments_exit_with_usage(scenes_dir, tmp_path):
    with pytest.raises(SystemExit) as exc:
        _run("render", "--scene", scenes_dir / "crease.json", "--effect", "ssao", "--size", "big", "--out", tmp_path)
    assert exc.value.code == EXIT_INPUT
    with pytest.raises(SystemExit):
        _run("render", "--scene", scenes_dir / "crease.json", "--effect", "blur", "--out", tmp_path)


def test_masks_command(scenes_dir, tmp_path):
    out = tmp_path / "masks"
    code = _run("masks", "--scene", scenes_dir / "occluder.json", "--effect", "ssm", "--size", "32x32", "--out", out, "--shadow-resolution", 256)
    assert code == EXIT_OK
    assert (out / "edges.png").is_file()
    assert (out / "pyramid.png").is_file()
    assert (out / "level3_alpha.npy").is_file()
    assert not (out / "multires.png").exists()


def test_compare(scenes_dir, tmp_path):
    assert _render(scenes_dir, tmp_path / "a") == EXIT_OK
    assert _run("compare", tmp_path / "a", tmp_path / "a" / "report.json", "--max-rms", 0.0) == EXIT_OK

    worse = json.loads((tmp_path / "a" / "report.json").read_text())
    worse["quality"]["rms"] += 0.1
    (tmp_path / "worse.json").write_text(json.dumps(worse), encoding="utf-8")
    assert _run("compare", tmp_path / "a", tmp_path / "worse.json", "--max-rms", 0.01) == EXIT_REGRESSION
    assert _run("compare", tmp_path / "a", tmp_path / "worse.json") == EXIT_OK

    (tmp_path / "broken.json").write_text("{}", encoding="utf-8")
    assert _run("compare", tmp_path / "a", tmp_path / "broken.json") == EXIT_INPUT
    assert _run("compare", tmp_path / "a", tmp_path / "nowhere.json") == EXIT_INPUT


def test_sweep(scenes_dir, tmp_path):
    out = tmp_path / "sweep"
    code = _run("sweep", "--scene", scenes_dir / "crease.json", "--effect", "ssao", "--size", "32x32", "--out", out, "--ladder", 4, 8)
    assert code == EXIT_OK
    points = json.loads((out / "sweep.json").read_text())["points"]
    assert [p["samples"] for p in points] == [4, 8]
    assert points[1]["total_samples"] == 2 * points[0]["total_samples"]
    assert points[0]["work_ratio"] == pytest.approx(points[1]["work_ratio"])
    assert all(p["quality"] is not None for p in points)
