import pytest

from multires.metrics.report import rms_error
from multires.pipeline import prepare_frame, run_multires, run_reference
from multires.scene.model import load_scene
from multires.services.runs import RunSpec, build_config

WIDTH, HEIGHT = 640, 360

# Эффект и сцена, на которой его проверяют
CASES = [("ssao", "crease"), ("ssm", "occluder"), ("ssgi", "red_wall")]
MAX_RMS = 0.03
MAX_WORK_RATIO = 0.35


def _render(scenes_dir, tmp_path, effect: str, scene_name: str):
    path = scenes_dir / f"{scene_name}.json"
    scene = load_scene(path)
    cfg = build_config(RunSpec(scene=path, effect=effect, width=WIDTH, height=HEIGHT, out=tmp_path), scene)
    frame = prepare_frame(cfg, scene, WIDTH, HEIGHT)
    return run_multires(cfg, scene, WIDTH, HEIGHT, frame), run_reference(cfg, scene, WIDTH, HEIGHT, frame)


@pytest.mark.slow
@pytest.mark.parametrize("effect, scene_name", CASES)
def test_multires_matches_reference(scenes_dir, tmp_path, effect, scene_name):
    multi, reference = _render(scenes_dir, tmp_path, effect, scene_name)
    assert rms_error(multi.image, reference.image).rms <= MAX_RMS
    assert reference.work.work_ratio == 1.0


@pytest.mark.slow
@pytest.mark.parametrize("scene_name", ["crease", "occluder"])
@pytest.mark.parametrize("effect", ["ssao", "ssm", "ssgi"])
def test_multires_saves_work(scenes_dir, tmp_path, effect, scene_name):
    path = scenes_dir / f"{scene_name}.json"
    scene = load_scene(path)
    cfg = build_config(RunSpec(scene=path, effect=effect, width=WIDTH, height=HEIGHT, out=tmp_path), scene)
    multi = run_multires(cfg, scene, WIDTH, HEIGHT)
    assert multi.work.work_ratio <= MAX_WORK_RATIO
