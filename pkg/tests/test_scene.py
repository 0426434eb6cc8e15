import json
import math

import numpy as np
import numpy.testing as npt
import pytest

from multires.core.errors import ContractViolation, SceneFormatError
from multires.scene import fixtures
from multires.scene.model import Camera, DirectionalLight, Scene, load_scene, save_scene
from multires.scene.raster import (
    BACKGROUND_NORMAL,
    default_shadow_bias,
    rasterize_gbuffer,
    rasterize_shadowmap,
    shadow_test_hard,
    slope_scaled_bias,
)
from tests.oracles import camera_depth, shadow_depth


def _silhouette(object_id: np.ndarray) -> np.ndarray:
    """Пиксели, у которых в окрестности 3x3 есть пиксель с другой меткой"""
    padded = np.pad(object_id, 1, mode="edge")
    h, w = object_id.shape
    band = np.zeros(object_id.shape, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            band |= padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w] != object_id
    return band


@pytest.mark.parametrize("name", ["crease", "occluder", "red_wall"])
def test_committed_scenes_load(scenes_dir, name):
    scene = load_scene(scenes_dir / f"{name}.json")
    assert len(scene.triangles) >= 4


def test_committed_crease_matches_builder(scenes_dir, crease):
    loaded = load_scene(scenes_dir / "crease.json")
    npt.assert_allclose(loaded.positions(), crease.positions())
    npt.assert_allclose(loaded.normals(), crease.normals(), atol=1e-12)


def test_missing_scene(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scene(tmp_path / "nope.json")


def test_malformed_scene(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    with pytest.raises(SceneFormatError):
        load_scene(path)


def test_non_unit_normal_rejected(tmp_path, fronto):
    data = json.loads(fronto.model_dump_json())
    data["triangles"][0]["n"][0] = [0.0, 0.0, 2.0]
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(SceneFormatError):
        load_scene(path)


def test_camera_up_collinear_rejected():
    with pytest.raises(ValueError):
        Camera(position=[0, 0, 0], direction=[0, 1, 0], up=[0, 2, 0])


def test_save_and_load(tmp_path, crease):
    path = tmp_path / "crease.json"
    save_scene(crease, path)
    loaded = load_scene(path)
    npt.assert_array_equal(loaded.positions(), crease.positions())
    npt.assert_allclose(loaded.camera.direction, crease.camera.direction)
    assert loaded.light.ambient == crease.light.ambient


def test_rasterize_too_small(fronto):
    with pytest.raises(ContractViolation):
        rasterize_gbuffer(fronto, 4, 16)


def test_fronto_depth_is_constant(fronto):
    g = rasterize_gbuffer(fronto, 64, 48)
    assert g.valid.data.all()
    npt.assert_allclose(g.depth.data, 3.0, rtol=1e-12)
    npt.assert_allclose(g.normal.data, np.broadcast_to([0.0, 0.0, 1.0], g.normal.data.shape), atol=1e-12)
    npt.assert_allclose(g.albedo.data, 0.8)
    npt.assert_allclose(g.world_position().data[..., 2], -3.0, rtol=1e-12)


def test_tilted_depth_is_perspective_correct():
    scene = fixtures.tilted_quad()
    g = rasterize_gbuffer(scene, 64, 64)
    assert g.valid.data.all()
    f = scene.camera.focal()
    ndc_y = 1.0 - (np.arange(64) + 0.5) / 64 * 2.0
    expected = 3.0 / (1.0 - ndc_y / f)
    npt.assert_allclose(g.depth.data, np.broadcast_to(expected[:, None], (64, 64)), rtol=1e-9)


def test_project_hits_pixel_centers(crease):
    g = rasterize_gbuffer(crease, 32, 24)
    sx, sy, depth = g.project(g.position.data)
    gy, gx = np.mgrid[0:24, 0:32]
    npt.assert_allclose(sx, gx + 0.5, atol=1e-9)
    npt.assert_allclose(sy, gy + 0.5, atol=1e-9)
    npt.assert_allclose(depth, g.depth.data)


@pytest.mark.parametrize("name", ["crease", "step_occluder", "occluder_over_floor"])
def test_depth_matches_ray_cast(name):
    scene = fixtures.FIXTURES[name]()
    width, height = 48, 32
    g = rasterize_gbuffer(scene, width, height)
    oracle, ids = camera_depth(scene, width, height)

    # Каждый квад сцены состоит из двух треугольников
    interior = ~_silhouette(ids // 2)
    npt.assert_array_equal(g.valid.data[interior], np.isfinite(oracle)[interior])
    both = interior & g.valid.data
    assert both.sum() > width * height // 2
    npt.assert_allclose(g.depth.data[both], oracle[both], rtol=1e-3)


def test_near_plane_clipping(crease):
    g = rasterize_gbuffer(crease, 32, 32)
    valid = g.valid.data
    assert valid.all()
    assert g.depth.data[valid].min() >= crease.camera.near


def test_empty_view_is_background(fronto):
    scene = fronto.model_copy(update={"camera": Camera(position=[0, 0, 0], direction=[0, 0, 1])})
    g = rasterize_gbuffer(scene, 16, 16)
    assert not g.valid.data.any()
    npt.assert_array_equal(g.depth.data, scene.camera.far)
    npt.assert_array_equal(g.normal.data[3, 5], BACKGROUND_NORMAL)
    npt.assert_array_equal(g.albedo.data, 0.0)


def test_shadow_map_of_plane_facing_light():
    tris = fixtures.quad([(-5, -5, -3), (5, -5, -3), (5, 5, -3), (-5, 5, -3)], (0, 0, 1))
    scene = Scene(
        triangles=tris,
        camera=Camera(position=[0, 0, 0], direction=[0, 0, -1]),
        light=DirectionalLight(direction=[0, 0, -1]),
    )
    sm = rasterize_shadowmap(scene, 64)
    depth = sm.depth.data
    covered = depth < depth.max()
    assert covered.mean() > 0.9
    assert np.ptp(depth[covered]) < 1e-9


def test_shadow_map_matches_ray_cast():
    scene = fixtures.sphere_over_plane()
    sm = rasterize_shadowmap(scene, 64)
    oracle = shadow_depth(scene, sm)
    hit = np.isfinite(oracle)
    assert hit.mean() > 0.9

    # Допуск в один тексель вокруг силуэта сферы
    jump = np.zeros(oracle.shape, dtype=bool)
    filled = np.where(hit, oracle, 1e6)
    jump[:, :-1] |= np.abs(filled[:, :-1] - filled[:, 1:]) > 0.05
    jump[:-1, :] |= np.abs(filled[:-1, :] - filled[1:, :]) > 0.05
    band = _silhouette(jump.astype(np.int64)) | jump
    mismatch = hit & (np.abs(sm.depth.data - np.where(hit, oracle, 0.0)) > 1e-6)
    assert not np.any(mismatch & ~band)


def test_hard_shadow_under_occluder():
    scene = fixtures.occluder_over_floor()
    sm = rasterize_shadowmap(scene, 512)
    bias = default_shadow_bias(scene, 1e-3)
    assert shadow_test_hard(sm, [0.3, 0.0, -0.8], bias) is False
    assert shadow_test_hard(sm, [0.0, 1.0, -1.0], bias) is True
    assert shadow_test_hard(sm, [5.0, 0.0, 5.0], bias) is True
    lit = shadow_test_hard(sm, np.array([[0.3, 0.0, -0.8], [5.0, 0.0, 5.0]]), bias)
    npt.assert_array_equal(lit, [False, True])


def test_outside_shadow_map_is_lit():
    scene = fixtures.occluder_over_floor()
    sm = rasterize_shadowmap(scene, 64)
    assert shadow_test_hard(sm, [500.0, 0.0, 0.0], 0.0) is True


def test_negative_bias_rejected():
    sm = rasterize_shadowmap(fixtures.occluder_over_floor(), 32)
    with pytest.raises(ContractViolation):
        shadow_test_hard(sm, [0.0, 0.0, 0.0], -1e-3)


def test_bias_removes_acne(rng):
    scene = Scene(
        triangles=fixtures.floor(1.0),
        camera=Camera(position=[0, 3, 3], direction=[0, -1, -1]),
        light=DirectionalLight(direction=[1, -1, 0]),
    )
    sm = rasterize_shadowmap(scene, 2048)
    points = np.zeros((200, 3))
    points[:, [0, 2]] = rng.uniform(-0.9, 0.9, size=(200, 2))
    # Пол ничем не загорожен, все промахи здесь от самозатенения
    assert (~shadow_test_hard(sm, points, 0.0)).sum() > 0
    assert shadow_test_hard(sm, points, 2e-3).all()


def test_slope_bias_alone_removes_acne(rng):
    scene = Scene(
        triangles=fixtures.floor(1.0),
        camera=Camera(position=[0, 3, 3], direction=[0, -1, -1]),
        light=DirectionalLight(direction=[1, -1, 0]),
    )
    sm = rasterize_shadowmap(scene, 2048)
    points = np.zeros((200, 3))
    points[:, [0, 2]] = rng.uniform(-0.9, 0.9, size=(200, 2))
    ndl = np.full(200, math.sqrt(0.5))
    assert shadow_test_hard(sm, points, 0.0, ndl=ndl).all()
    # Для плоскости, обращённой к свету, наклон ничего не добавляет
    npt.assert_array_equal(slope_scaled_bias(0.01, np.ones(3), 5.0), 0.01)


def test_scene_bounds(crease):
    lo, hi = crease.bounds()
    npt.assert_allclose(lo, [-20, -20, -3])
    npt.assert_allclose(hi, [20, 20, 17])
    assert crease.diagonal() == pytest.approx(math.sqrt(40**2 + 40**2 + 20**2))
