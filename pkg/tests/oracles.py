"""Эталоны перебором: трассировка лучей по треугольникам и сбор по всему экрану"""
import numpy as np

from multires.scene.model import Scene
from multires.scene.raster import GBuffer, ShadowMap


def ray_cast(origins: np.ndarray, directions: np.ndarray, triangles: np.ndarray, t_min: float = 0.0):
    """
    Мёллер–Трумбор для каждого луча и каждого треугольника.

    :param origins: (R, 3) начала лучей.
    :param directions: (R, 3) или (3,) направления, не обязательно единичные.
    :param triangles: (T, 3, 3) вершины.
    :return: ближайший параметр t (inf при промахе) и номер треугольника (-1 при промахе).
    """
    origins = np.asarray(origins, dtype=np.float64)
    directions = np.broadcast_to(np.asarray(directions, dtype=np.float64), origins.shape)
    best = np.full(len(origins), np.inf)
    hit_id = np.full(len(origins), -1)
    eps = 1e-9
    for index, (v0, v1, v2) in enumerate(triangles):
        e1, e2 = v1 - v0, v2 - v0
        pvec = np.cross(directions, e2)
        det = pvec @ e1
        ok = np.abs(det) > 1e-12
        inv = 1.0 / np.where(ok, det, 1.0)
        tvec = origins - v0
        u = np.einsum("ij,ij->i", tvec, pvec) * inv
        qvec = np.cross(tvec, e1)
        v = np.einsum("ij,ij->i", directions, qvec) * inv
        t = (qvec @ e2) * inv
        hit = ok & (u >= -eps) & (v >= -eps) & (u + v <= 1.0 + eps) & (t > t_min) & (t < best)
        best[hit] = t[hit]
        hit_id[hit] = index
    return best, hit_id


def camera_depth(scene: Scene, width: int, height: int):
    """Линейная глубина в центре пикселя и номер попавшего треугольника"""
    camera = scene.camera
    f = camera.focal()
    aspect = width / height
    gy, gx = np.mgrid[0:height, 0:width]
    ndc_x = (gx + 0.5) / width * 2.0 - 1.0
    ndc_y = 1.0 - (gy + 0.5) / height * 2.0
    view_dirs = np.stack([ndc_x * aspect / f, ndc_y / f, -np.ones_like(ndc_x)], axis=-1).reshape(-1, 3)
    rot = camera.view_matrix()[:3, :3]
    # Компонента по оси взгляда равна 1, поэтому параметр луча и есть линейная глубина
    world_dirs = view_dirs @ rot
    origins = np.broadcast_to(np.asarray(camera.position, dtype=np.float64), world_dirs.shape)
    t, ids = ray_cast(origins, world_dirs, scene.positions(), t_min=camera.near)
    t[t > camera.far] = np.inf
    ids[~np.isfinite(t)] = -1
    return t.reshape(height, width), ids.reshape(height, width)


def shadow_depth(scene: Scene, sm: ShadowMap):
    """Глубина в пространстве света для центра текселя, inf при промахе"""
    res = sm.resolution
    gy, gx = np.mgrid[0:res, 0:res]
    ndc_x = ((gx + 0.5) / res * 2.0 - 1.0).ravel()
    ndc_y = ((gy + 0.5) / res * 2.0 - 1.0).ravel()
    a, offset = sm.transform[:3, :3], sm.transform[:3, 3]
    rhs = np.stack([ndc_x - offset[0], ndc_y - offset[1], np.full_like(ndc_x, -offset[2])], axis=1)
    # Точки на плоскости нулевой глубины; строки преобразования ортогональны
    origins = np.linalg.solve(a, rhs.T).T
    forward = a[2]
    t, _ = ray_cast(origins, forward, scene.positions())
    return t.reshape(res, res)


def ambient_occlusion(scene: Scene, g: GBuffer, radius: float, n_dirs: int, rng: np.random.Generator) -> np.ndarray:
    """
    Лучи по полусфере для каждого пикселя с распределением сэмплов SSAO.

    Сэмпл на расстоянии s по направлению ω закрыт, если луч встречает геометрию раньше s.
    """
    valid = g.valid.data
    points = g.world_position().data[valid]
    normals = g.world_normal().data[valid]
    helper = np.where(np.abs(normals[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    tangent = np.cross(normals, helper)
    tangent /= np.linalg.norm(tangent, axis=1, keepdims=True)
    bitangent = np.cross(normals, tangent)

    u1, u2, u3 = rng.random((3, len(points), n_dirs))
    r, phi = np.sqrt(u1), 2.0 * np.pi * u2
    lx, ly, lz = r * np.cos(phi), r * np.sin(phi), np.sqrt(np.clip(1.0 - u1, 0.0, None))
    reach = radius * (0.1 + 0.9 * u3 * u3)
    dirs = tangent[:, None] * lx[..., None] + bitangent[:, None] * ly[..., None] + normals[:, None] * lz[..., None]

    origins = np.repeat(points + 1e-6 * normals, n_dirs, axis=0)
    t, _ = ray_cast(origins, dirs.reshape(-1, 3), scene.positions())
    occluded = t.reshape(len(points), n_dirs) < reach

    out = np.ones(valid.shape)
    out[valid] = 1.0 - occluded.mean(axis=1)
    return out


def screen_gather(g: GBuffer, radiance: np.ndarray, radius: float, epsilon: float, supersample: int = 16) -> np.ndarray:
    """
    Один отскок, сумма по всем пикселям экрана.

    Пиксель входит с долей своей площади внутри диска приёмника,
    к этому сходится равномерная выборка по диску.
    """
    h, w = g.height, g.width
    pos, nrm, valid, albedo = g.position.data, g.normal.data, g.valid.data, g.albedo.data
    sub = (np.arange(supersample) + 0.5) / supersample
    gy, gx = np.mgrid[0:h, 0:w]
    out = np.zeros((h, w, 3))
    for fy, fx in zip(*np.nonzero(valid)):
        p_x, n_x = pos[fy, fx], nrm[fy, fx]
        rho = radius * g.focal_pixels / max(-p_x[2], g.camera.near)
        dx = gx[:, :, None, None] + sub[None, None, None, :] - (fx + 0.5)
        dy = gy[:, :, None, None] + sub[None, None, :, None] - (fy + 0.5)
        overlap = (dx * dx + dy * dy <= rho * rho).mean(axis=(2, 3))

        d = pos - p_x
        dist2 = np.einsum("ijk,ijk->ij", d, d)
        omega = d / np.maximum(np.sqrt(dist2), 1e-12)[..., None]
        cos_x = np.clip(omega @ n_x, 0.0, None)
        cos_y = np.clip(-np.einsum("ijk,ijk->ij", nrm, omega), 0.0, None)
        weight = np.where(valid, overlap * cos_x * cos_y / (epsilon + dist2), 0.0)
        gathered = np.einsum("ij,ijk->k", weight, radiance)
        out[fy, fx] = np.clip(albedo[fy, fx] * gathered * radius * radius / (np.pi * rho * rho), 0.0, 1.0)
    return out
