from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from multires.core.errors import ContractViolation
from multires.core.image import Image2D, normalize
from multires.scene.model import Camera, Scene

logger = logging.getLogger(__name__)

BACKGROUND_NORMAL = (0.0, 0.0, 1.0)
MIN_SIZE = 8

# Потолок наклона приёмника для смещения тени
MAX_SLOPE = 10.0
# Наибольшее расстояние от точки до центра ближайшего текселя, в текселях
NEAREST_TEXEL_REACH = 0.5 ** 0.5


@dataclass(frozen=True, eq=False)
class GBuffer:
    """Атрибуты геометрии по пикселям, в пространстве камеры"""

    position: Image2D
    depth: Image2D
    normal: Image2D
    albedo: Image2D
    valid: Image2D
    camera: Camera

    @property
    def width(self) -> int:
        return self.depth.width

    @property
    def height(self) -> int:
        return self.depth.height

    @property
    def focal_pixels(self) -> float:
        """Вертикальное фокусное расстояние в пикселях"""
        return self.camera.focal() * self.height / 2.0

    def view_rotation(self) -> NDArray[np.float64]:
        return self.camera.view_matrix()[:3, :3]

    def world_position(self) -> Image2D:
        view = self.camera.view_matrix()
        rot, trans = view[:3, :3], view[:3, 3]
        # view = R·world + t  =>  world = Rᵀ·(view - t)
        return Image2D((self.position.data - trans) @ rot)

    def world_normal(self) -> Image2D:
        return Image2D(self.normal.data @ self.view_rotation())

    def to_view_direction(self, world_dir: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.view_rotation() @ np.asarray(world_dir, dtype=np.float64)

    def project(self, points: NDArray[np.float64]) -> tuple[NDArray, NDArray, NDArray]:
        """
        Спроецировать точки камеры на экран.

        :param points: массив (..., 3) в пространстве камеры.
        :return: непрерывные координаты пикселя sx, sy и линейная глубина.
        """
        f = self.camera.focal()
        aspect = self.width / self.height
        depth = -points[..., 2]
        safe = np.where(np.abs(depth) > 1e-12, depth, 1e-12)
        sx = (f / aspect * points[..., 0] / safe + 1.0) * 0.5 * self.width
        sy = (1.0 - f * points[..., 1] / safe) * 0.5 * self.height
        return sx, sy, depth

    def unproject(self, ix: NDArray, iy: NDArray, depth: NDArray) -> NDArray[np.float64]:
        return _unproject(self.camera, self.width, self.height, ix, iy, depth)


@dataclass(frozen=True, eq=False)
class ShadowMap:
    """Ортографическая карта глубины со стороны источника света"""

    depth: Image2D
    transform: NDArray[np.float64]
    texel_world: float

    @property
    def resolution(self) -> int:
        return self.depth.width

    @property
    def forward(self) -> NDArray[np.float64]:
        """Единичное направление распространения света, мировые координаты"""
        return self.transform[2, :3]

    def project(self, world_pos: NDArray[np.float64]) -> tuple[NDArray, NDArray, NDArray]:
        """Координаты текселя и глубина точек в пространстве света"""
        p = np.asarray(world_pos, dtype=np.float64)
        t = self.transform
        # Поэлементно: результат для точки не зависит от размера массива
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        ndc_x = x * t[0, 0] + y * t[0, 1] + z * t[0, 2] + t[0, 3]
        ndc_y = x * t[1, 0] + y * t[1, 1] + z * t[1, 2] + t[1, 3]
        depth = x * t[2, 0] + y * t[2, 1] + z * t[2, 2] + t[2, 3]
        res = self.resolution
        return (ndc_x + 1.0) * 0.5 * res, (ndc_y + 1.0) * 0.5 * res, depth

    def lit(self, tx: NDArray, ty: NDArray, depth: NDArray, bias) -> NDArray[np.bool_]:
        """Сравнение с ближайшим текселем; вне карты точка освещена"""
        res = self.resolution
        ix = np.floor(tx).astype(np.int64)
        iy = np.floor(ty).astype(np.int64)
        inside = (ix >= 0) & (ix < res) & (iy >= 0) & (iy < res)
        stored = self.depth.data[np.clip(iy, 0, res - 1), np.clip(ix, 0, res - 1)]
        return ~inside | (stored >= depth - bias)


def _unproject(camera: Camera, width: int, height: int, ix, iy, depth) -> NDArray[np.float64]:
    """Точки камеры на лучах через центры пикселей"""
    f = camera.focal()
    aspect = width / height
    ndc_x = (ix + 0.5) / width * 2.0 - 1.0
    ndc_y = 1.0 - (iy + 0.5) / height * 2.0
    return np.stack([ndc_x * aspect / f * depth, ndc_y / f * depth, -depth], axis=-1)


def _cover(sx: NDArray, sy: NDArray, width: int, height: int):
    """Пиксели, центры которых внутри треугольника на экране, и их барицентрики"""
    x_lo = max(int(np.ceil(sx.min() - 0.5)), 0)
    x_hi = min(int(np.floor(sx.max() - 0.5)), width - 1)
    y_lo = max(int(np.ceil(sy.min() - 0.5)), 0)
    y_hi = min(int(np.floor(sy.max() - 0.5)), height - 1)
    if x_lo > x_hi or y_lo > y_hi:
        return None
    area = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sx[2] - sx[0]) * (sy[1] - sy[0])
    if abs(area) < 1e-12:
        return None
    gx, gy = np.meshgrid(np.arange(x_lo, x_hi + 1), np.arange(y_lo, y_hi + 1))
    px, py = gx.ravel() + 0.5, gy.ravel() + 0.5
    b0 = ((sx[1] - px) * (sy[2] - py) - (sx[2] - px) * (sy[1] - py)) / area
    b1 = ((sx[2] - px) * (sy[0] - py) - (sx[0] - px) * (sy[2] - py)) / area
    b2 = 1.0 - b0 - b1
    inside = (b0 >= -1e-9) & (b1 >= -1e-9) & (b2 >= -1e-9)
    if not inside.any():
        return None
    bary = np.stack([b0[inside], b1[inside], b2[inside]], axis=1)
    return gx.ravel()[inside], gy.ravel()[inside], bary


def _clip_near(positions: NDArray, normals: NDArray, near: float) -> list[tuple[NDArray, NDArray]]:
    """Отсечение Сазерленда–Ходжмена плоскостью depth = near"""
    verts = list(zip(positions, normals))
    out = []
    for k, (p, n) in enumerate(verts):
        q, m = verts[(k + 1) % len(verts)]
        dp, dq = -p[2] - near, -q[2] - near
        if dp >= 0:
            out.append((p, n))
        if (dp >= 0) != (dq >= 0):
            t = dp / (dp - dq)
            out.append((p + t * (q - p), n + t * (m - n)))
    return out


def rasterize_gbuffer(scene: Scene, width: int, height: int) -> GBuffer:
    """G-буфер с z-буфером в перспективе; глубина линейная, в пространстве камеры"""
    if width < MIN_SIZE or height < MIN_SIZE:
        raise ContractViolation(f"Разрешение G-буфера меньше {MIN_SIZE}: {width}x{height}")
    camera = scene.camera
    right, up, forward = camera.basis()
    if not np.isfinite(right).all() or np.linalg.norm(right) < 0.5:
        raise ContractViolation("Вырожденная камера")

    view = camera.view_matrix()
    rot, trans = view[:3, :3], view[:3, 3]
    pos_view = scene.positions() @ rot.T + trans
    nrm_view = scene.normals() @ rot.T
    albedos = scene.albedos()

    f = camera.focal()
    aspect = width / height
    depth_buf = np.full((height, width), np.inf)
    normal_buf = np.zeros((height, width, 3))
    albedo_buf = np.zeros((height, width, 3))

    for t in range(len(pos_view)):
        poly = _clip_near(pos_view[t], nrm_view[t], camera.near)
        # Веер треугольников после отсечения
        for k in range(1, len(poly) - 1):
            tri = [poly[0], poly[k], poly[k + 1]]
            p = np.array([v[0] for v in tri])
            n = np.array([v[1] for v in tri])
            d = -p[:, 2]
            sx = (f / aspect * p[:, 0] / d + 1.0) * 0.5 * width
            sy = (1.0 - f * p[:, 1] / d) * 0.5 * height
            covered = _cover(sx, sy, width, height)
            if covered is None:
                continue
            ix, iy, bary = covered
            q = bary / d
            inv = q.sum(axis=1)
            depth = 1.0 / inv
            keep = (depth >= camera.near) & (depth <= camera.far) & (depth < depth_buf[iy, ix])
            if not keep.any():
                continue
            ix, iy, depth = ix[keep], iy[keep], depth[keep]
            weights = q[keep] / inv[keep, None]
            depth_buf[iy, ix] = depth
            normal_buf[iy, ix] = normalize(weights @ n)
            albedo_buf[iy, ix] = albedos[t]

    valid = np.isfinite(depth_buf)
    depth_buf[~valid] = camera.far
    normal_buf[~valid] = BACKGROUND_NORMAL
    gy, gx = np.mgrid[0:height, 0:width]
    position = _unproject(camera, width, height, gx, gy, depth_buf)
    logger.debug(f"G-буфер {width}x{height}: покрыто {int(valid.sum())} пикселей")
    return GBuffer(
        position=Image2D(position),
        depth=Image2D(depth_buf),
        normal=Image2D(normal_buf),
        albedo=Image2D(albedo_buf),
        valid=Image2D(valid),
        camera=camera,
    )


def _light_basis(direction: NDArray[np.float64]):
    forward = normalize(np.asarray(direction, dtype=np.float64))
    helper = np.array([0.0, 0.0, 1.0]) if abs(forward[1]) > 0.99 else np.array([0.0, 1.0, 0.0])
    right = normalize(np.cross(forward, helper))
    up = np.cross(right, forward)
    return right, up, forward


def rasterize_shadowmap(scene: Scene, resolution: int) -> ShadowMap:
    """Ортографическая глубина со стороны света, объём подогнан под границы сцены"""
    if resolution < MIN_SIZE:
        raise ContractViolation(f"Разрешение карты теней меньше {MIN_SIZE}: {resolution}")
    pts = scene.positions()
    if not np.isfinite(pts).all():
        raise ContractViolation("Сцена не ограничена")
    right, up, forward = _light_basis(scene.light.direction_array)
    basis = np.stack([right, up, forward])
    light_pts = pts @ basis.T
    lo = light_pts.reshape(-1, 3).min(axis=0)
    hi = light_pts.reshape(-1, 3).max(axis=0)
    half = max(hi[0] - lo[0], hi[1] - lo[1]) * 0.5 * 1.02
    if half <= 1e-9:
        raise ContractViolation("Сцена вырождена с точки зрения источника света")
    center = (hi + lo) * 0.5
    margin = 0.01 * max(scene.diagonal(), 1e-6)

    transform = np.eye(4)
    transform[0, :3], transform[0, 3] = right / half, -center[0] / half
    transform[1, :3], transform[1, 3] = up / half, -center[1] / half
    transform[2, :3], transform[2, 3] = forward, -(lo[2] - margin)

    background = hi[2] - lo[2] + 2.0 * margin
    depth_buf = np.full((resolution, resolution), background)
    for tri in pts:
        light = tri @ transform[:3, :3].T + transform[:3, 3]
        tx = (light[:, 0] + 1.0) * 0.5 * resolution
        ty = (light[:, 1] + 1.0) * 0.5 * resolution
        covered = _cover(tx, ty, resolution, resolution)
        if covered is None:
            continue
        ix, iy, bary = covered
        depth = bary @ light[:, 2]
        keep = depth < depth_buf[iy, ix]
        depth_buf[iy[keep], ix[keep]] = depth[keep]

    logger.debug(f"Карта теней {resolution}x{resolution}, тексель {2.0 * half / resolution:.4g}")
    return ShadowMap(depth=Image2D(depth_buf), transform=transform, texel_world=2.0 * half / resolution)


def slope_scaled_bias(bias: float, ndl, reach):
    """
    Смещение глубины с поправкой на наклон приёмника к свету.

    :param bias: постоянная часть, >= 0.
    :param ndl: косинус угла между нормалью и направлением на свет.
    :param reach: расстояние от точки до места выборки карты, в мировых единицах.
    """
    ndl = np.asarray(ndl, dtype=np.float64)
    sin_theta = np.sqrt(np.clip(1.0 - ndl * ndl, 0.0, None))
    slope = np.minimum(sin_theta / np.maximum(ndl, 1e-6), MAX_SLOPE)
    return bias + reach * slope


def shadow_test_hard(sm: ShadowMap, world_pos, bias: float, ndl=None):
    """
    Одна выборка карты теней: True, если точка освещена.

    :param world_pos: точка (3,) или массив точек (..., 3) в мировых координатах.
    :param bias: смещение глубины, >= 0.
    :param ndl: косинус нормали к свету; если задан, смещение растёт с наклоном
        на полдиагонали текселя, как у PCF.
    """
    if bias < 0:
        raise ContractViolation(f"Отрицательное смещение тени: {bias}")
    p = np.asarray(world_pos, dtype=np.float64)
    tx, ty, depth = sm.project(p)
    if ndl is not None:
        bias = slope_scaled_bias(bias, ndl, NEAREST_TEXEL_REACH * sm.texel_world)
    lit = sm.lit(tx, ty, depth, bias)
    return bool(lit) if p.ndim == 1 else lit


def default_shadow_bias(scene: Scene, fraction: float) -> float:
    return fraction * scene.diagonal()
