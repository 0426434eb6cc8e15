"""Небольшие встроенные сцены для тестов и файлов в scenes/"""
import math

import numpy as np

from multires.core.image import normalize
from multires.scene.model import Camera, DirectionalLight, Scene, Triangle

WHITE = (0.8, 0.8, 0.8)
RED = (0.9, 0.1, 0.1)


def quad(corners, normal, albedo=WHITE) -> list[Triangle]:
    """Два треугольника по углам в порядке обхода"""
    a, b, c, d = [list(map(float, p)) for p in corners]
    n = [float(v) for v in normalize(np.asarray(normal, dtype=np.float64))]
    albedo = list(albedo)
    return [
        Triangle(v=[a, b, c], n=[n, n, n], albedo=albedo),
        Triangle(v=[a, c, d], n=[n, n, n], albedo=albedo),
    ]


def _scene(triangles, camera, light) -> Scene:
    return Scene(triangles=triangles, camera=camera, light=light)


def fronto_quad(distance: float = 3.0, intensity=(1.0, 1.0, 1.0)) -> Scene:
    """Плоскость во весь экран, перпендикулярная оси взгляда"""
    z = -distance
    tris = quad([(-20, -20, z), (20, -20, z), (20, 20, z), (-20, 20, z)], (0, 0, 1))
    camera = Camera(position=[0, 0, 0], direction=[0, 0, -1])
    light = DirectionalLight(direction=[0.2, -0.3, -1.0], intensity=list(intensity))
    return _scene(tris, camera, light)


def tilted_quad(distance: float = 3.0, angle: float = math.pi / 4) -> Scene:
    """Плоскость через (0, 0, -distance), наклонённая вокруг горизонтальной оси"""
    center = np.array([0.0, 0.0, -distance])
    normal = np.array([0.0, math.sin(angle), math.cos(angle)])
    ex = np.array([1.0, 0.0, 0.0])
    ey = np.array([0.0, math.cos(angle), -math.sin(angle)])
    corners = [center + sx * 20 * ex + sy * 10 * ey for sx, sy in ((-1, -1), (1, -1), (1, 1), (-1, 1))]
    camera = Camera(position=[0, 0, 0], direction=[0, 0, -1])
    light = DirectionalLight(direction=[0.0, -1.0, -1.0])
    return _scene(quad(corners, normal), camera, light)


def crease(distance: float = 3.0) -> Scene:
    """Внутренний угол двух перпендикулярных стен, шов по вертикальной оси экрана"""
    z = -distance
    left = quad([(-20, -20, z + 20), (0, -20, z), (0, 20, z), (-20, 20, z + 20)], (1, 0, 1))
    right = quad([(0, -20, z), (20, -20, z + 20), (20, 20, z + 20), (0, 20, z)], (-1, 0, 1))
    camera = Camera(position=[0, 0, 0], direction=[0, 0, -1])
    light = DirectionalLight(direction=[-0.3, -0.5, -0.8], ambient=[0.15, 0.15, 0.15])
    return _scene(left + right, camera, light)


def step_occluder(wall: float = 5.0, front: float = 3.0, half: float = 0.5) -> Scene:
    """Квадрат перед стеной, оба параллельны экрану"""
    tris = quad([(-20, -20, -wall), (20, -20, -wall), (20, 20, -wall), (-20, 20, -wall)], (0, 0, 1))
    tris += quad([(-half, -half, -front), (half, -half, -front), (half, half, -front), (-half, half, -front)], (0, 0, 1))
    camera = Camera(position=[0, 0, 0], direction=[0, 0, -1])
    light = DirectionalLight(direction=[0.0, 0.0, -1.0])
    return _scene(tris, camera, light)


def floor(extent: float = 20.0, y: float = 0.0, albedo=WHITE) -> list[Triangle]:
    e = extent
    return quad([(-e, y, e), (e, y, e), (e, y, -e), (-e, y, -e)], (0, 1, 0), albedo)


def occluder_over_floor(height: float = 1.0, half: float = 0.6) -> Scene:
    """Висящий горизонтальный квадрат, отбрасывающий тень на пол"""
    tris = floor(12.0)
    h = half
    tris += quad([(-h, height, h - 1), (h, height, h - 1), (h, height, -h - 1), (-h, height, -h - 1)], (0, 1, 0))
    camera = Camera(position=[0, 4, 2], direction=[0, -4, -3])
    light = DirectionalLight(direction=[0.3, -1.0, 0.2], ambient=[0.15, 0.15, 0.15])
    return _scene(tris, camera, light)


def sphere(center, radius: float, stacks: int = 12, slices: int = 24, albedo=WHITE) -> list[Triangle]:
    """UV-сфера с точными нормалями в вершинах"""
    c = np.asarray(center, dtype=np.float64)
    tris = []

    def point(i, j):
        theta = math.pi * i / stacks
        phi = 2.0 * math.pi * j / slices
        n = np.array([math.sin(theta) * math.cos(phi), math.cos(theta), math.sin(theta) * math.sin(phi)])
        return (c + radius * n).tolist(), n.tolist()

    for i in range(stacks):
        for j in range(slices):
            (a, na), (b, nb) = point(i, j), point(i + 1, j)
            (d, nd), (e, ne) = point(i + 1, j + 1), point(i, j + 1)
            if i > 0:
                tris.append(Triangle(v=[a, b, e], n=[na, nb, ne], albedo=list(albedo)))
            if i < stacks - 1:
                tris.append(Triangle(v=[b, d, e], n=[nb, nd, ne], albedo=list(albedo)))
    return tris


def sphere_over_plane(radius: float = 1.0, height: float = 1.5) -> Scene:
    tris = floor(4.0) + sphere((0.0, height, -1.0), radius)
    camera = Camera(position=[0, 4, 3], direction=[0, -4, -4])
    light = DirectionalLight(direction=[0.0, -1.0, 0.0])
    return _scene(tris, camera, light)


def red_wall(intensity=(1.0, 1.0, 1.0)) -> Scene:
    """Белый пол у освещённой красной стены"""
    tris = quad([(-20, 0, 20), (20, 0, 20), (20, 0, -4), (-20, 0, -4)], (0, 1, 0))
    tris += quad([(-20, 0, -4), (20, 0, -4), (20, 20, -4), (-20, 20, -4)], (0, 0, 1), RED)
    camera = Camera(position=[0, 2, 0], direction=[0, -1.5, -4])
    light = DirectionalLight(direction=[0.3, -0.6, -1.0], intensity=list(intensity), ambient=[0.0, 0.0, 0.0])
    return _scene(tris, camera, light)


def shadow_transect(extent: float = 4.0, occluder_height: float = 5.0, camera_height: float = 3.0) -> Scene:
    """Свет сверху вниз, полуплоскость-заслонка над x < 0, камера смотрит вниз"""
    e = extent
    tris = floor(e)
    y = occluder_height
    tris += quad([(-e, y, e), (0, y, e), (0, y, -e), (-e, y, -e)], (0, 1, 0))
    camera = Camera(position=[0, camera_height, 0], direction=[0, -1, 0], up=[0, 0, -1], near=0.05)
    light = DirectionalLight(direction=[0.0, -1.0, 0.0], ambient=[0.0, 0.0, 0.0])
    return _scene(tris, camera, light)


FIXTURES = {
    "fronto_quad": fronto_quad,
    "tilted_quad": tilted_quad,
    "crease": crease,
    "step_occluder": step_occluder,
    "occluder_over_floor": occluder_over_floor,
    "sphere_over_plane": sphere_over_plane,
    "red_wall": red_wall,
    "shadow_transect": shadow_transect,
}
