from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Annotated, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, PositiveInt, ValidationError, field_validator, model_validator

from multires.core.errors import SceneFormatError
from multires.core.image import Vec3, normalize

logger = logging.getLogger(__name__)

Triple = Annotated[list[float], Field(min_length=3, max_length=3)]

UNIT_TOLERANCE = 1e-4


def _finite(values: list[float]) -> list[float]:
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"нечисловые компоненты: {values}")
    return values


def _unit(values: list[float]) -> list[float]:
    _finite(values)
    length = math.sqrt(sum(v * v for v in values))
    if length < 1e-12:
        raise ValueError("нулевой вектор направления")
    return [v / length for v in values]


class Triangle(BaseModel):
    model_config = ConfigDict(extra="forbid")

    v: Annotated[list[Triple], Field(min_length=3, max_length=3)]
    n: Annotated[list[Triple], Field(min_length=3, max_length=3)]
    albedo: Triple = [0.8, 0.8, 0.8]

    @field_validator("v")
    @classmethod
    def check_positions(cls, v):
        return [_finite(p) for p in v]

    @field_validator("n")
    @classmethod
    def check_normals(cls, n):
        for normal in n:
            _finite(normal)
            if abs(math.sqrt(sum(c * c for c in normal)) - 1.0) > UNIT_TOLERANCE:
                raise ValueError(f"нормаль вершины не единичной длины: {normal}")
        return n

    @field_validator("albedo")
    @classmethod
    def check_albedo(cls, albedo):
        if not all(0.0 <= c <= 1.0 for c in _finite(albedo)):
            raise ValueError(f"альбедо вне [0,1]: {albedo}")
        return albedo


class Camera(BaseModel):
    model_config = ConfigDict(extra="forbid")

    position: Triple
    direction: Triple
    up: Triple = [0.0, 1.0, 0.0]
    fov_y: float = Field(default=math.radians(60.0), gt=0.0, lt=math.pi)
    near: PositiveFloat = 0.1
    far: PositiveFloat = 100.0

    @field_validator("position")
    @classmethod
    def check_position(cls, v):
        return _finite(v)

    @field_validator("direction", "up")
    @classmethod
    def normalize_axes(cls, v):
        return _unit(v)

    @model_validator(mode="after")
    def check_frame(self):
        if self.far <= self.near:
            raise ValueError("far должен быть больше near")
        if np.linalg.norm(np.cross(self.direction, self.up)) < 1e-6:
            raise ValueError("направление камеры коллинеарно вектору up")
        return self

    def basis(self) -> tuple[Vec3, Vec3, Vec3]:
        """Векторы вправо, вверх и вперёд в мировых координатах"""
        forward = np.asarray(self.direction, dtype=np.float64)
        right = normalize(np.cross(forward, np.asarray(self.up, dtype=np.float64)))
        up = np.cross(right, forward)
        return right, up, forward

    def view_matrix(self) -> np.ndarray:
        """Мир -> камера (камера смотрит вдоль -z, глубина = -z)"""
        right, up, forward = self.basis()
        eye = np.asarray(self.position, dtype=np.float64)
        m = np.eye(4)
        m[0, :3], m[1, :3], m[2, :3] = right, up, -forward
        m[:3, 3] = -m[:3, :3] @ eye
        return m

    def focal(self) -> float:
        return 1.0 / math.tan(self.fov_y / 2.0)


class DirectionalLight(BaseModel):
    model_config = ConfigDict(extra="forbid")

    direction: Triple
    intensity: Triple = [1.0, 1.0, 1.0]
    ambient: Triple = [0.1, 0.1, 0.1]

    @field_validator("direction")
    @classmethod
    def normalize_direction(cls, v):
        return _unit(v)

    @field_validator("intensity", "ambient")
    @classmethod
    def check_non_negative(cls, v):
        if any(c < 0 for c in _finite(v)):
            raise ValueError(f"отрицательная компонента: {v}")
        return v

    @property
    def direction_array(self) -> Vec3:
        return np.asarray(self.direction, dtype=np.float64)

    @property
    def intensity_array(self) -> Vec3:
        return np.asarray(self.intensity, dtype=np.float64)

    @property
    def ambient_array(self) -> Vec3:
        return np.asarray(self.ambient, dtype=np.float64)


class SceneOverrides(BaseModel):
    """Настройки рендера из файла сцены; флаги запуска важнее"""

    model_config = ConfigDict(extra="forbid")

    samples: Optional[PositiveInt] = None
    radius: Optional[PositiveFloat] = None
    pcf_radius: Optional[PositiveFloat] = None
    seed: Optional[int] = None
    normal_threshold: Optional[NonNegativeFloat] = None
    depth_threshold: Optional[NonNegativeFloat] = None
    shadow_bias: Optional[NonNegativeFloat] = None
    shadow_resolution: Optional[PositiveInt] = None
    variances: Optional[list[Optional[NonNegativeFloat]]] = None
    weights: Optional[list[Optional[PositiveFloat]]] = None
    enabled: Optional[list[Optional[bool]]] = None


class Scene(BaseModel):
    model_config = ConfigDict(extra="forbid")

    triangles: Annotated[list[Triangle], Field(min_length=1)]
    camera: Camera
    light: DirectionalLight
    overrides: SceneOverrides = SceneOverrides()

    def positions(self) -> np.ndarray:
        """(T, 3, 3) world-space vertex positions"""
        return np.array([t.v for t in self.triangles], dtype=np.float64)

    def normals(self) -> np.ndarray:
        return np.array([t.n for t in self.triangles], dtype=np.float64)

    def albedos(self) -> np.ndarray:
        return np.array([t.albedo for t in self.triangles], dtype=np.float64)

    def bounds(self) -> tuple[Vec3, Vec3]:
        pts = self.positions().reshape(-1, 3)
        return pts.min(axis=0), pts.max(axis=0)

    def diagonal(self) -> float:
        lo, hi = self.bounds()
        return float(np.linalg.norm(hi - lo))


def load_scene(path: str | Path) -> Scene:
    """
    Загрузить сцену из JSON.

    :param path: путь к файлу сцены.
    :return: провалидированная сцена.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Файл сцены не найден: {path}")
    try:
        scene = Scene.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValidationError) as e:
        raise SceneFormatError(f"Не удалось разобрать сцену {path}: {e}") from e
    logger.info(f"📦 Сцена {path.name}: {len(scene.triangles)} треугольников")
    return scene


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(scene.model_dump_json(indent=2), encoding="utf-8")
