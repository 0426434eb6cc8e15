from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property
from typing import Iterator, Optional

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, PositiveFloat, PositiveInt

import config
from multires.core.errors import ContractViolation
from multires.core.image import Image2D
from multires.scene.model import DirectionalLight
from multires.scene.raster import GBuffer, ShadowMap

# Ограничение на число элементов (пиксели × сэмплы) в одном векторизованном проходе
CHUNK_ELEMENTS = 1 << 18

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


class EffectKind(StrEnum):
    SSAO = "ssao"
    SSM = "ssm"
    SSGI = "ssgi"


class EffectParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sample_count: PositiveInt = 64
    radius: PositiveFloat = config.DEFAULT_RADIUS
    pcf_radius: PositiveFloat = config.DEFAULT_PCF_RADIUS
    rng_seed: int = config.DEFAULT_SEED
    ssao_bias: PositiveFloat = config.SSAO_BIAS

    @classmethod
    def for_effect(cls, effect: str, **overrides) -> EffectParams:
        overrides.setdefault("sample_count", config.DEFAULT_SAMPLES[str(effect)])
        return cls(**overrides)


@dataclass(frozen=True, eq=False)
class EffectOutput:
    layer: Image2D
    samples_evaluated: int
    shaded_pixels: int


@dataclass(eq=False)
class ShadingInputs:
    """Всё, что читают эффекты: G-буфер, карта теней, свет"""

    gbuffer: GBuffer
    shadow_map: Optional[ShadowMap]
    light: DirectionalLight
    shadow_bias: float

    @cached_property
    def world_position(self) -> NDArray[np.float64]:
        return self.gbuffer.world_position().data

    @cached_property
    def light_view(self) -> NDArray[np.float64]:
        """Направление на свет в пространстве камеры"""
        return -self.gbuffer.to_view_direction(self.light.direction_array)

    @cached_property
    def direct_radiance(self) -> NDArray[np.float64]:
        """Прямой свет с жёсткой тенью для каждого пикселя, источник для сбора SSGI"""
        g = self.gbuffer
        lit = self.shadow_map.lit(*self.shadow_map.project(self.world_position), self.shadow_bias)
        ndl = np.clip(g.normal.data @ self.light_view, 0.0, None)
        radiance = g.albedo.data * (lit * ndl)[..., None] * self.light.intensity_array
        radiance[~g.valid.data] = 0.0
        return radiance


def _mix(z: NDArray[np.uint64]) -> NDArray[np.uint64]:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash_uniform(seed: int, *keys) -> NDArray[np.float64]:
    """
    Равномерные числа в [0, 1) по счётчику: splitmix64 от зерна и целых ключей.

    Значение зависит только от ключей, порядок вычисления не важен.

    :param seed: зерно кадра.
    :param keys: целые массивы, приводятся к общей форме.
    """
    arrays = [np.atleast_1d(np.asarray(k, dtype=np.int64)).astype(np.uint64) for k in keys]
    arrays = np.broadcast_arrays(*arrays)
    h = np.full(arrays[0].shape, np.uint64(seed & _MASK64), dtype=np.uint64)
    for key in arrays:
        h = _mix(h + _GOLDEN + key)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class DomainPixels:
    """Затеняемые пиксели сетки уровня и соответствующие им пиксели полного разрешения"""

    ex: NDArray[np.int64]
    ey: NDArray[np.int64]
    fx: NDArray[np.int64]
    fy: NDArray[np.int64]
    scale: int

    def __len__(self) -> int:
        return len(self.ex)

    def chunks(self, samples: int) -> Iterator[slice]:
        step = max(1, CHUNK_ELEMENTS // max(samples, 1))
        for start in range(0, len(self), step):
            yield slice(start, min(start + step, len(self)))


def domain_pixels(g: GBuffer, domain: Image2D) -> DomainPixels:
    """Пиксели трафарета, попавшие на геометрию; грубые центры берут ближайший пиксель G-буфера"""
    if domain.width > g.width or domain.height > g.height:
        raise ContractViolation("Трафарет больше G-буфера")
    ey, ex = np.nonzero(domain.data)
    fx = np.minimum(((ex + 0.5) * g.width / domain.width).astype(np.int64), g.width - 1)
    fy = np.minimum(((ey + 0.5) * g.height / domain.height).astype(np.int64), g.height - 1)
    keep = g.valid.data[fy, fx]
    return DomainPixels(ex[keep], ey[keep], fx[keep], fy[keep], scale=max(1, g.width // domain.width))


def empty_layer(domain: Image2D) -> np.ndarray:
    return np.zeros((domain.height, domain.width, 3))


def tangent_frame(n: NDArray[np.float64]) -> tuple[NDArray, NDArray]:
    helper = np.where(np.abs(n[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    t = np.cross(helper, n)
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    return t, np.cross(n, t)
