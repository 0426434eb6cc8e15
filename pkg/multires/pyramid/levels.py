from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, model_validator
from scipy.ndimage import correlate1d

import config
from multires.core.errors import ContractViolation
from multires.core.image import Image2D, upsample_nearest
from multires.mask.edges import EdgeImage

logger = logging.getLogger(__name__)

DIVISORS = config.LEVEL_DIVISORS


class LevelConfig(BaseModel):
    """Одна строка таблицы уровней: дисперсия размытия маски и вес смешивания"""

    model_config = ConfigDict(extra="forbid")

    index: int = Field(ge=1, le=len(DIVISORS))
    variance: NonNegativeFloat = 0.0
    weight: PositiveFloat = 1.0
    enabled: bool = True

    @property
    def divisor(self) -> int:
        return DIVISORS[self.index - 1]

    @property
    def is_coarsest(self) -> bool:
        return self.index == len(DIVISORS)

    @model_validator(mode="after")
    def check_coarsest(self):
        if self.is_coarsest and (not self.enabled or self.weight != 1.0 or self.variance != 0.0):
            raise ValueError("нижний уровень всегда включён, w = 1, σ² = 0")
        return self


def default_levels(effect: str) -> list[LevelConfig]:
    """Дисперсии и веса по эффекту; пустая строка выключает уровень"""
    rows = config.LEVEL_TABLE[str(effect)]
    levels = []
    for i, row in enumerate(rows, start=1):
        if row is None:
            levels.append(LevelConfig(index=i, enabled=False))
        else:
            variance, weight = row
            levels.append(LevelConfig(index=i, variance=variance, weight=weight))
    return levels


def downsample_max(mask: Image2D, divisor: int) -> Image2D:
    """Максимум по блокам divisor×divisor; у правого и нижнего края блоки неполные"""
    if divisor not in DIVISORS:
        raise ContractViolation(f"Недопустимый делитель: {divisor}")
    if mask.width < divisor or mask.height < divisor:
        raise ContractViolation(f"Маска {mask.width}x{mask.height} меньше делителя {divisor}")
    if divisor == 1:
        return Image2D(mask.as_float().copy())
    h, w = mask.height, mask.width
    out_h, out_w = math.ceil(h / divisor), math.ceil(w / divisor)
    padded = np.full((out_h * divisor, out_w * divisor), -np.inf)
    padded[:h, :w] = mask.data
    blocks = padded.reshape(out_h, divisor, out_w, divisor)
    return Image2D(blocks.max(axis=(1, 3)))


def gaussian_kernel(variance: float) -> np.ndarray:
    sigma = math.sqrt(variance)
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x * x) / (2.0 * variance))
    return kernel / kernel.sum()


def gaussian_blur(mask: Image2D, variance: float, cutoff: float = config.BLUR_CUTOFF) -> Image2D:
    """Сепарабельный нормированный гаусс, радиус ceil(3σ), clamp-to-edge, результат в [0, 1]"""
    if variance < 0:
        raise ContractViolation(f"Отрицательная дисперсия: {variance}")
    if variance == 0:
        return Image2D(mask.as_float().copy())
    kernel = gaussian_kernel(variance)
    out = correlate1d(mask.as_float(), kernel, axis=1, mode="nearest")
    out = correlate1d(out, kernel, axis=0, mode="nearest")
    out = np.clip(out, 0.0, 1.0)
    # Хвосты ядра ниже порога не должны раздувать трафарет
    out[out < cutoff] = 0.0
    return Image2D(out)


@dataclass(frozen=True, eq=False)
class PyramidLevel:
    config: LevelConfig
    alpha: Image2D
    stencil: Image2D

    @property
    def shaded_pixels(self) -> int:
        return int(self.stencil.data.sum())


@dataclass(frozen=True, eq=False)
class MaskPyramid:
    """Альфа-маски и трафареты включённых уровней, от мелкого к крупному"""

    width: int
    height: int
    levels: dict[int, PyramidLevel] = field(default_factory=dict)

    @property
    def enabled(self) -> list[int]:
        return sorted(self.levels)

    @property
    def coarsest(self) -> int:
        return max(self.levels)

    def alpha(self, index: int) -> Image2D:
        return self._level(index).alpha

    def stencil(self, index: int) -> Image2D:
        return self._level(index).stencil

    def _level(self, index: int) -> PyramidLevel:
        if index not in self.levels:
            raise ContractViolation(f"Уровень {index} отсутствует в пирамиде")
        return self.levels[index]

    def check_invariants(self) -> None:
        """ContractViolation, если нарушен любой инвариант разложения"""
        indices = self.enabled
        coarsest = self.levels[self.coarsest]
        if not coarsest.config.is_coarsest or not coarsest.stencil.data.all():
            raise ContractViolation("Нижний уровень должен покрывать всё изображение")
        for i in indices:
            level = self.levels[i]
            a = level.alpha.data
            if a.min() < 0.0 or a.max() > 1.0:
                raise ContractViolation(f"Альфа уровня {i} вне [0, 1]")
            if not np.array_equal(level.stencil.data, a > 0.0):
                raise ContractViolation(f"Трафарет уровня {i} не совпадает с alpha > 0")
        for fine, coarse in zip(indices, indices[1:]):
            ratio = self.levels[coarse].config.divisor // self.levels[fine].config.divisor
            covered = _block_reduce(self.levels[fine].stencil.data.astype(np.float64), ratio) > 0
            if np.any(covered & ~self.levels[coarse].stencil.data):
                raise ContractViolation(f"Уровень {fine} не вложен в уровень {coarse}")

    def composite(self) -> Image2D:
        """Карта самого мелкого уровня, покрывающего пиксель: красный, зелёный, синий для 1-3, чёрный для остальных"""
        rgb = np.zeros((self.height, self.width, 3))
        claimed = np.zeros((self.height, self.width), dtype=bool)
        for channel, index in enumerate(i for i in self.enabled if i < 4):
            level = self.levels[index]
            full = upsample_nearest(level.stencil, level.config.divisor).data[: self.height, : self.width]
            paint = full & ~claimed
            rgb[paint, channel] = 1.0
            claimed |= full
        return Image2D(rgb)


def _block_reduce(data: np.ndarray, ratio: int) -> np.ndarray:
    if ratio == 1:
        return data
    return downsample_max(Image2D(data), ratio).data


def build_pyramid(edge: EdgeImage, configs: list[LevelConfig], cutoff: float = config.BLUR_CUTOFF) -> MaskPyramid:
    """
    Разложить изображение границ на вложенные уровни.

    :param edge: полноразмерное изображение границ.
    :param configs: строки для уровней 1..4.
    :param cutoff: значения размытия ниже порога обнуляются.
    :return: пирамида масок.
    """
    by_index = {c.index: c for c in configs}
    if sorted(by_index) != list(range(1, len(DIVISORS) + 1)):
        raise ContractViolation(f"Нужны уровни 1..{len(DIVISORS)}, получены {sorted(by_index)}")
    coarsest = by_index[len(DIVISORS)]
    if not coarsest.enabled:
        raise ContractViolation("Нижний уровень не может быть выключен")

    width, height = edge.mask.width, edge.mask.height
    alphas: dict[int, np.ndarray] = {}
    for index in sorted(by_index):
        level = by_index[index]
        if not level.enabled:
            continue
        if level.is_coarsest:
            w, h = math.ceil(width / level.divisor), math.ceil(height / level.divisor)
            alphas[index] = np.ones((h, w))
        else:
            small = downsample_max(edge.mask, level.divisor)
            alphas[index] = gaussian_blur(small, level.variance, cutoff).as_float().copy()

    # Каждый мелкий уровень целиком входит во все более грубые
    enabled = sorted(alphas)
    for fine, coarse in zip(enabled, enabled[1:]):
        ratio = by_index[coarse].divisor // by_index[fine].divisor
        lifted = _block_reduce(alphas[fine], ratio)
        alphas[coarse] = np.maximum(alphas[coarse], lifted)

    pyramid = MaskPyramid(
        width=width,
        height=height,
        levels={
            i: PyramidLevel(config=by_index[i], alpha=Image2D(a), stencil=Image2D(a > 0.0))
            for i, a in alphas.items()
        },
    )
    for i in enabled:
        logger.debug(f"Уровень {i}: {pyramid.levels[i].shaded_pixels} пикселей в трафарете")
    return pyramid
