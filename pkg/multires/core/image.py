from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from typing import Any

import numpy as np
from numpy.typing import NDArray

from multires.core.errors import ContractViolation

Vec3 = NDArray[np.float64]


def vec3(x: float, y: float, z: float) -> Vec3:
    """Конечный 3-вектор"""
    v = np.array([x, y, z], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ContractViolation(f"Некорректный вектор: {v}")
    return v


def normalize(v: NDArray[np.float64], axis: int = -1) -> NDArray[np.float64]:
    length = np.linalg.norm(v, axis=axis, keepdims=True)
    return v / np.maximum(length, 1e-300)


class Addressing(StrEnum):
    CLAMP_TO_EDGE = "clamp-to-edge"


class Filtering(StrEnum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"


@dataclass(frozen=True)
class SamplerPolicy:
    addressing: Addressing = Addressing.CLAMP_TO_EDGE
    filtering: Filtering = Filtering.BILINEAR


BILINEAR = SamplerPolicy()
NEAREST = SamplerPolicy(filtering=Filtering.NEAREST)


@dataclass(frozen=True, eq=False)
class Image2D:
    """
    Прямоугольная сетка сэмплов, строки подряд.

    data имеет форму (height, width) для скаляров и (height, width, C) для векторов.
    Массив после создания доступен только на чтение.
    """

    data: NDArray[Any]

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim not in (2, 3) or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ContractViolation(f"Некорректная форма изображения: {arr.shape}")
        if arr is self.data and arr.flags.writeable:
            arr = arr.view()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.width, self.height

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]

    def __getitem__(self, xy: tuple[int, int]) -> Any:
        x, y = xy
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"Пиксель ({x}, {y}) вне изображения {self.width}x{self.height}")
        return self.data[y, x]

    def at(self, x: int, y: int) -> Any:
        return self[x, y]

    @classmethod
    def filled(cls, width: int, height: int, value, dtype=np.float64) -> Image2D:
        value = np.asarray(value, dtype=dtype)
        return cls(np.broadcast_to(value, (height, width) + value.shape).copy())

    def as_float(self) -> NDArray[np.float64]:
        return self.data.astype(np.float64, copy=False)


def _axis_taps(positions: NDArray[np.float64], size: int):
    """Индексы и веса двух ближайших центров текселей, clamp-to-edge"""
    base = np.floor(positions)
    frac = positions - base
    i0 = np.clip(base.astype(np.int64), 0, size - 1)
    i1 = np.clip(base.astype(np.int64) + 1, 0, size - 1)
    return i0, i1, frac


def _bilinear_gather(data: NDArray, px: NDArray[np.float64], py: NDArray[np.float64]) -> NDArray[np.float64]:
    h, w = data.shape[:2]
    x0, x1, fx = _axis_taps(px, w)
    y0, y1, fy = _axis_taps(py, h)
    src = data.astype(np.float64, copy=False)
    if src.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    top = src[y0, x0] * (1.0 - fx) + src[y0, x1] * fx
    bottom = src[y1, x0] * (1.0 - fx) + src[y1, x1] * fx
    return top * (1.0 - fy) + bottom * fy


def sample_bilinear(img: Image2D, u: float, v: float):
    """Билинейная выборка в нормированных координатах; центр текселя (x, y) в ((x+0.5)/w, (y+0.5)/h)"""
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ContractViolation(f"Некорректные координаты выборки: u={u}, v={v}")
    px = np.array([u * img.width - 0.5])
    py = np.array([v * img.height - 0.5])
    value = _bilinear_gather(img.data, px, py)[0]
    return float(value) if img.data.ndim == 2 else value


def upsample(img: Image2D, target_w: int, target_h: int, policy: SamplerPolicy = BILINEAR) -> Image2D:
    """
    Растянуть изображение, output(x, y) берётся в точке ((x+0.5)/target_w, (y+0.5)/target_h).

    :param img: исходное изображение.
    :param target_w: ширина результата, не меньше исходной.
    :param target_h: высота результата, не меньше исходной.
    :param policy: билинейная выборка или ближайший тексель, адресация clamp-to-edge.
    """
    if target_w < img.width or target_h < img.height:
        raise ContractViolation(
            f"upsample не уменьшает изображения: {img.width}x{img.height} -> {target_w}x{target_h}"
        )
    nearest = policy.filtering == Filtering.NEAREST
    if (target_w, target_h) == img.shape:
        return Image2D(img.data.copy() if nearest else img.as_float().copy())
    # (x+0.5)*w/W - 0.5 считается без деления на W заранее, чтобы центры текселей попадали точно
    px = (np.arange(target_w) + 0.5) * img.width / target_w - 0.5
    py = (np.arange(target_h) + 0.5) * img.height / target_h - 0.5
    if nearest:
        ix = np.clip(np.floor(px + 0.5).astype(np.int64), 0, img.width - 1)
        iy = np.clip(np.floor(py + 0.5).astype(np.int64), 0, img.height - 1)
        return Image2D(img.data[np.ix_(iy, ix)])
    gx, gy = np.meshgrid(px, py)
    return Image2D(_bilinear_gather(img.data, gx, gy))


def upsample_nearest(img: Image2D, factor: int) -> Image2D:
    """Повтор блоками, для отладочных картинок трафаретов"""
    return upsample(img, img.width * factor, img.height * factor, NEAREST)
