from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, NonNegativeFloat, model_validator

import config
from multires.core.errors import ContractViolation
from multires.core.image import Image2D
from multires.scene.raster import GBuffer, ShadowMap, shadow_test_hard

logger = logging.getLogger(__name__)


class Combine(StrEnum):
    MAX = "max"
    MIN = "min"


class EdgeParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    normal_threshold: NonNegativeFloat = config.NORMAL_THRESHOLD
    # None: доля DEPTH_THRESHOLD_FRACTION от диапазона глубин кадра
    depth_threshold: Optional[NonNegativeFloat] = None
    use_normal_edges: bool = True
    use_depth_edges: bool = True
    use_shadow_edges: bool = False
    combine: Combine = Combine.MAX

    @model_validator(mode="after")
    def check_sources(self):
        if not (self.use_normal_edges or self.use_depth_edges or self.use_shadow_edges):
            raise ValueError("нужен хотя бы один источник границ")
        return self

    @classmethod
    def for_effect(cls, effect: str, **overrides) -> EdgeParams:
        """Для SSM добавляются границы жёсткой тени; границы геометрии включены всегда"""
        return cls(use_shadow_edges=str(effect) == "ssm", **overrides)

    def resolve_depth_threshold(self, g: GBuffer) -> float:
        if self.depth_threshold is not None:
            return self.depth_threshold
        depth = g.depth.data[g.valid.data]
        if depth.size == 0:
            return 0.0
        span = float(depth.max() - depth.min())
        # Плоская сцена без перепада глубин: берём долю от самой глубины
        span = max(span, 1e-3 * float(depth.max()))
        return config.DEPTH_THRESHOLD_FRACTION * span


@dataclass(frozen=True, eq=False)
class EdgeImage:
    mask: Image2D
    normal: Optional[Image2D] = None
    depth: Optional[Image2D] = None
    shadow: Optional[Image2D] = None

    def sources(self) -> dict[str, Image2D]:
        return {name: img for name, img in (("normal", self.normal), ("depth", self.depth), ("shadow", self.shadow)) if img is not None}


def _validity_edges(valid: np.ndarray, forward_only: bool) -> np.ndarray:
    """Пиксели рядом с пикселем другой валидности"""
    edge = np.zeros_like(valid, dtype=bool)
    dx = valid[:, :-1] != valid[:, 1:]
    dy = valid[:-1, :] != valid[1:, :]
    edge[:, :-1] |= dx
    edge[:-1, :] |= dy
    if not forward_only:
        edge[:, 1:] |= dx
        edge[1:, :] |= dy
    return edge


def normal_edges(g: GBuffer, threshold: float) -> Image2D:
    """Прямые разности нормали, метрика 1 - n(x,y)·n(сосед)"""
    n = g.normal.data
    valid = g.valid.data
    edge = np.zeros(valid.shape, dtype=bool)

    both_x = valid[:, :-1] & valid[:, 1:]
    dot_x = np.einsum("ijk,ijk->ij", n[:, :-1], n[:, 1:])
    edge[:, :-1] |= both_x & (1.0 - dot_x > threshold)

    both_y = valid[:-1, :] & valid[1:, :]
    dot_y = np.einsum("ijk,ijk->ij", n[:-1, :], n[1:, :])
    edge[:-1, :] |= both_y & (1.0 - dot_y > threshold)

    edge |= _validity_edges(valid, forward_only=True)
    return Image2D(edge)


def depth_edges(g: GBuffer, threshold: float) -> Image2D:
    """Вторая разность линейной глубины, шаблон 1-2-1 по каждой оси"""
    d = g.depth.data
    valid = g.valid.data
    edge = np.zeros(valid.shape, dtype=bool)

    # Внутренние пиксели по каждой оси, на границе кадра эта ось не проверяется
    lap_x = np.abs(d[:, :-2] - 2.0 * d[:, 1:-1] + d[:, 2:])
    ok_x = valid[:, :-2] & valid[:, 1:-1] & valid[:, 2:]
    edge[:, 1:-1] |= ok_x & (lap_x > threshold)

    lap_y = np.abs(d[:-2, :] - 2.0 * d[1:-1, :] + d[2:, :])
    ok_y = valid[:-2, :] & valid[1:-1, :] & valid[2:, :]
    edge[1:-1, :] |= ok_y & (lap_y > threshold)

    edge |= _validity_edges(valid, forward_only=False)
    return Image2D(edge)


def shadow_edges(g: GBuffer, sm: ShadowMap, bias: float) -> Image2D:
    """Разности жёсткой тени по одной выборке; смещение растёт с наклоном, как у PCF"""
    valid = g.valid.data
    ndl = np.clip(g.world_normal().data @ -sm.forward, 0.0, None)
    lit = np.asarray(shadow_test_hard(sm, g.world_position().data, bias, ndl=ndl))
    edge = np.zeros(valid.shape, dtype=bool)
    both_x = valid[:, :-1] & valid[:, 1:]
    both_y = valid[:-1, :] & valid[1:, :]
    edge[:, :-1] |= both_x & (lit[:, :-1] != lit[:, 1:])
    edge[:-1, :] |= both_y & (lit[:-1, :] != lit[1:, :])
    return Image2D(edge)


def build_edge_image(
    g: GBuffer,
    sm: Optional[ShadowMap],
    params: EdgeParams,
    shadow_bias: float = 0.0,
) -> EdgeImage:
    """
    Собрать полноразмерное изображение границ.

    :param g: G-буфер кадра.
    :param sm: карта теней, обязательна при use_shadow_edges.
    :param params: пороги и включённые источники.
    :param shadow_bias: смещение для жёсткой проверки тени.
    """
    if params.use_shadow_edges and sm is None:
        raise ContractViolation("Для границ теней нужна карта теней")

    channels = {}
    if params.use_normal_edges:
        channels["normal"] = normal_edges(g, params.normal_threshold)
    if params.use_depth_edges:
        channels["depth"] = depth_edges(g, params.resolve_depth_threshold(g))
    if params.use_shadow_edges:
        channels["shadow"] = shadow_edges(g, sm, shadow_bias)

    stack = np.stack([c.data for c in channels.values()])
    mask = stack.all(axis=0) if params.combine == Combine.MIN else stack.any(axis=0)
    logger.debug(f"Границы: {int(mask.sum())} пикселей из {mask.size} ({', '.join(channels)})")
    return EdgeImage(mask=Image2D(mask.astype(np.float64)), **channels)


def full_edge_image(g: GBuffer) -> EdgeImage:
    """Маска границ из одних единиц; многоуровневый путь превращается в эталон"""
    return EdgeImage(mask=Image2D.filled(g.width, g.height, 1.0))


def edge_debug_rgb(edge: EdgeImage) -> Image2D:
    """Красный - нормали, зелёный - глубина, синий - тень; совпавшие нормаль и глубина дают жёлтый"""
    h, w = edge.mask.height, edge.mask.width
    rgb = np.zeros((h, w, 3))
    for channel, source in enumerate((edge.normal, edge.depth, edge.shadow)):
        if source is not None:
            rgb[..., channel] = source.data
    if edge.normal is None and edge.depth is None and edge.shadow is None:
        rgb[:] = edge.mask.data[..., None]
    return Image2D(rgb)
