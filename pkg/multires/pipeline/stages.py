import numpy as np
from scipy.ndimage import correlate1d

from multires.core.errors import ContractViolation
from multires.core.image import Image2D, upsample
from multires.effects import evaluate
from multires.effects.base import EffectOutput, ShadingInputs
from multires.pipeline.settings import PipelineConfig
from multires.pyramid.levels import LevelConfig, MaskPyramid, gaussian_kernel


def render_level(cfg: PipelineConfig, level: LevelConfig, pyramid: MaskPyramid, inputs: ShadingInputs) -> EffectOutput:
    """
    Отрисовать эффект на одном уровне только внутри его трафарета.

    :param cfg: настройки прогона.
    :param level: включённый уровень.
    :param pyramid: пирамида масок кадра.
    :param inputs: G-буфер, карта теней и свет.
    :return: слой уровня, вне трафарета нули.
    """
    if not level.enabled or level.index not in pyramid.levels:
        raise ContractViolation(f"Уровень {level.index} выключен")
    return evaluate(cfg.effect, inputs, cfg.effect_params, pyramid.stencil(level.index))


def _separable(data: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = correlate1d(data, kernel, axis=1, mode="nearest")
    return correlate1d(out, kernel, axis=0, mode="nearest")


def bilateral_blur_masked(layer: Image2D, stencil: Image2D, variance: float) -> Image2D:
    """Гауссово среднее только по соседям из трафарета с перенормировкой; вне трафарета 0"""
    if variance < 0:
        raise ContractViolation(f"Отрицательная дисперсия: {variance}")
    inside = stencil.data.astype(bool)
    weights = inside.astype(np.float64)
    mask = inside[..., None] if layer.data.ndim == 3 else inside
    values = np.where(mask, layer.as_float(), 0.0)
    if variance == 0:
        return Image2D(values)

    kernel = gaussian_kernel(variance)
    num = _separable(values, kernel)
    den = _separable(weights, kernel)
    keep = inside & (den > 0.0)
    out = np.zeros_like(values)
    if layer.data.ndim == 3:
        out[keep] = num[keep] / den[keep][:, None]
    else:
        out[keep] = num[keep] / den[keep]
    return Image2D(out)


def upsample_in_stencil(layer: Image2D, stencil: Image2D, width: int, height: int) -> np.ndarray:
    """
    Билинейно растянуть слой, учитывая только тексели трафарета.

    upsample(c·s) / upsample(s) там, где upsample(s) > 0, иначе 0.
    Тексели вне трафарета не несут значения и не подмешиваются к соседям.
    """
    inside = stencil.data.astype(bool)
    if inside.all():
        return upsample(layer, width, height).as_float()
    mask = inside[..., None] if layer.data.ndim == 3 else inside
    num = upsample(Image2D(np.where(mask, layer.as_float(), 0.0)), width, height).as_float()
    den = upsample(Image2D(inside.astype(np.float64)), width, height).as_float()
    keep = den > 0.0
    out = np.zeros_like(num)
    if num.ndim == 3:
        out[keep] = num[keep] / den[keep][:, None]
    else:
        out[keep] = num[keep] / den[keep]
    return out


def blend(pyramid: MaskPyramid, levels: list[LevelConfig], layers: dict[int, Image2D]) -> Image2D:
    """
    Смешать уровни от самого грубого к самому мелкому.

    c'_i = c_i * min(a_i w_i, 1) + c'_{i-1} * (1 - min(a_i w_i, 1)), всё в полном разрешении.
    """
    order = sorted((level for level in levels if level.enabled), key=lambda level: level.index, reverse=True)
    missing = [level.index for level in order if level.index not in layers]
    if missing:
        raise ContractViolation(f"Нет слоёв для уровней {missing}")

    width, height = pyramid.width, pyramid.height
    composite = upsample_in_stencil(layers[order[0].index], pyramid.stencil(order[0].index), width, height).copy()
    for level in order[1:]:
        c = upsample_in_stencil(layers[level.index], pyramid.stencil(level.index), width, height)
        alpha = upsample(pyramid.alpha(level.index), width, height).as_float()
        t = np.minimum(alpha * level.weight, 1.0)
        if c.ndim == 3:
            t = t[..., None]
        composite = c * t + composite * (1.0 - t)
    return Image2D(composite)
