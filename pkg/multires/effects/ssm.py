import numpy as np

from multires.core.image import Image2D
from multires.effects.base import EffectOutput, EffectParams, ShadingInputs, domain_pixels, empty_layer, hash_uniform
from multires.scene.model import DirectionalLight
from multires.scene.raster import NEAREST_TEXEL_REACH, GBuffer, ShadowMap, slope_scaled_bias

_STREAM_RADIUS, _STREAM_ANGLE = 10, 11


def pcf_taps(p: EffectParams) -> np.ndarray:
    """
    Диск из N случайных смещений в текселях карты теней.

    Узор один на кадр и общий для всех пикселей: у прямой границы тени полутень монотонна.
    """
    ids = np.arange(p.sample_count)
    u1 = hash_uniform(p.rng_seed, ids, _STREAM_RADIUS)
    u2 = hash_uniform(p.rng_seed, ids, _STREAM_ANGLE)
    r = p.pcf_radius * np.sqrt(u1)
    theta = 2.0 * np.pi * u2
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


def pcf_visibility(
    sm: ShadowMap,
    world_pos: np.ndarray,
    ndl: np.ndarray,
    taps: np.ndarray,
    bias: float,
) -> np.ndarray:
    """Доля освещённых PCF-выборок вокруг каждой точки"""
    tx, ty, depth = sm.project(world_pos)
    # Тап уходит от точки на свой радиус плюс округление до ближайшего текселя
    reach = (np.linalg.norm(taps, axis=1)[None, :] + NEAREST_TEXEL_REACH) * sm.texel_world
    lit = sm.lit(
        tx[:, None] + taps[None, :, 0],
        ty[:, None] + taps[None, :, 1],
        depth[:, None],
        slope_scaled_bias(bias, ndl[:, None], reach),
    )
    return lit.mean(axis=1)


def eval_ssm(
    g: GBuffer,
    sm: ShadowMap,
    light: DirectionalLight,
    p: EffectParams,
    domain: Image2D,
    bias: float,
    world_position: np.ndarray | None = None,
) -> EffectOutput:
    """
    Мягкая тень PCF: ламбертов прямой свет плюс фоновый.

    :param world_position: готовые мировые координаты G-буфера, если уже посчитаны.
    :return: слой освещённости и счётчики работы.
    """
    pixels = domain_pixels(g, domain)
    layer = empty_layer(domain)
    taps = pcf_taps(p)
    to_light = -g.to_view_direction(light.direction_array)
    world = g.world_position().data if world_position is None else world_position

    for part in pixels.chunks(p.sample_count):
        fy, fx = pixels.fy[part], pixels.fx[part]
        n = g.normal.data[fy, fx]
        ndl = np.clip(n[:, 0] * to_light[0] + n[:, 1] * to_light[1] + n[:, 2] * to_light[2], 0.0, None)
        visibility = pcf_visibility(sm, world[fy, fx], ndl, taps, bias)
        shade = light.ambient_array + (visibility * ndl)[:, None] * light.intensity_array
        layer[pixels.ey[part], pixels.ex[part]] = np.clip(g.albedo.data[fy, fx] * shade, 0.0, 1.0)

    return EffectOutput(Image2D(layer), p.sample_count * len(pixels), len(pixels))


def ssm(inputs: ShadingInputs, p: EffectParams, domain: Image2D) -> EffectOutput:
    return eval_ssm(
        inputs.gbuffer,
        inputs.shadow_map,
        inputs.light,
        p,
        domain,
        inputs.shadow_bias,
        world_position=inputs.world_position,
    )
