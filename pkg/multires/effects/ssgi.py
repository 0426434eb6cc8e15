import numpy as np

import config
from multires.core.image import Image2D
from multires.effects.base import EffectOutput, EffectParams, ShadingInputs, domain_pixels, empty_layer, hash_uniform
from multires.scene.model import DirectionalLight
from multires.scene.raster import GBuffer, ShadowMap

_STREAM_RADIUS, _STREAM_ANGLE = 20, 21
GOLDEN_FRACTION = 0.6180339887498949


def _gather(inputs: ShadingInputs, p: EffectParams, domain: Image2D) -> EffectOutput:
    g = inputs.gbuffer
    pixels = domain_pixels(g, domain)
    layer = empty_layer(domain)
    n_samples = p.sample_count
    sample_ids = np.arange(n_samples)[None, :]
    epsilon = config.SSGI_EPSILON * p.radius * p.radius
    radiance = inputs.direct_radiance
    positions = g.position.data
    normals = g.normal.data
    valid = g.valid.data

    for part in pixels.chunks(n_samples):
        fx, fy = pixels.fx[part], pixels.fy[part]
        p_x = positions[fy, fx]
        n_x = normals[fy, fx]

        # Радиус сбора в пикселях для глубины данного пикселя
        radius_px = p.radius * g.focal_pixels / np.maximum(-p_x[:, 2], g.camera.near)
        keys = (fx[:, None], fy[:, None], sample_ids, pixels.scale)
        # Спираль с равными площадями колец, повёрнутая на случайный угол пикселя
        u1 = hash_uniform(p.rng_seed, *keys, _STREAM_RADIUS)
        spin = hash_uniform(p.rng_seed, fx, fy, pixels.scale, _STREAM_ANGLE)
        rho = radius_px[:, None] * np.sqrt((sample_ids + u1) / n_samples)
        theta = 2.0 * np.pi * (sample_ids * GOLDEN_FRACTION + spin[:, None])
        sx = np.floor(fx[:, None] + 0.5 + rho * np.cos(theta)).astype(np.int64)
        sy = np.floor(fy[:, None] + 0.5 + rho * np.sin(theta)).astype(np.int64)
        inside = (sx >= 0) & (sx < g.width) & (sy >= 0) & (sy < g.height)
        sx, sy = np.clip(sx, 0, g.width - 1), np.clip(sy, 0, g.height - 1)
        usable = inside & valid[sy, sx]

        d = positions[sy, sx] - p_x[:, None, :]
        dist2 = np.einsum("ijk,ijk->ij", d, d)
        omega = d / np.maximum(np.sqrt(dist2), 1e-12)[..., None]
        cos_x = np.clip(np.einsum("ik,ijk->ij", n_x, omega), 0.0, None)
        cos_y = np.clip(-np.einsum("ijk,ijk->ij", normals[sy, sx], omega), 0.0, None)
        weight = np.where(usable, cos_x * cos_y / (epsilon + dist2), 0.0)

        gathered = np.einsum("ij,ijk->ik", weight, radiance[sy, sx])
        indirect = g.albedo.data[fy, fx] * gathered * (p.radius * p.radius / n_samples)
        layer[pixels.ey[part], pixels.ex[part]] = np.clip(indirect, 0.0, 1.0)

    return EffectOutput(Image2D(layer), n_samples * len(pixels), len(pixels))


def eval_ssgi(
    g: GBuffer,
    sm: ShadowMap,
    light: DirectionalLight,
    p: EffectParams,
    domain: Image2D,
    bias: float,
) -> EffectOutput:
    """
    Один отскок: сбор прямо освещённых пикселей внутри радиуса на экране.

    Записывается только непрямая часть.

    :param g: G-буфер кадра.
    :param sm: карта теней для прямого света источников.
    :param light: направленный источник.
    :param p: радиус, число сэмплов и зерно.
    :param domain: трафарет уровня; сэмплы берутся только в его пикселях.
    :param bias: смещение глубины при проверке тени.
    :return: слой непрямого света и счётчики работы.
    """
    return _gather(ShadingInputs(g, sm, light, bias), p, domain)


def ssgi(inputs: ShadingInputs, p: EffectParams, domain: Image2D) -> EffectOutput:
    return _gather(inputs, p, domain)
