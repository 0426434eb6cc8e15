import numpy as np

from multires.core.image import Image2D
from multires.effects.base import EffectOutput, EffectParams, ShadingInputs, domain_pixels, empty_layer, hash_uniform, tangent_frame
from multires.scene.raster import GBuffer

# Номера потоков случайных чисел
_STREAM_RADIUS, _STREAM_PHI, _STREAM_SCALE = 0, 1, 2


def eval_ssao(g: GBuffer, p: EffectParams, domain: Image2D) -> EffectOutput:
    """SSAO по полусфере: доля из N сэмплов, закрытых глубиной G-буфера"""
    pixels = domain_pixels(g, domain)
    layer = empty_layer(domain)
    n_samples = p.sample_count
    sample_ids = np.arange(n_samples)[None, :]
    bias = p.ssao_bias * p.radius
    depth_buf = g.depth.data
    valid_buf = g.valid.data

    for part in pixels.chunks(n_samples):
        fx, fy = pixels.fx[part, None], pixels.fy[part, None]
        position = g.position.data[pixels.fy[part], pixels.fx[part]]
        normal = g.normal.data[pixels.fy[part], pixels.fx[part]]
        tangent, bitangent = tangent_frame(normal)

        keys = (fx, fy, sample_ids, pixels.scale)
        u1 = hash_uniform(p.rng_seed, *keys, _STREAM_RADIUS)
        u2 = hash_uniform(p.rng_seed, *keys, _STREAM_PHI)
        u3 = hash_uniform(p.rng_seed, *keys, _STREAM_SCALE)

        # Косинусное распределение по полусфере, ближе к точке гуще
        r = np.sqrt(u1)
        phi = 2.0 * np.pi * u2
        lx, ly, lz = r * np.cos(phi), r * np.sin(phi), np.sqrt(np.clip(1.0 - u1, 0.0, None))
        scale = p.radius * (0.1 + 0.9 * u3 * u3)
        offset = (
            tangent[:, None, :] * lx[..., None]
            + bitangent[:, None, :] * ly[..., None]
            + normal[:, None, :] * lz[..., None]
        ) * scale[..., None]
        samples = position[:, None, :] + offset

        sx, sy, sample_depth = g.project(samples)
        ix, iy = np.floor(sx).astype(np.int64), np.floor(sy).astype(np.int64)
        on_screen = (ix >= 0) & (ix < g.width) & (iy >= 0) & (iy < g.height) & (sample_depth > g.camera.near)
        ix, iy = np.clip(ix, 0, g.width - 1), np.clip(iy, 0, g.height - 1)
        scene_depth = depth_buf[iy, ix]
        occluded = (
            on_screen
            & valid_buf[iy, ix]
            & (scene_depth < sample_depth - bias)
            & (sample_depth - scene_depth < p.radius)
        )
        visibility = 1.0 - occluded.mean(axis=1)
        layer[pixels.ey[part], pixels.ex[part]] = visibility[:, None]

    return EffectOutput(Image2D(layer), n_samples * len(pixels), len(pixels))


def ssao(inputs: ShadingInputs, p: EffectParams, domain: Image2D) -> EffectOutput:
    return eval_ssao(inputs.gbuffer, p, domain)
