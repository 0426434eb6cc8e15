from __future__ import annotations

import asyncio
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import colorlog
import numpy as np

import config
from multires.core.errors import ContractViolation
from multires.core.image import Image2D
from multires.effects import evaluate, needs_shadow_map
from multires.effects.base import EffectKind, ShadingInputs
from multires.mask.edges import EdgeImage, build_edge_image, full_edge_image
from multires.metrics.report import LevelWork, WorkReport
from multires.pipeline.settings import PipelineConfig
from multires.pipeline.stages import bilateral_blur_masked, blend, render_level
from multires.pyramid.levels import DIVISORS, LevelConfig, MaskPyramid, build_pyramid
from multires.scene.model import Scene
from multires.scene.raster import GBuffer, ShadowMap, default_shadow_bias, rasterize_gbuffer, rasterize_shadowmap

logger = colorlog.getLogger('render')


@dataclass(frozen=True, eq=False)
class Frame:
    """Геометрия одного кадра, общая для многоуровневого и эталонного прогона"""

    scene: Scene
    gbuffer: GBuffer
    shadow_map: Optional[ShadowMap]
    inputs: ShadingInputs
    timings_ms: dict[str, float] = field(default_factory=dict)

    @property
    def width(self) -> int:
        return self.gbuffer.width

    @property
    def height(self) -> int:
        return self.gbuffer.height


@dataclass(frozen=True, eq=False)
class MultiResResult:
    image: Image2D
    work: WorkReport
    edges: EdgeImage
    pyramid: MaskPyramid
    layers: dict[int, Image2D]
    timings_ms: dict[str, float]
    frame: Frame


@dataclass(frozen=True, eq=False)
class ReferenceResult:
    image: Image2D
    work: WorkReport
    timings_ms: dict[str, float]
    frame: Frame


def _ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0


def check_resolution(width: int, height: int) -> None:
    step = DIVISORS[-1]
    if width < step or height < step or width % step or height % step:
        raise ContractViolation(f"Размер {width}x{height} должен делиться на {step}")


def _check_frame(frame: Frame, width: int, height: int) -> None:
    if (frame.width, frame.height) != (width, height):
        raise ContractViolation(f"Кадр {frame.width}x{frame.height} не совпадает с {width}x{height}")


def prepare_frame(cfg: PipelineConfig, scene: Scene, width: int, height: int) -> Frame:
    """
    Растеризовать G-буфер и, если нужно, карту теней.

    :param cfg: настройки прогона.
    :param scene: сцена.
    :param width: ширина кадра, кратная 8.
    :param height: высота кадра, кратная 8.
    """
    check_resolution(width, height)
    timings = {}

    start = time.perf_counter()
    gbuffer = rasterize_gbuffer(scene, width, height)
    timings["gbuffer"] = _ms(start)

    shadow_map = None
    if needs_shadow_map(cfg.effect) or cfg.edge_params.use_shadow_edges:
        start = time.perf_counter()
        shadow_map = rasterize_shadowmap(scene, cfg.shadow_resolution)
        timings["shadow_map"] = _ms(start)

    bias = cfg.shadow_bias
    if bias is None:
        bias = default_shadow_bias(scene, config.SHADOW_BIAS_FRACTION)
    inputs = ShadingInputs(gbuffer, shadow_map, scene.light, bias)

    # Кэши заполняются до запуска потоков
    if cfg.effect == EffectKind.SSM:
        _ = inputs.world_position
    elif cfg.effect == EffectKind.SSGI:
        _ = inputs.direct_radiance

    logger.info(f"🧱 Кадр {width}x{height}: покрыто {int(gbuffer.valid.data.sum())} пикселей")
    return Frame(scene=scene, gbuffer=gbuffer, shadow_map=shadow_map, inputs=inputs, timings_ms=timings)


def reference_samples(cfg: PipelineConfig, frame: Frame) -> int:
    return cfg.effect_params.sample_count * int(frame.gbuffer.valid.data.sum())


def build_masks(cfg: PipelineConfig, frame: Frame, timings: Optional[dict[str, float]] = None) -> tuple[EdgeImage, MaskPyramid]:
    """Границы кадра и проверенная пирамида масок"""
    timings = {} if timings is None else timings
    start = time.perf_counter()
    if cfg.force_full_edges:
        edges = full_edge_image(frame.gbuffer)
    else:
        edges = build_edge_image(frame.gbuffer, frame.shadow_map, cfg.edge_params, frame.inputs.shadow_bias)
    timings["edges"] = _ms(start)

    start = time.perf_counter()
    pyramid = build_pyramid(edges, cfg.levels, cfg.blur_cutoff)
    pyramid.check_invariants()
    timings["pyramid"] = _ms(start)
    coverage = int(edges.mask.data.sum()) / edges.mask.data.size
    logger.info(f"🧩 Границы: {coverage:.1%} пикселей, уровни {pyramid.enabled}")
    return edges, pyramid


def _render_task(cfg: PipelineConfig, level: LevelConfig, pyramid: MaskPyramid, inputs: ShadingInputs):
    start = time.perf_counter()
    output = render_level(cfg, level, pyramid, inputs)
    layer = output.layer
    if cfg.blurs_layers:
        layer = bilateral_blur_masked(layer, pyramid.stencil(level.index), cfg.ssao_blur.variance)
    return output, layer, _ms(start)


async def run_multires_async(
    cfg: PipelineConfig,
    scene: Scene,
    width: int,
    height: int,
    frame: Optional[Frame] = None,
) -> MultiResResult:
    """Границы → пирамида → уровни в пуле потоков → смешивание"""
    check_resolution(width, height)
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=config.THREADS, thread_name_prefix="level") as pool:
        if frame is None:
            frame = await loop.run_in_executor(pool, prepare_frame, cfg, scene, width, height)
        else:
            _check_frame(frame, width, height)
        timings = dict(frame.timings_ms)

        edges, pyramid = build_masks(cfg, frame, timings)

        levels = cfg.enabled_levels
        results = await asyncio.gather(
            *(loop.run_in_executor(pool, _render_task, cfg, level, pyramid, frame.inputs) for level in levels)
        )

    layers = {}
    work = []
    for level, (output, layer, elapsed) in zip(levels, results):
        layers[level.index] = layer
        timings[f"level{level.index}"] = elapsed
        work.append(
            LevelWork(
                index=level.index,
                width=layer.width,
                height=layer.height,
                shaded_pixels=output.shaded_pixels,
                samples=output.samples_evaluated,
            )
        )
        logger.info(
            f"🎨 Уровень {level.index} ({layer.width}x{layer.height}): "
            f"{output.shaded_pixels} пикселей, {output.samples_evaluated} сэмплов, {elapsed:.1f} мс"
        )

    start = time.perf_counter()
    image = blend(pyramid, cfg.levels, layers)
    timings["blend"] = _ms(start)

    report = WorkReport.from_levels(work, reference_samples(cfg, frame))
    logger.info(f"✅ {cfg.effect.upper()}: доля работы {report.work_ratio:.4f}")
    return MultiResResult(
        image=image,
        work=report,
        edges=edges,
        pyramid=pyramid,
        layers=layers,
        timings_ms=timings,
        frame=frame,
    )


async def run_reference_async(
    cfg: PipelineConfig,
    scene: Scene,
    width: int,
    height: int,
    frame: Optional[Frame] = None,
) -> ReferenceResult:
    """Наивный рендер в полном разрешении по всем пикселям"""
    check_resolution(width, height)
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=1, thread_name_prefix="reference") as pool:
        if frame is None:
            frame = await loop.run_in_executor(pool, prepare_frame, cfg, scene, width, height)
        else:
            _check_frame(frame, width, height)
        timings = dict(frame.timings_ms)
        start = time.perf_counter()
        domain = Image2D(np.ones((height, width), dtype=bool))
        output = await loop.run_in_executor(pool, evaluate, cfg.effect, frame.inputs, cfg.effect_params, domain)
        timings["reference"] = _ms(start)

    layer = output.layer
    if cfg.blurs_layers:
        layer = bilateral_blur_masked(layer, domain, cfg.ssao_blur.variance)

    report = WorkReport.from_levels(
        [
            LevelWork(
                index=1,
                width=width,
                height=height,
                shaded_pixels=output.shaded_pixels,
                samples=output.samples_evaluated,
            )
        ],
        reference_samples(cfg, frame),
    )
    logger.info(f"📐 Эталон {width}x{height}: {output.samples_evaluated} сэмплов, {timings['reference']:.1f} мс")
    return ReferenceResult(image=layer, work=report, timings_ms=timings, frame=frame)


def run_multires(cfg: PipelineConfig, scene: Scene, width: int, height: int, frame: Optional[Frame] = None) -> MultiResResult:
    return asyncio.run(run_multires_async(cfg, scene, width, height, frame))


def run_reference(cfg: PipelineConfig, scene: Scene, width: int, height: int, frame: Optional[Frame] = None) -> ReferenceResult:
    return asyncio.run(run_reference_async(cfg, scene, width, height, frame))
