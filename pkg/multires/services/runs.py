from __future__ import annotations

import asyncio
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import colorlog
from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveFloat, PositiveInt, ValidationError, model_validator

import config
from multires.assets.texts import Texts
from multires.core.errors import ContractViolation
from multires.effects.base import EffectKind, EffectParams
from multires.mask.edges import EdgeParams, edge_debug_rgb
from multires.metrics.report import QualitySummary, RunReport, rms_error, work_reduction
from multires.pipeline import PipelineConfig, SsaoBlur, build_masks, prepare_frame, run_multires_async, run_reference_async
from multires.pipeline.runner import Frame, MultiResResult, check_resolution
from multires.pyramid.levels import DIVISORS, LevelConfig, MaskPyramid, default_levels
from multires.scene.model import Scene, SceneOverrides, load_scene
from multires.services.export import export, save_image

logger = colorlog.getLogger('cli')


class RunSpec(BaseModel):
    """Один запуск из командной строки; None означает «взять из сцены или по умолчанию»"""

    model_config = ConfigDict(extra="forbid")

    scene: Path
    effect: EffectKind
    width: PositiveInt
    height: PositiveInt
    out: Path
    samples: Optional[PositiveInt] = None
    seed: Optional[int] = None
    radius: Optional[PositiveFloat] = None
    pcf_radius: Optional[PositiveFloat] = None
    normal_threshold: Optional[NonNegativeFloat] = None
    depth_threshold: Optional[NonNegativeFloat] = None
    shadow_bias: Optional[NonNegativeFloat] = None
    shadow_resolution: Optional[PositiveInt] = None
    variances: Optional[list[Optional[NonNegativeFloat]]] = None
    weights: Optional[list[Optional[PositiveFloat]]] = None
    enabled: Optional[list[Optional[bool]]] = None
    ssao_blur: bool = True
    blur_variance: Optional[NonNegativeFloat] = None
    force_full_edges: bool = False
    enhancement: PositiveFloat = config.DIFF_ENHANCEMENT
    emit_debug_masks: bool = True
    emit_diff: bool = True
    reference_only: bool = False
    multires_only: bool = False

    @model_validator(mode="after")
    def check_modes(self):
        if self.reference_only and self.multires_only:
            raise ValueError("reference_only и multires_only взаимоисключающие")
        return self


def _first(*values):
    for value in values:
        if value is not None:
            return value
    return None


def _apply_levels(levels: list[LevelConfig], source) -> list[LevelConfig]:
    """Переопределения по уровням; None оставляет текущее значение"""
    columns = {"variance": source.variances, "weight": source.weights, "enabled": source.enabled}
    result = []
    for level in levels:
        data = level.model_dump()
        for key, column in columns.items():
            if column is None:
                continue
            if len(column) != len(DIVISORS):
                raise ContractViolation(f"Ожидалось {len(DIVISORS)} значений для {key}, получено {len(column)}")
            if column[level.index - 1] is not None:
                data[key] = column[level.index - 1]
        try:
            result.append(LevelConfig(**data))
        except ValidationError as e:
            raise ContractViolation(f"Некорректный уровень {level.index}: {e}") from e
    return result


def build_config(spec: RunSpec, scene: Scene, samples: Optional[int] = None) -> PipelineConfig:
    """
    Собрать настройки прогона: значения по умолчанию < блок overrides сцены < флаги запуска.

    :param spec: параметры запуска.
    :param scene: загруженная сцена.
    :param samples: число сэмплов поверх всех источников (для sweep).
    """
    scene_cfg: SceneOverrides = scene.overrides
    effect = spec.effect

    params = {
        "sample_count": _first(samples, spec.samples, scene_cfg.samples, config.DEFAULT_SAMPLES[effect]),
        "radius": _first(spec.radius, scene_cfg.radius),
        "pcf_radius": _first(spec.pcf_radius, scene_cfg.pcf_radius),
        "rng_seed": _first(spec.seed, scene_cfg.seed),
    }
    edges = {
        "normal_threshold": _first(spec.normal_threshold, scene_cfg.normal_threshold),
        "depth_threshold": _first(spec.depth_threshold, scene_cfg.depth_threshold),
    }
    levels = _apply_levels(_apply_levels(default_levels(effect), scene_cfg), spec)

    return PipelineConfig.for_effect(
        effect,
        effect_params=EffectParams.for_effect(effect, **{k: v for k, v in params.items() if v is not None}),
        edge_params=EdgeParams.for_effect(effect, **{k: v for k, v in edges.items() if v is not None}),
        levels=levels,
        ssao_blur=SsaoBlur(
            enabled=spec.ssao_blur,
            variance=_first(spec.blur_variance, config.SSAO_BLUR_VARIANCE),
        ),
        shadow_resolution=_first(spec.shadow_resolution, scene_cfg.shadow_resolution, config.SHADOW_RESOLUTION),
        shadow_bias=_first(spec.shadow_bias, scene_cfg.shadow_bias),
        force_full_edges=spec.force_full_edges,
    )


@dataclass
class RunOutcome:
    report: RunReport
    written: list[Path] = field(default_factory=list)


def export_masks(result_dir: Path, edges, pyramid: MaskPyramid) -> list[Path]:
    """edges.png, pyramid.png и альфа / трафарет каждого уровня"""
    written = export(edge_debug_rgb(edges), result_dir, "edges")
    written += export(pyramid.composite(), result_dir, "pyramid", sidecar=False)
    for index in pyramid.enabled:
        written += export(pyramid.alpha(index), result_dir, f"level{index}_alpha")
        written += export(pyramid.stencil(index), result_dir, f"level{index}_stencil", sidecar=False)
    return written


def _export_multires(spec: RunSpec, result: MultiResResult) -> list[Path]:
    written = export(result.image, spec.out, "multires")
    written.append(save_image(result.image, spec.out / "multires.ppm"))
    if spec.emit_debug_masks:
        written += export_masks(spec.out, result.edges, result.pyramid)
        for index, layer in result.layers.items():
            written += export(layer, spec.out, f"level{index}_layer", sidecar=False)
    return written


async def _frame(cfg: PipelineConfig, scene: Scene, width: int, height: int) -> Frame:
    check_resolution(width, height)
    return await asyncio.to_thread(prepare_frame, cfg, scene, width, height)


async def execute_run(spec: RunSpec) -> RunOutcome:
    """
    Выполнить render: многоуровневый и/или эталонный прогон, записать изображения и report.json.

    :param spec: параметры запуска.
    :return: отчёт и список записанных файлов.
    """
    scene = load_scene(spec.scene)
    cfg = build_config(spec, scene)
    frame = await _frame(cfg, scene, spec.width, spec.height)
    spec.out.mkdir(parents=True, exist_ok=True)

    outcome = RunOutcome(
        report=RunReport(
            effect=str(cfg.effect),
            resolution=(spec.width, spec.height),
            samples=cfg.effect_params.sample_count,
        )
    )
    timings = {f"frame.{k}": v for k, v in frame.timings_ms.items()}

    multi = None
    if not spec.reference_only:
        multi = await run_multires_async(cfg, scene, spec.width, spec.height, frame)
        outcome.written += _export_multires(spec, multi)
        outcome.report.work = multi.work
        timings.update({f"multires.{k}": v for k, v in multi.timings_ms.items() if k not in frame.timings_ms})

    reference = None
    if not spec.multires_only:
        reference = await run_reference_async(cfg, scene, spec.width, spec.height, frame)
        outcome.written += export(reference.image, spec.out, "reference")
        if outcome.report.work is None:
            outcome.report.work = reference.work
        timings.update({f"reference.{k}": v for k, v in reference.timings_ms.items() if k not in frame.timings_ms})

    if multi is not None and reference is not None:
        quality = rms_error(multi.image, reference.image, spec.enhancement)
        outcome.report.quality = quality.summary()
        if spec.emit_diff:
            outcome.written += export(quality.difference, spec.out, "diff")

    outcome.report.timings_ms = timings
    report_path = spec.out / "report.json"
    outcome.report.save(report_path)
    outcome.written.append(report_path)
    logger.info(f"📝 Отчёт: {report_path}")
    return outcome


async def execute_masks(spec: RunSpec) -> RunOutcome:
    """Только границы и пирамида, без затенения"""
    scene = load_scene(spec.scene)
    cfg = build_config(spec, scene)
    frame = await _frame(cfg, scene, spec.width, spec.height)
    edges, pyramid = await asyncio.to_thread(build_masks, cfg, frame)
    spec.out.mkdir(parents=True, exist_ok=True)
    report = RunReport(
        effect=str(cfg.effect),
        resolution=(spec.width, spec.height),
        samples=cfg.effect_params.sample_count,
        timings_ms=dict(frame.timings_ms),
    )
    return RunOutcome(report=report, written=export_masks(spec.out, edges, pyramid))


class SweepPoint(BaseModel):
    model_config = ConfigDict(extra="forbid")

    samples: PositiveInt
    resolution: tuple[PositiveInt, PositiveInt]
    total_samples: int
    reference_samples: int
    work_ratio: float
    work_reduction: float
    quality: Optional[QualitySummary] = None


class SweepReport(BaseModel):
    """Содержимое sweep.json"""

    model_config = ConfigDict(extra="forbid")

    effect: str
    points: list[SweepPoint]

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=2), encoding="utf-8")


async def execute_sweep(
    spec: RunSpec,
    ladder: Optional[list[int]] = None,
    sizes: Optional[list[tuple[int, int]]] = None,
) -> SweepReport:
    """
    Прогнать эффект по лесенке сэмплов и, при желании, по лесенке разрешений.

    :param spec: базовые параметры запуска.
    :param ladder: числа сэмплов, по умолчанию лесенка эффекта из config.
    :param sizes: разрешения, по умолчанию только spec.width x spec.height.
    """
    scene = load_scene(spec.scene)
    ladder = list(ladder or config.SAMPLE_LADDERS[spec.effect])
    sizes = list(sizes or [(spec.width, spec.height)])
    points = []
    for width, height in sizes:
        frame = await _frame(build_config(spec, scene), scene, width, height)
        for samples in ladder:
            cfg = build_config(spec, scene, samples=samples)
            multi = await run_multires_async(cfg, scene, width, height, frame)
            quality = None
            if not spec.multires_only:
                reference = await run_reference_async(cfg, scene, width, height, frame)
                quality = rms_error(multi.image, reference.image).summary()
            point = SweepPoint(
                samples=samples,
                resolution=(width, height),
                total_samples=multi.work.total_samples,
                reference_samples=multi.work.reference_samples,
                work_ratio=multi.work.work_ratio,
                work_reduction=work_reduction(multi.work),
                quality=quality,
            )
            points.append(point)
            logger.info(Texts.sweep_point(samples, width, height, point.work_ratio, quality.rms if quality else None))

    report = SweepReport(effect=str(spec.effect), points=points)
    spec.out.mkdir(parents=True, exist_ok=True)
    report.save(spec.out / "sweep.json")
    return report
