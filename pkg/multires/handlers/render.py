import argparse
from pathlib import Path

import colorlog

import config

from multires.assets.texts import Texts
from multires.effects.base import EffectKind
from multires.handlers.common import EXIT_OK, guarded, parse_flag, parse_list, parse_size
from multires.metrics.report import work_reduction
from multires.services.runs import RunSpec, execute_masks, execute_run

logger = colorlog.getLogger('cli')


def add_run_arguments(parser: argparse.ArgumentParser) -> None:
    """Флаги, общие для render, masks и sweep"""
    parser.add_argument("--scene", required=True, type=Path, help="Scene JSON file")
    parser.add_argument("--effect", required=True, choices=[e.value for e in EffectKind])
    parser.add_argument("--size", default=(640, 360), type=parse_size, help="WIDTHxHEIGHT, both divisible by 8")
    parser.add_argument("--out", default=Path("runs/latest"), type=Path, help="Output directory")
    parser.add_argument("--samples", type=int, help="Samples per pixel")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--radius", type=float, help="SSAO / SSGI radius in world units")
    parser.add_argument("--pcf-radius", type=float, help="PCF disk radius in shadow-map texels")
    parser.add_argument("--normal-threshold", type=float)
    parser.add_argument("--depth-threshold", type=float)
    parser.add_argument("--shadow-bias", type=float)
    parser.add_argument("--shadow-resolution", type=int)
    parser.add_argument("--variances", type=parse_list(float), help="Per-level σ², e.g. 0.924,-,3.696,0")
    parser.add_argument("--weights", type=parse_list(float), help="Per-level blend weights")
    parser.add_argument("--enabled", type=parse_list(parse_flag), help="Per-level on/off, e.g. 1,0,1,1")
    parser.add_argument("--no-ssao-blur", action="store_true", help="Disable the masked bilateral SSAO blur")
    parser.add_argument("--blur-variance", type=float)
    parser.add_argument("--force-full-edges", action="store_true", help="Edge mask forced to one everywhere")


def spec_from_args(args: argparse.Namespace, **extra) -> RunSpec:
    width, height = args.size
    fields = dict(
        scene=args.scene,
        effect=args.effect,
        width=width,
        height=height,
        out=args.out,
        samples=args.samples,
        seed=args.seed,
        radius=args.radius,
        pcf_radius=args.pcf_radius,
        normal_threshold=args.normal_threshold,
        depth_threshold=args.depth_threshold,
        shadow_bias=args.shadow_bias,
        shadow_resolution=args.shadow_resolution,
        variances=args.variances,
        weights=args.weights,
        enabled=args.enabled,
        ssao_blur=not args.no_ssao_blur,
        blur_variance=args.blur_variance,
        force_full_edges=args.force_full_edges,
    )
    fields.update(extra)
    return RunSpec(**fields)


async def handle_render(args: argparse.Namespace) -> int:
    async def action() -> int:
        spec = spec_from_args(
            args,
            emit_debug_masks=not args.no_debug_masks,
            emit_diff=not args.no_diff,
            reference_only=args.reference_only,
            multires_only=args.multires_only,
            enhancement=args.enhancement,
        )
        logger.info(f"{Texts.RUN_STARTED}: {spec.effect} {spec.width}x{spec.height}, {spec.scene}")
        outcome = await execute_run(spec)
        report = outcome.report
        quality = report.quality
        logger.info(
            Texts.run_summary(
                effect=report.effect,
                width=spec.width,
                height=spec.height,
                samples=report.samples,
                work_ratio=report.work.work_ratio if report.work else None,
                reduction=work_reduction(report.work) if report.work else None,
                rms=quality.rms if quality else None,
                max_abs=quality.max_abs if quality else None,
                out_dir=spec.out,
            )
        )
        return EXIT_OK

    return await guarded(action)


async def handle_masks(args: argparse.Namespace) -> int:
    async def action() -> int:
        spec = spec_from_args(args)
        outcome = await execute_masks(spec)
        logger.info(f"{Texts.MASKS_DONE}: {len(outcome.written)} файлов в {spec.out}")
        return EXIT_OK

    return await guarded(action)


def register(subparsers) -> None:
    render = subparsers.add_parser("render", help="Multi-resolution and reference render with report.json")
    add_run_arguments(render)
    render.add_argument("--enhancement", type=float, default=config.DIFF_ENHANCEMENT, help="Difference image gain")
    render.add_argument("--no-debug-masks", action="store_true")
    render.add_argument("--no-diff", action="store_true")
    modes = render.add_mutually_exclusive_group()
    modes.add_argument("--reference-only", action="store_true")
    modes.add_argument("--multires-only", action="store_true")
    render.set_defaults(handler=handle_render)

    masks = subparsers.add_parser("masks", help="Edge image and mask pyramid only")
    add_run_arguments(masks)
    masks.set_defaults(handler=handle_masks)
