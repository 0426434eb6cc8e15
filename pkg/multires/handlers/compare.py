import argparse
from pathlib import Path

import colorlog

from multires.assets.texts import Texts
from multires.handlers.common import EXIT_OK, EXIT_REGRESSION, guarded
from multires.metrics.report import RunReport, load_report

logger = colorlog.getLogger('cli')


def _report_path(path: Path) -> Path:
    return path / "report.json" if path.is_dir() else path


def compare_reports(a: RunReport, b: RunReport) -> dict[str, tuple]:
    """Метрики двух отчётов: имя -> (значение в a, значение в b)"""
    return {
        "rms": (a.quality.rms if a.quality else None, b.quality.rms if b.quality else None),
        "max_abs": (a.quality.max_abs if a.quality else None, b.quality.max_abs if b.quality else None),
        "work_ratio": (a.work.work_ratio if a.work else None, b.work.work_ratio if b.work else None),
        "work_reduction": (a.work_reduction, b.work_reduction),
    }


def regressions(rows: dict[str, tuple], max_rms: float | None, max_work: float | None) -> list[tuple[str, float, float]]:
    limits = {"rms": max_rms, "work_ratio": max_work}
    found = []
    for name, limit in limits.items():
        a, b = rows[name]
        if limit is None or a is None or b is None:
            continue
        if b - a > limit:
            found.append((name, b - a, limit))
    return found


async def handle_compare(args: argparse.Namespace) -> int:
    async def action() -> int:
        a = load_report(_report_path(args.run_a))
        b = load_report(_report_path(args.run_b))
        if (a.effect, a.resolution) != (b.effect, b.resolution):
            logger.warning(f"⚠️ Сравниваются разные прогоны: {a.effect} {a.resolution} и {b.effect} {b.resolution}")

        rows = compare_reports(a, b)
        for name, (value_a, value_b) in rows.items():
            print(Texts.compare_row(name, value_a, value_b))

        found = regressions(rows, args.max_rms, args.max_work)
        for name, delta, limit in found:
            logger.error(Texts.regression(name, delta, limit))
        if found:
            return EXIT_REGRESSION
        logger.info(Texts.NO_REGRESSION)
        return EXIT_OK

    return await guarded(action)


def register(subparsers) -> None:
    compare = subparsers.add_parser("compare", help="Deltas between two report.json files")
    compare.add_argument("run_a", type=Path, help="Baseline report.json or run directory")
    compare.add_argument("run_b", type=Path, help="Candidate report.json or run directory")
    compare.add_argument("--max-rms", type=float, help="Allowed RMS increase")
    compare.add_argument("--max-work", type=float, help="Allowed work_ratio increase")
    compare.set_defaults(handler=handle_compare)
