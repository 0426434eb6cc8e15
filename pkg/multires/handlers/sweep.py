import argparse

import colorlog

from multires.handlers.common import EXIT_OK, guarded, parse_size
from multires.handlers.render import add_run_arguments, spec_from_args
from multires.services.runs import execute_sweep

logger = colorlog.getLogger('cli')


async def handle_sweep(args: argparse.Namespace) -> int:
    async def action() -> int:
        spec = spec_from_args(args, multires_only=args.no_reference)
        report = await execute_sweep(spec, ladder=args.ladder, sizes=args.sizes)
        logger.info(f"✅ Sweep {report.effect}: {len(report.points)} точек, {spec.out / 'sweep.json'}")
        return EXIT_OK

    return await guarded(action)


def register(subparsers) -> None:
    sweep = subparsers.add_parser("sweep", help="Work ratio and RMS across sample counts and resolutions")
    add_run_arguments(sweep)
    sweep.add_argument("--ladder", type=int, nargs="+", help="Sample counts, default: the effect's ladder")
    sweep.add_argument("--sizes", type=parse_size, nargs="+", help="Resolution ladder, e.g. 320x184 640x360")
    sweep.add_argument("--no-reference", action="store_true", help="Skip reference renders and RMS")
    sweep.set_defaults(handler=handle_sweep)
