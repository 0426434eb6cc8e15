import argparse
import asyncio
import logging
import sys
from logging.handlers import RotatingFileHandler

import colorlog

import config
from multires.handlers import compare, render, sweep

LOG_COLORS = {
    'DEBUG': 'cyan',
    'INFO': 'green',
    'WARNING': 'yellow',
    'ERROR': 'red',
    'CRITICAL': 'red,bg_white',
}


# Перехватчик необработанных исключений
def handle_exception(exc_type, exc_value, exc_traceback):
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return

    logger = logging.getLogger('root')
    logger.error(
        "Необработанное исключение:",
        exc_info=(exc_type, exc_value, exc_traceback)
    )


def _stream_handler(prefix: str, colors: dict) -> logging.Handler:
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(
        f'%(log_color)s[%(asctime)s] {prefix}: %(message)s',
        datefmt='%H:%M:%S',
        log_colors=colors,
    ))
    return handler


def setup_logging(verbose: bool = False) -> None:
    """Логгеры render и cli, файл ошибок и перехват исключений"""
    # Ошибки пишутся в файл с ротацией
    file_handler = RotatingFileHandler(
        config.ERROR_LOG_PATH,
        maxBytes=1024 * 1024,  # 1MB
        backupCount=5,
        encoding='utf-8',
        delay=True,
    )
    file_handler.setFormatter(logging.Formatter(
        '[%(asctime)s] %(levelname)s in %(module)s: %(message)s'
    ))
    file_handler.setLevel(logging.ERROR)

    level = logging.DEBUG if verbose else logging.INFO
    for name, prefix, colors in (
        ('render', 'RENDER', LOG_COLORS),
        ('cli', 'CLI', {**LOG_COLORS, 'DEBUG': 'blue', 'INFO': 'white'}),
    ):
        logger = colorlog.getLogger(name)
        logger.handlers.clear()
        logger.addHandler(_stream_handler(prefix, colors))
        logger.addHandler(file_handler)
        logger.setLevel(level)
        logger.propagate = False

    # Модули пакета пишут через logging.getLogger(__name__)
    package_logger = logging.getLogger('multires')
    package_logger.handlers.clear()
    package_logger.addHandler(_stream_handler('RENDER', LOG_COLORS))
    package_logger.addHandler(file_handler)
    package_logger.setLevel(level)
    package_logger.propagate = False

    sys.excepthook = handle_exception


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multires", description="Multi-resolution screen-space shading")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Подключение команд
    for handler in [render, compare, sweep]:
        handler.register(subparsers)
    return parser


async def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    return await args.handler(args)


def run() -> None:
    sys.exit(asyncio.run(main()))


if __name__ == "__main__":
    run()
