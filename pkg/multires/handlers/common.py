import argparse
from typing import Awaitable, Callable

import colorlog
from pydantic import ValidationError

from multires.assets.texts import Texts
from multires.core.errors import ContractViolation, ReportFormatError, SceneFormatError

logger = colorlog.getLogger('cli')

# Коды выхода
EXIT_OK = 0
EXIT_REGRESSION = 1
EXIT_INPUT = 2
EXIT_CONTRACT = 3


def parse_size(text: str) -> tuple[int, int]:
    """'640x360' -> (640, 360)"""
    try:
        width, height = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидался размер вида 640x360, получено {text!r}")
    if width <= 0 or height <= 0:
        raise argparse.ArgumentTypeError(f"размер должен быть положительным: {text!r}")
    return width, height


def parse_list(kind: Callable):
    """Значения по уровням через запятую, '-' оставляет значение по умолчанию"""

    def parse(text: str):
        try:
            return [None if part.strip() in ("-", "") else kind(part) for part in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"некорректный список: {text!r}")

    return parse


def parse_flag(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


async def guarded(action: Callable[[], Awaitable[int]]) -> int:
    """Выполнить обработчик и перевести ошибки в коды выхода"""
    try:
        return await action()
    except FileNotFoundError as e:
        logger.error(f"{Texts.SCENE_MISSING}: {e}")
        return EXIT_INPUT
    except SceneFormatError as e:
        logger.error(f"{Texts.SCENE_INVALID}: {e}")
        return EXIT_INPUT
    except ReportFormatError as e:
        logger.error(f"{Texts.REPORT_INVALID}: {e}")
        return EXIT_INPUT
    except ContractViolation as e:
        logger.error(f"{Texts.CONTRACT_BROKEN}: {e}")
        return EXIT_CONTRACT
    except ValidationError as e:
        logger.error(f"❌ Некорректные параметры: {e}")
        return EXIT_INPUT
