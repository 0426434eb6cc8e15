from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, NonNegativeInt, PositiveInt, ValidationError

import config
from multires.core.errors import ContractViolation, ReportFormatError
from multires.core.image import Image2D

logger = logging.getLogger(__name__)


class LevelWork(BaseModel):
    model_config = ConfigDict(extra="forbid")

    index: int = Field(ge=1, le=len(config.LEVEL_DIVISORS))
    width: PositiveInt
    height: PositiveInt
    shaded_pixels: NonNegativeInt
    samples: NonNegativeInt


class WorkReport(BaseModel):
    """Работа по уровням относительно эталона в полном разрешении"""

    model_config = ConfigDict(extra="forbid")

    levels: list[LevelWork]
    total_shaded_pixels: NonNegativeInt
    total_samples: NonNegativeInt
    reference_samples: PositiveInt
    work_ratio: NonNegativeFloat

    @classmethod
    def from_levels(cls, levels: list[LevelWork], reference_samples: int) -> WorkReport:
        if reference_samples <= 0:
            raise ContractViolation("Кадр без геометрии: эталонная работа равна нулю")
        total = sum(level.samples for level in levels)
        return cls(
            levels=sorted(levels, key=lambda level: level.index),
            total_shaded_pixels=sum(level.shaded_pixels for level in levels),
            total_samples=total,
            reference_samples=reference_samples,
            work_ratio=total / reference_samples,
        )


def work_reduction(multi: WorkReport) -> float:
    """Доля работы эталона, которую многоуровневый прогон не сделал"""
    if multi.reference_samples <= 0:
        raise ContractViolation("reference_samples должен быть > 0")
    return 1.0 - multi.work_ratio


@dataclass(frozen=True, eq=False)
class QualityReport:
    rms: float
    max_abs: float
    difference: Image2D
    enhancement: float = config.DIFF_ENHANCEMENT

    def summary(self) -> QualitySummary:
        return QualitySummary(rms=self.rms, max_abs=self.max_abs)


def rms_error(a: Image2D, b: Image2D, enhancement: float = config.DIFF_ENHANCEMENT) -> QualityReport:
    """
    Сравнить два изображения.

    :param a: первое изображение.
    :param b: второе изображение того же размера.
    :param enhancement: усиление изображения разности.
    :return: RMS по всем пикселям и каналам, максимум модуля, изображение разности.
    """
    if a.data.shape != b.data.shape:
        raise ContractViolation(f"Размеры не совпадают: {a.data.shape} и {b.data.shape}")
    diff = np.abs(a.as_float() - b.as_float())
    rms = float(np.sqrt(np.mean(diff * diff)))
    max_abs = float(diff.max())
    return QualityReport(
        rms=rms,
        max_abs=max_abs,
        difference=Image2D(np.clip(diff * enhancement, 0.0, 1.0)),
        enhancement=enhancement,
    )


class QualitySummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rms: NonNegativeFloat
    max_abs: NonNegativeFloat


class RunReport(BaseModel):
    """Содержимое report.json"""

    model_config = ConfigDict(extra="forbid")

    effect: str
    resolution: tuple[PositiveInt, PositiveInt]
    samples: PositiveInt
    work: Optional[WorkReport] = None
    quality: Optional[QualitySummary] = None
    timings_ms: dict[str, float] = {}

    @property
    def work_reduction(self) -> Optional[float]:
        return None if self.work is None else work_reduction(self.work)

    def deterministic_dump(self) -> dict:
        """Отчёт без блока времени"""
        return self.model_dump(mode="json", exclude={"timings_ms"})

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=2), encoding="utf-8")


def load_report(path: str | Path) -> RunReport:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Отчёт не найден: {path}")
    try:
        return RunReport.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ReportFormatError(f"Отчёт {path} не соответствует схеме: {e}") from e
