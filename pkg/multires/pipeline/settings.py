from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveInt, field_validator

import config
from multires.effects.base import EffectKind, EffectParams
from multires.mask.edges import EdgeParams
from multires.pyramid.levels import DIVISORS, LevelConfig, default_levels


class SsaoBlur(BaseModel):
    model_config = ConfigDict(extra="forbid")

    enabled: bool = True
    variance: NonNegativeFloat = config.SSAO_BLUR_VARIANCE


class PipelineConfig(BaseModel):
    """Всё, что определяет один прогон: эффект, пороги границ, таблица уровней"""

    model_config = ConfigDict(extra="forbid")

    effect: EffectKind
    effect_params: EffectParams
    edge_params: EdgeParams
    levels: list[LevelConfig]
    ssao_blur: SsaoBlur = SsaoBlur()
    shadow_resolution: PositiveInt = config.SHADOW_RESOLUTION
    # None: доля SHADOW_BIAS_FRACTION от диагонали сцены
    shadow_bias: Optional[NonNegativeFloat] = None
    force_full_edges: bool = False
    blur_cutoff: NonNegativeFloat = config.BLUR_CUTOFF

    @field_validator("levels")
    @classmethod
    def check_levels(cls, levels: list[LevelConfig]) -> list[LevelConfig]:
        indices = sorted(level.index for level in levels)
        if indices != list(range(1, len(DIVISORS) + 1)):
            raise ValueError(f"нужны уровни 1..{len(DIVISORS)}, получены {indices}")
        return sorted(levels, key=lambda level: level.index)

    @classmethod
    def for_effect(cls, effect: EffectKind | str, **overrides) -> PipelineConfig:
        """Таблица уровней и число сэмплов по умолчанию для эффекта"""
        effect = EffectKind(effect)
        overrides.setdefault("effect_params", EffectParams.for_effect(effect))
        overrides.setdefault("edge_params", EdgeParams.for_effect(effect))
        overrides.setdefault("levels", default_levels(effect))
        return cls(effect=effect, **overrides)

    @property
    def enabled_levels(self) -> list[LevelConfig]:
        return [level for level in self.levels if level.enabled]

    @property
    def blurs_layers(self) -> bool:
        return self.effect == EffectKind.SSAO and self.ssao_blur.enabled

    def level(self, index: int) -> LevelConfig:
        return self.levels[index - 1]
