
# Effects package initialization
from multires.core.errors import ContractViolation
from multires.core.image import Image2D
from multires.effects.base import EffectKind, EffectOutput, EffectParams, ShadingInputs
from multires.effects.ssao import ssao
from multires.effects.ssgi import ssgi
from multires.effects.ssm import ssm

EFFECTS = {
    EffectKind.SSAO: ssao,
    EffectKind.SSM: ssm,
    EffectKind.SSGI: ssgi,
}


def needs_shadow_map(kind: EffectKind | str) -> bool:
    return EffectKind(kind) != EffectKind.SSAO


def evaluate(kind: EffectKind | str, inputs: ShadingInputs, params: EffectParams, domain: Image2D) -> EffectOutput:
    """Посчитать эффект на пикселях трафарета"""
    kind = EffectKind(kind)
    if needs_shadow_map(kind) and inputs.shadow_map is None:
        raise ContractViolation(f"Эффекту {kind} нужна карта теней")
    return EFFECTS[kind](inputs, params, domain)
