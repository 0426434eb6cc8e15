
# Pipeline package initialization
from multires.pipeline.runner import (
    Frame,
    MultiResResult,
    ReferenceResult,
    build_masks,
    prepare_frame,
    run_multires,
    run_multires_async,
    run_reference,
    run_reference_async,
)
from multires.pipeline.settings import PipelineConfig, SsaoBlur
from multires.pipeline.stages import bilateral_blur_masked, blend, render_level, upsample_in_stencil
