"""flowloop: looping cinemagraphs from still images and 2D motion fields."""

from .fields import (
    BadMagicError,
    DisplacementField,
    FlowFileError,
    FluidMask,
    MotionField,
    RasterImage,
    TruncatedFileError,
    load_flo,
    sample_bilinear,
    save_flo,
    visualize_flow,
)
from .integrate import DisplacementSequence, advect_point, integrate_displacements
from .metrics import MetricReport, aepe, mse, ms_ssim, psnr
from .motionsynth import synthesize_field
from .splat import (
    FrameSequence,
    ImportanceMap,
    compose_frame,
    render_loop,
    splat_forward,
)
from .streamline import (
    MotionSketchSet,
    MotionStroke,
    extract_streamlines,
    prepare_motion_stroke,
    rasterize_sketches,
    sketches_from_json,
    sketches_to_json,
    trace_streamline,
)

__all__ = [
    "BadMagicError",
    "DisplacementField",
    "DisplacementSequence",
    "FlowFileError",
    "FluidMask",
    "FrameSequence",
    "ImportanceMap",
    "MetricReport",
    "MotionField",
    "MotionSketchSet",
    "MotionStroke",
    "RasterImage",
    "TruncatedFileError",
    "advect_point",
    "aepe",
    "compose_frame",
    "extract_streamlines",
    "integrate_displacements",
    "load_flo",
    "mse",
    "ms_ssim",
    "prepare_motion_stroke",
    "psnr",
    "rasterize_sketches",
    "render_loop",
    "sample_bilinear",
    "save_flo",
    "sketches_from_json",
    "sketches_to_json",
    "splat_forward",
    "synthesize_field",
    "trace_streamline",
    "visualize_flow",
]
