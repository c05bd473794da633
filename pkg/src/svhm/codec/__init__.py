"""Two-layer scalable codec: base layer decodable alone, enhancement coded
conditionally on the base and temporal context."""

from .frames import Frame, rgb_to_ycbcr, ycbcr_to_rgb
from .container import ScalableBitstream, FrameRecord, ContainerError
from .pipeline import (
    CodecConfig,
    RateReport,
    decode_sequence,
    encode_sequence,
)

__all__ = [
    "Frame",
    "rgb_to_ycbcr",
    "ycbcr_to_rgb",
    "ScalableBitstream",
    "FrameRecord",
    "ContainerError",
    "CodecConfig",
    "RateReport",
    "encode_sequence",
    "decode_sequence",
]
