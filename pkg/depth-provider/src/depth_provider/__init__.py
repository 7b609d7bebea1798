"""Adds model-predicted (or stubbed) depth sources to RGBD session directories."""

from .providers import (
    Constant,
    Degraded,
    EchoGt,
    FrameContext,
    ModelLoadError,
    ProviderConfig,
    ProviderError,
    ProviderReport,
    SourceCollisionError,
    infer_session,
    load_model,
    stub_session,
)
from .sessionio import Manifest, SessionFormatError, load_manifest

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
