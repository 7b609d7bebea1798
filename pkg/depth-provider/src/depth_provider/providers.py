"""Depth providers: model-backed inference and synthetic stubs.

Both paths share the same commit discipline: every new depth PNG is written
(atomically) before the manifest is rewritten (atomically), so interrupting
the tool at any point leaves the session loadable. Frames whose prediction
fails are logged and skipped; the manifest simply gains no entry for them.

Models are pluggable behind a two-function adapter. A model identifier of
the form "module:attr" resolves to `attr(config)` in that importable module;
the call returns any object with

    predict(rgb: uint8 (H, W, 3), ctx: FrameContext) -> (H, W) depth in meters

FrameContext carries the camera intrinsics and the frame's file locations so
models that consume calibration (most metric-depth networks do) can read it.
Bare identifiers name published checkpoints and are resolved the same way
once the matching integration package is installed.
"""

from __future__ import annotations

import importlib
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sessionio import (
    FrameRecord,
    Manifest,
    SessionFormatError,
    atomic_write_bytes,
    encode_depth_mm,
    load_manifest,
    read_depth_m,
    read_rgb,
    write_depth_png,
    write_manifest,
)

logger = logging.getLogger(__name__)

DEFAULT_SOURCE = "fm"
DEFAULT_MODEL = "metric3d_vit_large"
DEFAULT_CLAMP = (0.01, 65.0)


class ProviderError(Exception):
    """Base class for provider failures."""


class ModelLoadError(ProviderError):
    """The model identifier could not be resolved or its loader failed."""


class SourceCollisionError(ProviderError):
    """The output source name already exists and overwrite was not requested."""


@dataclass(frozen=True)
class ProviderConfig:
    model: str = DEFAULT_MODEL
    device: str = "cpu"
    batch_size: int = 4
    source: str = DEFAULT_SOURCE
    clamp: tuple[float, float] = DEFAULT_CLAMP
    overwrite: bool = False

    def __post_init__(self) -> None:
        if not self.source or "/" in self.source:
            raise ValueError(f"source must be a bare name, got {self.source!r}")
        lo, hi = self.clamp
        if not 0 < lo < hi:
            raise ValueError(f"clamp range must satisfy 0 < lo < hi, got {self.clamp}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class FrameContext:
    """Per-frame information handed to a model's predict()."""

    index: int
    session_root: Path
    intrinsics: dict
    rgb_rel: str
    depth_rels: dict[str, str]


@dataclass(frozen=True)
class ProviderReport:
    source: str
    written: tuple[int, ...]
    skipped: tuple[int, ...]


def load_model(config: ProviderConfig):
    """Resolve config.model to a predict-capable object via "module:attr"."""
    name = config.model
    if ":" in name:
        mod_name, _, attr = name.partition(":")
    else:
        mod_name, attr = name, "load"
    try:
        module = importlib.import_module(mod_name)
    except ImportError as e:
        raise ModelLoadError(
            f"cannot import model plugin {mod_name!r} for model {name!r}: {e}. "
            f"Install the integration package or pass --model module:attr."
        ) from e
    try:
        factory = getattr(module, attr)
    except AttributeError as e:
        raise ModelLoadError(f"model plugin {mod_name!r} has no attribute {attr!r}") from e
    try:
        model = factory(config)
    except Exception as e:
        raise ModelLoadError(f"model factory {name!r} failed: {e}") from e
    if not callable(getattr(model, "predict", None)):
        raise ModelLoadError(f"model factory {name!r} returned an object without predict()")
    return model


def _check_collision(manifest: Manifest, source: str, overwrite: bool) -> None:
    if source in manifest.sources and not overwrite:
        raise SourceCollisionError(
            f"session already has a depth source {source!r}; pass overwrite to replace it"
        )


def _finalize_depth(pred: np.ndarray, frame: FrameRecord, manifest: Manifest,
                    clamp: tuple[float, float]) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    h, w = int(manifest.intrinsics["height"]), int(manifest.intrinsics["width"])
    if pred.shape != (h, w):
        raise SessionFormatError(
            f"frame {frame.index}: prediction shape {pred.shape} does not match {w}x{h}"
        )
    out = np.clip(pred, clamp[0], clamp[1])
    out[~np.isfinite(pred)] = 0.0
    return out


def _commit(manifest: Manifest, source: str,
            depth_mm: dict[int, np.ndarray], skipped: list[int]) -> ProviderReport:
    """Write all depth PNGs, then the manifest; see module docstring."""
    new_rels: dict[int, str] = {}
    for frame in manifest.frames:
        if frame.index not in depth_mm:
            continue
        rel = f"depth/{source}/{frame.index:06d}.png"
        write_depth_png(manifest.root / rel, depth_mm[frame.index])
        new_rels[frame.index] = rel
    write_manifest(manifest, new_rels, source)
    return ProviderReport(source=source, written=tuple(sorted(new_rels)),
                          skipped=tuple(sorted(skipped)))


def infer_session(session_dir: str | Path, config: ProviderConfig = ProviderConfig()) -> ProviderReport:
    """Run the configured model over a session's RGB frames and add the
    predictions as a new depth source.

    Raises ModelLoadError if the model cannot be resolved and
    SourceCollisionError on a name collision without overwrite. Per-frame
    prediction failures are logged and the frame skipped.
    """
    manifest = load_manifest(session_dir)
    _check_collision(manifest, config.source, config.overwrite)
    model = load_model(config)

    depth_mm: dict[int, np.ndarray] = {}
    skipped: list[int] = []
    frames = manifest.frames
    for start in range(0, len(frames), config.batch_size):
        for frame in frames[start : start + config.batch_size]:
            ctx = FrameContext(
                index=frame.index,
                session_root=manifest.root,
                intrinsics=manifest.intrinsics,
                rgb_rel=frame.rgb_rel,
                depth_rels=dict(frame.depth_rels),
            )
            try:
                rgb = read_rgb(manifest, frame)
                pred = _finalize_depth(model.predict(rgb, ctx), frame, manifest, config.clamp)
            except Exception as e:
                logger.warning("frame %d: prediction failed, skipping: %s", frame.index, e)
                skipped.append(frame.index)
                continue
            depth_mm[frame.index] = encode_depth_mm(pred)
    return _commit(manifest, config.source, depth_mm, skipped)


@dataclass(frozen=True)
class EchoGt:
    """Copy the 'gt' depth source byte for byte."""


@dataclass(frozen=True)
class Constant:
    """Store `depth` meters at every pixel the 'gt' source marks valid."""

    depth: float

    def __post_init__(self) -> None:
        if not self.depth > 0:
            raise ValueError(f"constant depth must be positive, got {self.depth}")


@dataclass(frozen=True)
class Degraded:
    """'gt' plus Gaussian noise (sigma meters) and a dropout fraction, seeded."""

    sigma: float
    dropout: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not 0 <= self.dropout < 1:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")


StubMode = EchoGt | Constant | Degraded


def stub_session(session_dir: str | Path, mode: StubMode,
                 source: str = DEFAULT_SOURCE, overwrite: bool = False) -> ProviderReport:
    """Add a synthetic depth source derived from the 'gt' source.

    The stubs exist so downstream multi-source comparisons can be exercised
    without model weights; they follow the same commit discipline as
    infer_session.
    """
    manifest = load_manifest(session_dir)
    _check_collision(manifest, source, overwrite)

    if isinstance(mode, EchoGt):
        # Byte-identical by construction: copy the encoded files themselves.
        new_rels: dict[int, str] = {}
        for frame in manifest.frames:
            if "gt" not in frame.depth_rels:
                raise SessionFormatError(f"frame {frame.index} has no 'gt' source to echo")
            rel = f"depth/{source}/{frame.index:06d}.png"
            src_path = manifest.root / frame.depth_rels["gt"]
            if not src_path.is_file():
                raise SessionFormatError(f"frame {frame.index}: depth file missing: {src_path}")
            dst_path = manifest.root / rel
            dst_path.parent.mkdir(parents=True, exist_ok=True)
            atomic_write_bytes(dst_path, src_path.read_bytes())
            new_rels[frame.index] = rel
        write_manifest(manifest, new_rels, source)
        return ProviderReport(source=source, written=tuple(sorted(new_rels)), skipped=())

    depth_mm: dict[int, np.ndarray] = {}
    for frame in manifest.frames:
        gt = read_depth_m(manifest, frame, "gt")
        valid = gt > 0
        if isinstance(mode, Constant):
            d = np.where(valid, mode.depth, 0.0)
        elif isinstance(mode, Degraded):
            rng = np.random.default_rng([mode.seed, frame.index])
            noisy = gt + rng.normal(0.0, mode.sigma, size=gt.shape)
            drop = rng.uniform(size=gt.shape) < mode.dropout
            d = np.where(valid & ~drop, np.clip(noisy, 0.001, None), 0.0)
        else:
            raise TypeError(f"unknown stub mode {type(mode).__name__}")
        depth_mm[frame.index] = encode_depth_mm(d)
    return _commit(manifest, source, depth_mm, [])
