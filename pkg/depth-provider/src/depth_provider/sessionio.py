"""Minimal I/O for RGBD session directories.

A session directory holds a manifest.json plus per-frame PNGs:

    session/
      manifest.json
      rgb/000000.png            8-bit RGB
      depth/<source>/000000.png 16-bit grayscale, millimeters, 0 = invalid

This module is deliberately independent of the toolkit that consumes these
sessions; it reads and writes the same on-disk format. The manifest maps
each frame to its image files and camera pose; this tool only ever adds
depth entries, so poses are carried through untouched.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

MAX_DEPTH_MM = 65535


class SessionFormatError(Exception):
    """Manifest missing, unparsable, or not the expected schema."""


@dataclass
class FrameRecord:
    """One manifest frame entry. Paths are relative to the session root."""

    index: int
    rgb_rel: str
    depth_rels: dict[str, str]
    raw: dict = field(repr=False)


@dataclass
class Manifest:
    root: Path
    intrinsics: dict
    frames: list[FrameRecord]
    raw: dict = field(repr=False)

    @property
    def sources(self) -> set[str]:
        """Depth source names present in any frame."""
        out: set[str] = set()
        for f in self.frames:
            out.update(f.depth_rels)
        return out


def load_manifest(session_dir: str | Path) -> Manifest:
    root = Path(session_dir)
    mpath = root / "manifest.json"
    if not mpath.is_file():
        raise SessionFormatError(f"no manifest.json under {root}")
    try:
        raw = json.loads(mpath.read_text())
    except json.JSONDecodeError as e:
        raise SessionFormatError(f"manifest.json is not valid JSON: {e}") from e
    try:
        intrinsics = dict(raw["intrinsics"])
        entries = raw["frames"]
        frames = [
            FrameRecord(
                index=int(e["index"]),
                rgb_rel=str(e["rgb"]),
                depth_rels=dict(e["depth"]),
                raw=e,
            )
            for e in entries
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise SessionFormatError(f"manifest.json is missing or mistypes a required key: {e}") from e
    if not frames:
        raise SessionFormatError("manifest lists no frames")
    return Manifest(root=root, intrinsics=intrinsics, frames=frames, raw=raw)


def read_rgb(manifest: Manifest, frame: FrameRecord) -> np.ndarray:
    p = manifest.root / frame.rgb_rel
    if not p.is_file():
        raise SessionFormatError(f"frame {frame.index}: rgb file missing: {p}")
    arr = np.asarray(Image.open(p))
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise SessionFormatError(f"frame {frame.index}: rgb png must be 3-channel, got {arr.shape}")
    return arr.astype(np.uint8)


def read_depth_m(manifest: Manifest, frame: FrameRecord, source: str) -> np.ndarray:
    """Depth in meters (float64); 0 marks invalid pixels."""
    try:
        rel = frame.depth_rels[source]
    except KeyError:
        raise SessionFormatError(
            f"frame {frame.index} has no depth source {source!r}; "
            f"available: {sorted(frame.depth_rels)}"
        ) from None
    p = manifest.root / rel
    if not p.is_file():
        raise SessionFormatError(f"frame {frame.index}: depth file missing: {p}")
    img = np.asarray(Image.open(p))
    if img.ndim != 2:
        raise SessionFormatError(f"frame {frame.index}: depth png must be single channel")
    return np.asarray(img, dtype=np.float64) / 1000.0


def encode_depth_mm(depth_m: np.ndarray) -> np.ndarray:
    """Meters -> uint16 millimeters (round half to even, clamped to the range)."""
    mm = np.rint(np.asarray(depth_m, dtype=np.float64) * 1000.0)
    return np.clip(mm, 0, MAX_DEPTH_MM).astype(np.uint16)


def atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def write_depth_png(path: Path, depth_mm: np.ndarray) -> None:
    import io

    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.BytesIO()
    Image.fromarray(depth_mm).save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def write_manifest(manifest: Manifest, new_rels: dict[int, str], source: str) -> None:
    """Rewrite manifest.json with `source` added for the frames in new_rels.

    Called only after every referenced depth PNG is on disk, and the file is
    replaced atomically, so an interruption anywhere leaves a manifest whose
    references all resolve.
    """
    for frame in manifest.frames:
        if frame.index in new_rels:
            frame.raw["depth"][source] = new_rels[frame.index]
    text = json.dumps(manifest.raw, indent=2, sort_keys=True) + "\n"
    atomic_write_bytes(manifest.root / "manifest.json", text.encode())
