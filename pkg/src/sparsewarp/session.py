"""RGBD session storage: manifest.json plus per-frame PNG images.

Layout written by save_session:

    session/
      manifest.json
      rgb/000000.png            8-bit RGB
      depth/<source>/000000.png 16-bit grayscale, millimeters, 0 = invalid

Depth maps are plain float64 arrays in meters with 0 marking invalid pixels
(z-depth along the optical axis). The 16-bit millimeter encoding covers
(0, 65.535] m at 1 mm resolution; values above the ceiling are clamped on
save and counted in a warning. Poses are stored as 16 row-major floats of the
camera-to-world matrix, serialized with shortest round-trip decimal text so a
save/load cycle is lossless.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import Intrinsics, PoseSE3

logger = logging.getLogger(__name__)

MAX_DEPTH_MM = 65535
SCHEMA_VERSION = 1


class SessionError(Exception):
    """Base class for session storage errors."""


class ManifestError(SessionError):
    """Manifest missing, unparsable, or schema-invalid (bad keys, bad timestamps)."""


class MissingFileError(SessionError):
    """Manifest references an image file that does not exist."""


class DimensionMismatchError(SessionError):
    """An image's size disagrees with the manifest intrinsics."""


@dataclass
class Frame:
    """One RGBD frame. depth maps are keyed by source name ('gt', 'noisy', ...)."""

    index: int
    timestamp_us: int
    rgb: np.ndarray
    depth: dict[str, np.ndarray]
    pose: PoseSE3


@dataclass
class Session:
    frames: list[Frame]
    intrinsics: Intrinsics
    nominal_fps: float = 60.0

    def __post_init__(self) -> None:
        validate_session(self)

    @property
    def depth_sources(self) -> list[str]:
        """Source names present in every frame, in first-frame order."""
        names = [s for s in self.frames[0].depth]
        return [s for s in names if all(s in f.depth for f in self.frames)]


def validate_session(session: Session) -> None:
    if not session.frames:
        raise ManifestError("session must contain at least one frame")
    if not session.nominal_fps > 0:
        raise ManifestError(f"nominal_fps must be positive, got {session.nominal_fps}")
    k = session.intrinsics
    prev_ts = None
    prev_idx = None
    for f in session.frames:
        if prev_ts is not None and f.timestamp_us <= prev_ts:
            raise ManifestError(
                f"timestamps must strictly increase: frame {f.index} has "
                f"{f.timestamp_us} after {prev_ts}"
            )
        if prev_idx is not None and f.index <= prev_idx:
            raise ManifestError(f"frame indices must strictly increase at {f.index}")
        prev_ts, prev_idx = f.timestamp_us, f.index
        if f.rgb.shape != (k.height, k.width, 3) or f.rgb.dtype != np.uint8:
            raise DimensionMismatchError(
                f"frame {f.index}: rgb shape {f.rgb.shape} dtype {f.rgb.dtype} does not "
                f"match intrinsics {k.width}x{k.height} uint8"
            )
        for name, d in f.depth.items():
            if d.shape != (k.height, k.width):
                raise DimensionMismatchError(
                    f"frame {f.index}: depth source {name!r} shape {d.shape} does not "
                    f"match intrinsics {k.width}x{k.height}"
                )
            if not np.isfinite(d).all() or (d < 0).any():
                raise SessionError(
                    f"frame {f.index}: depth source {name!r} must be finite and nonnegative"
                )


def encode_depth_mm(depth_m: np.ndarray) -> tuple[np.ndarray, int]:
    """Meters -> uint16 millimeters (round half to even). Returns (image, clamped count)."""
    mm = np.rint(np.asarray(depth_m, dtype=np.float64) * 1000.0)
    over = int((mm > MAX_DEPTH_MM).sum())
    mm = np.clip(mm, 0, MAX_DEPTH_MM)
    return mm.astype(np.uint16), over


def decode_depth_mm(img: np.ndarray) -> np.ndarray:
    """uint16 millimeters -> float64 meters, 0 stays 0 (invalid)."""
    return np.asarray(img, dtype=np.float64) / 1000.0


def _atomic_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _save_png(path: Path, arr: np.ndarray) -> None:
    import io as _io

    buf = _io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    _atomic_bytes(path, buf.getvalue())


def save_session(session: Session, path: str | Path) -> None:
    """Write a session directory. Overwrites files atomically; a re-save of an
    unmodified session is byte-identical."""
    validate_session(session)
    root = Path(path)
    (root / "rgb").mkdir(parents=True, exist_ok=True)
    clamped = 0
    frames_json = []
    for f in session.frames:
        name = f"{f.index:06d}.png"
        _save_png(root / "rgb" / name, f.rgb)
        depth_entries = {}
        for source, d in f.depth.items():
            sdir = root / "depth" / source
            sdir.mkdir(parents=True, exist_ok=True)
            img, over = encode_depth_mm(d)
            clamped += over
            _save_png(sdir / name, img)
            depth_entries[source] = f"depth/{source}/{name}"
        frames_json.append(
            {
                "index": f.index,
                "timestamp_us": f.timestamp_us,
                "rgb": f"rgb/{name}",
                "pose_c2w": [float(x) for x in f.pose.matrix.reshape(-1)],
                "depth": depth_entries,
            }
        )
    k = session.intrinsics
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "nominal_fps": session.nominal_fps,
        "intrinsics": {
            "fx": k.fx,
            "fy": k.fy,
            "cx": k.cx,
            "cy": k.cy,
            "width": k.width,
            "height": k.height,
        },
        "frames": frames_json,
    }
    if clamped:
        logger.warning("save_session: clamped %d depth values above %.3f m", clamped, MAX_DEPTH_MM / 1000.0)
    _atomic_bytes(root / "manifest.json", (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode())


def _load_png(root: Path, rel: str, what: str) -> np.ndarray:
    p = root / rel
    if not p.is_file():
        raise MissingFileError(f"{what} file referenced by manifest does not exist: {p}")
    return np.asarray(Image.open(p))


def load_session(path: str | Path) -> Session:
    """Read a session directory written by save_session (or a compatible tool)."""
    root = Path(path)
    mpath = root / "manifest.json"
    if not mpath.is_file():
        raise ManifestError(f"no manifest.json under {root}")
    try:
        manifest = json.loads(mpath.read_text())
    except json.JSONDecodeError as e:
        raise ManifestError(f"manifest.json is not valid JSON: {e}") from e
    try:
        ki = manifest["intrinsics"]
        k = Intrinsics(
            fx=float(ki["fx"]),
            fy=float(ki["fy"]),
            cx=float(ki["cx"]),
            cy=float(ki["cy"]),
            width=int(ki["width"]),
            height=int(ki["height"]),
        )
        fps = float(manifest["nominal_fps"])
        frame_entries = manifest["frames"]
    except (KeyError, TypeError, ValueError) as e:
        raise ManifestError(f"manifest.json is missing or mistypes a required key: {e}") from e

    frames = []
    for entry in frame_entries:
        try:
            index = int(entry["index"])
            ts = int(entry["timestamp_us"])
            rgb_rel = entry["rgb"]
            pose_vals = entry["pose_c2w"]
            depth_rels = entry["depth"]
        except (KeyError, TypeError) as e:
            raise ManifestError(f"frame entry is missing a required key: {e}") from e
        if len(pose_vals) != 16:
            raise ManifestError(f"frame {index}: pose_c2w must have 16 entries, got {len(pose_vals)}")
        pose_m = np.array(pose_vals, dtype=np.float64).reshape(4, 4)
        if not np.allclose(pose_m[3], [0.0, 0.0, 0.0, 1.0], atol=1e-12):
            raise ManifestError(f"frame {index}: pose_c2w last row must be [0,0,0,1]")
        try:
            pose = PoseSE3.from_matrix(pose_m)
        except ValueError as e:
            raise ManifestError(f"frame {index}: {e}") from e
        rgb = _load_png(root, rgb_rel, f"frame {index} rgb")
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise DimensionMismatchError(f"frame {index}: rgb png must be 3-channel, got {rgb.shape}")
        depth = {}
        for source, rel in depth_rels.items():
            img = _load_png(root, rel, f"frame {index} depth[{source}]")
            if img.ndim != 2:
                raise DimensionMismatchError(
                    f"frame {index}: depth png for {source!r} must be single channel"
                )
            depth[source] = decode_depth_mm(img)
        frames.append(Frame(index=index, timestamp_us=ts, rgb=rgb.astype(np.uint8), depth=depth, pose=pose))

    return Session(frames=frames, intrinsics=k, nominal_fps=fps)


@dataclass
class PointCloud:
    """World-frame points (N, 3) float64 with optional (N, 3) uint8 colors."""

    points: np.ndarray
    colors: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise ValueError(f"points must be (N, 3), got {self.points.shape}")
        if not np.isfinite(self.points).all():
            raise ValueError("points must be finite")
        if self.colors is not None:
            self.colors = np.asarray(self.colors, dtype=np.uint8)
            if self.colors.shape != self.points.shape:
                raise ValueError(
                    f"colors shape {self.colors.shape} must match points {self.points.shape}"
                )

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass
class SurfaceMesh:
    """Triangle mesh: vertex cloud plus (M, 3) int vertex indices."""

    vertices: PointCloud
    triangles: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))

    def __post_init__(self) -> None:
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError(f"triangles must be (M, 3), got {self.triangles.shape}")
        n = len(self.vertices)
        if self.triangles.size:
            if self.triangles.min() < 0 or self.triangles.max() >= n:
                raise ValueError("triangle indices out of vertex range")
            t = self.triangles
            if ((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])).any():
                raise ValueError("triangles must not repeat a vertex index")
