"""Command-line front end: synthesize sessions and run the batch evaluations.

Subcommands
    synth        render a synthetic box-room session to a directory
    warp-eval    warp sampled frame pairs and score SSIM / overlap per gap
    recon-eval   reconstruct at several frame strides and score Hausdorff
    policy-eval  frame-selection policies and overlap / geodesic curves

Every command is deterministic for a fixed seed: CSV output is RFC 4180
(UTF-8, header row, CRLF line endings), JSON is sorted-key with a trailing
newline, rows are sorted by their key columns regardless of worker schedule,
and files are written atomically (temp file + rename). Wall-clock fields are
only emitted under --timings so that default outputs are byte-reproducible.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import raster
from .geometry import Intrinsics, PoseSE3, pose_looking
from .metrics import hausdorff, ssim, ssim_depth
from .ply import load_pointcloud_ply
from .policies import (
    OraclePolicy,
    SpatialPolicy,
    TemporalPolicy,
    geodesic_curve,
    overlap_curve,
    select_frames,
)
from .reconstruction import Concat, Fused, FusedIcp, IcpParams, reconstruct_session
from .session import Session, _atomic_bytes, load_session, save_session
from .synthetic import (
    BoxScene,
    LinearTrajectory,
    OrbitTrajectory,
    generate_session,
    scene_ground_truth_cloud,
)
from .warping import DEFAULT_AREA_PERCENTILE, warp_frame

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_SVG_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


# ---------------------------------------------------------------------------
# flag parsing helpers


def _parse_triple(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    try:
        x, y, z = (float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return (x, y, z)


def _parse_int_list(text: str) -> list[int]:
    """Comma list of integers where each item may be a range A..B or A..B:S."""
    out: list[int] = []
    for item in text.split(","):
        item = item.strip()
        if ".." in item:
            bounds, _, step_s = item.partition(":")
            lo_s, _, hi_s = bounds.partition("..")
            try:
                lo, hi = int(lo_s), int(hi_s)
                step = int(step_s) if step_s else 1
            except ValueError as exc:
                raise argparse.ArgumentTypeError(str(exc)) from None
            if step < 1 or hi < lo:
                raise argparse.ArgumentTypeError(f"bad range {item!r}")
            out.extend(range(lo, hi + 1, step))
        else:
            try:
                out.append(int(item))
            except ValueError as exc:
                raise argparse.ArgumentTypeError(str(exc)) from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _parse_float_list(text: str) -> list[float]:
    try:
        out = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value) -> str:
    """Canonical cell text: shortest round-trip reprs, blanks for None."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: str, header: list[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in header])
    _atomic_bytes(path, buf.getvalue().encode("utf-8"))


def _write_json(path: str, doc: dict) -> None:
    _atomic_bytes(path, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def _svg_line_chart(
    series: list[tuple[str, list[tuple[float, float]]]],
    title: str,
    xlabel: str,
    ylabel: str,
    width: int = 640,
    height: int = 400,
) -> str:
    """Minimal self-contained SVG line chart (no external dependencies)."""
    ml, mr, mt, mb = 60, 140, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    pts = [(x, y) for _, data in series for x, y in data if math.isfinite(x) and math.isfinite(y)]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    ypad = 0.05 * (y1 - y0)
    y0, y1 = y0 - ypad, y1 + ypad

    def px(x: float) -> float:
        return ml + pw * (x - x0) / (x1 - x0)

    def py(y: float) -> float:
        return mt + ph * (1.0 - (y - y0) / (y1 - y0))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="15">{title}</text>',
    ]
    for i in range(5):
        gy = mt + ph * i / 4
        val = y1 - (y1 - y0) * i / 4
        parts.append(
            f'<line x1="{ml}" y1="{gy:.1f}" x2="{ml + pw}" y2="{gy:.1f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(f'<text x="{ml - 6}" y="{gy + 4:.1f}" text-anchor="end">{val:.3g}</text>')
    for i in range(5):
        gx = ml + pw * i / 4
        val = x0 + (x1 - x0) * i / 4
        parts.append(
            f'<text x="{gx:.1f}" y="{mt + ph + 18}" text-anchor="middle">{val:.3g}</text>'
        )
    parts.append(
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333333"/>'
    )
    parts.append(
        f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {mt + ph / 2:.1f})">{ylabel}</text>'
    )
    for idx, (label, data) in enumerate(series):
        color = _SVG_PALETTE[idx % len(_SVG_PALETTE)]
        coords = " ".join(
            f"{px(x):.2f},{py(y):.2f}" for x, y in data if math.isfinite(x) and math.isfinite(y)
        )
        if coords:
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
            )
        ly = mt + 16 + 18 * idx
        parts.append(
            f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 34}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{ml + pw + 40}" y="{ly}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _percentiles(values: list[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "mean": float(arr.mean()),
        "median": float(np.median(arr)),
        "p10": float(np.percentile(arr, 10)),
        "p90": float(np.percentile(arr, 90)),
    }


# ---------------------------------------------------------------------------
# synth


def _build_intrinsics(args) -> Intrinsics:
    cx = args.cx if args.cx is not None else (args.width - 1) / 2.0
    cy = args.cy if args.cy is not None else (args.height - 1) / 2.0
    fy = args.fy if args.fy is not None else args.fx
    return Intrinsics(fx=args.fx, fy=fy, cx=cx, cy=cy, width=args.width, height=args.height)


def cmd_synth(args) -> int:
    k = _build_intrinsics(args)
    scene = BoxScene(extents=args.extents)
    ext = np.asarray(args.extents, dtype=np.float64)
    if args.traj == "linear":
        direction = args.direction if args.direction is not None else tuple(ext / np.linalg.norm(ext))
        start_pos = args.start if args.start is not None else tuple(0.09 * ext)
        look = args.look if args.look is not None else direction
        start = pose_looking(start_pos, look)
        traj = LinearTrajectory(
            start=start, direction=direction, velocity=args.velocity, n_frames=args.frames
        )
    else:
        center = args.orbit_center if args.orbit_center is not None else tuple(ext / 2.0)
        traj = OrbitTrajectory(
            center=center,
            radius=args.orbit_radius,
            angular_rate=args.orbit_rate,
            n_frames=args.frames,
            phase=args.orbit_phase,
            pitch=args.orbit_pitch,
        )
    session = generate_session(
        scene,
        traj,
        k,
        fps=args.fps,
        noise_sigma=args.noise_sigma,
        dropout=args.dropout,
        seed=args.seed,
        supersample=args.supersample,
    )
    save_session(session, args.out)
    print(f"wrote {len(session.frames)}-frame session to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# warp-eval


def _sample_starts(n_frames: int, gap: int, pairs_per_gap: int, seed: int) -> list[int]:
    starts = np.arange(0, n_frames - gap)
    if starts.size > pairs_per_gap:
        rng = np.random.default_rng([seed, gap])
        starts = np.sort(rng.choice(starts, size=pairs_per_gap, replace=False))
    return [int(i) for i in starts]


def cmd_warp_eval(args) -> int:
    session = load_session(args.session)
    k = session.intrinsics
    sources = [s.strip() for s in args.depth_source.split(",") if s.strip()]
    for src in sources:
        if src not in session.depth_sources:
            raise ValueError(
                f"depth source {src!r} not present in every frame; "
                f"available: {session.depth_sources}"
            )
    n = len(session.frames)
    gaps = []
    for gap in args.gaps:
        if gap < 0 or gap >= n:
            logger.warning("warp-eval: gap %d does not fit a %d-frame session, skipped", gap, n)
            continue
        gaps.append(gap)
    work = [
        (gap, i, source)
        for gap in gaps
        for i in _sample_starts(n, gap, args.pairs_per_gap, args.seed)
        for source in sources
    ]

    raster.warmup()

    def evaluate(item):
        gap, i, source = item
        t0 = time.perf_counter()
        dst = session.frames[i + gap]
        res = warp_frame(session.frames[i], source, dst.pose, k, args.area_percentile)
        mask = res.valid_mask if args.mask == "valid" else None
        rgb_s = ssim(res.rgb, dst.rgb, mask=mask)
        depth_s = ssim_depth(res.depth, dst.depth[source], mask=mask)
        return item, {
            "rgb_ssim": rgb_s,
            "depth_ssim": depth_s,
            "overlap": res.overlap_ratio,
            "runtime_s": time.perf_counter() - t0,
        }

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = dict(pool.map(evaluate, work))

    header = [
        "schema_version",
        "row_type",
        "gap",
        "depth_source",
        "src_index",
        "dst_index",
        "n_pairs",
        "rgb_ssim",
        "depth_ssim",
        "overlap",
        "rgb_ssim_median",
        "rgb_ssim_p10",
        "rgb_ssim_p90",
        "depth_ssim_median",
        "depth_ssim_p10",
        "depth_ssim_p90",
        "overlap_median",
        "overlap_p10",
        "overlap_p90",
    ]
    if args.timings:
        header.append("runtime_s")
    rows = []
    for gap in gaps:
        for source in sources:
            cell = [v for (g, i, s), v in results.items() if g == gap and s == source]
            cell.sort(key=lambda v: v["rgb_ssim"])
            stats = {m: _percentiles([v[m] for v in cell]) for m in ("rgb_ssim", "depth_ssim", "overlap")}
            row = {
                "schema_version": SCHEMA_VERSION,
                "row_type": "aggregate",
                "gap": gap,
                "depth_source": source,
                "n_pairs": len(cell),
                "rgb_ssim": stats["rgb_ssim"]["mean"],
                "depth_ssim": stats["depth_ssim"]["mean"],
                "overlap": stats["overlap"]["mean"],
            }
            for metric in ("rgb_ssim", "depth_ssim", "overlap"):
                for stat in ("median", "p10", "p90"):
                    row[f"{metric}_{stat}"] = stats[metric][stat]
            if args.timings:
                row["runtime_s"] = sum(v["runtime_s"] for v in cell)
            rows.append(row)
    if args.per_pair:
        for (gap, i, source) in sorted(results, key=lambda it: (it[0], it[2], it[1])):
            v = results[(gap, i, source)]
            row = {
                "schema_version": SCHEMA_VERSION,
                "row_type": "pair",
                "gap": gap,
                "depth_source": source,
                "src_index": i,
                "dst_index": i + gap,
                "rgb_ssim": v["rgb_ssim"],
                "depth_ssim": v["depth_ssim"],
                "overlap": v["overlap"],
            }
            if args.timings:
                row["runtime_s"] = v["runtime_s"]
            rows.append(row)
    _write_csv(args.out, header, rows)
    if args.plot:
        series = []
        for source in sources:
            data = [
                (float(r["gap"]), r["rgb_ssim"])
                for r in rows
                if r["row_type"] == "aggregate" and r["depth_source"] == source
            ]
            series.append((f"rgb_ssim {source}", data))
        for source in sources:
            data = [
                (float(r["gap"]), r["overlap"])
                for r in rows
                if r["row_type"] == "aggregate" and r["depth_source"] == source
            ]
            series.append((f"overlap {source}", data))
        svg = _svg_line_chart(series, "Warp quality vs frame gap", "frame gap", "score")
        _atomic_bytes(args.plot, svg.encode("utf-8"))
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# recon-eval


def _build_method(args):
    if args.method == "concat":
        return Concat()
    icp = IcpParams(max_correspondence_distance=args.icp_gate)
    if args.method == "fused":
        return Fused(voxel_size=args.voxel_size)
    return FusedIcp(voxel_size=args.voxel_size, icp=icp)


def cmd_recon_eval(args) -> int:
    if (args.gt_cloud is None) == (args.synthetic_box is None):
        raise ValueError("exactly one of --gt-cloud or --synthetic-box is required")
    session = load_session(args.session)
    if args.gt_cloud is not None:
        gt = load_pointcloud_ply(args.gt_cloud)
    else:
        gt = scene_ground_truth_cloud(BoxScene(extents=args.synthetic_box), args.gt_density)
    method = _build_method(args)

    def evaluate(stride: int):
        t0 = time.perf_counter()
        cloud = reconstruct_session(
            session,
            depth_source=args.depth_source,
            frame_stride=stride,
            method=method,
            pixel_stride=args.pixel_stride,
        )
        result = hausdorff(cloud, gt)
        record = {
            "stride": stride,
            "n_points": len(cloud),
            "hausdorff": result.distance,
            "directed_recon_to_gt": result.directed_ab,
            "directed_gt_to_recon": result.directed_ba,
        }
        if args.timings:
            record["runtime_s"] = time.perf_counter() - t0
        return record

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        records = sorted(pool.map(evaluate, args.strides), key=lambda r: r["stride"])

    doc = {
        "schema_version": SCHEMA_VERSION,
        "session": args.session,
        "depth_source": args.depth_source,
        "method": args.method,
        "voxel_size": args.voxel_size,
        "pixel_stride": args.pixel_stride,
        "gt_points": len(gt),
        "records": records,
    }
    _write_json(args.out, doc)
    if args.plot:
        data = [(float(r["stride"]), r["hausdorff"]) for r in records]
        svg = _svg_line_chart(
            [(f"hausdorff {args.depth_source}", data)],
            "Reconstruction error vs frame stride",
            "frame stride",
            "hausdorff (m)",
        )
        _atomic_bytes(args.plot, svg.encode("utf-8"))
    print(f"wrote {len(records)} records to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# policy-eval


_POLICY_HEADER = [
    "schema_version",
    "kind",
    "param",
    "depth_source",
    "n_selected",
    "selection_ratio",
    "consecutive_min_overlap",
    "consecutive_mean_overlap",
    "n_pairs",
    "mean_overlap",
    "min_overlap",
    "max_overlap",
    "selected_indices",
]


def _source_label(session: Session, requested: str | None) -> str:
    if requested is not None:
        return requested
    return "gt" if "gt" in session.depth_sources else session.depth_sources[0]


def cmd_policy_eval(args) -> int:
    session = load_session(args.session)
    raster.warmup()
    rows: list[dict] = []
    plot_series: list[tuple[str, list[tuple[float, float]]]] = []
    if args.curve == "overlap":
        table = overlap_curve(
            session,
            args.gaps,
            depth_source=args.depth_source,
            max_pairs_per_gap=args.pairs_per_gap,
            seed=args.seed,
        )
        for point in table:
            rows.append(
                {
                    "schema_version": SCHEMA_VERSION,
                    "kind": "overlap_curve",
                    "param": point.gap,
                    "depth_source": _source_label(session, args.depth_source),
                    "n_pairs": point.n_pairs,
                    "mean_overlap": point.mean,
                    "min_overlap": point.min,
                    "max_overlap": point.max,
                }
            )
        plot_series.append(("mean overlap", [(float(p.gap), p.mean) for p in table]))
        xlabel = "frame gap"
    elif args.curve == "geodesic":
        table = geodesic_curve(session, args.thresholds, rho=args.rho, depth_source=args.depth_source)
        for point in table:
            rows.append(
                {
                    "schema_version": SCHEMA_VERSION,
                    "kind": "geodesic_curve",
                    "param": point.threshold,
                    "depth_source": _source_label(session, args.depth_source),
                    "n_selected": point.n_selected,
                    "selection_ratio": point.selection_ratio,
                    "consecutive_mean_overlap": point.mean_consecutive_overlap,
                }
            )
        plot_series.append(
            ("selection ratio", [(p.threshold, p.selection_ratio) for p in table])
        )
        xlabel = "geodesic threshold"
    else:
        if args.policy == "temporal":
            params = args.intervals
            policies = [(k, TemporalPolicy(interval=k)) for k in params]
        elif args.policy == "spatial":
            params = args.thresholds
            policies = [(t, SpatialPolicy(threshold=t, rho=args.rho)) for t in params]
        else:
            params = args.min_overlap
            policies = [
                (v, OraclePolicy(min_overlap=v, depth_source=args.depth_source or "gt"))
                for v in params
            ]
        for param, policy in policies:
            report = select_frames(session, policy, depth_source=args.depth_source)
            rows.append(
                {
                    "schema_version": SCHEMA_VERSION,
                    "kind": args.policy,
                    "param": param,
                    "depth_source": report.depth_source,
                    "n_selected": len(report.selected),
                    "selection_ratio": report.selection_ratio,
                    "consecutive_min_overlap": report.min_overlap,
                    "consecutive_mean_overlap": report.mean_overlap,
                    "selected_indices": " ".join(str(i) for i in report.selected),
                }
            )
        plot_series.append(
            (
                f"{args.policy} selection ratio",
                [(float(r["param"]), r["selection_ratio"]) for r in rows],
            )
        )
        xlabel = "policy parameter"
    _write_csv(args.out, _POLICY_HEADER, rows)
    if args.plot:
        svg = _svg_line_chart(plot_series, "Frame-selection policies", xlabel, "value")
        _atomic_bytes(args.plot, svg.encode("utf-8"))
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsewarp",
        description="Sparse RGBD sensing toolkit: synthetic sessions, warping, "
        "reconstruction, and frame-selection policies.",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render a synthetic session")
    p.add_argument("--out", required=True, help="output session directory")
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--traj", choices=("linear", "orbit"), default="linear")
    p.add_argument("--velocity", type=float, default=0.05, help="m per frame (linear)")
    p.add_argument("--direction", type=_parse_triple, default=None, help="x,y,z (linear)")
    p.add_argument("--start", type=_parse_triple, default=None, help="x,y,z start position")
    p.add_argument("--look", type=_parse_triple, default=None, help="x,y,z view direction")
    p.add_argument("--orbit-center", type=_parse_triple, default=None)
    p.add_argument("--orbit-radius", type=float, default=0.8)
    p.add_argument("--orbit-rate", type=float, default=0.05, help="rad per frame")
    p.add_argument("--orbit-phase", type=float, default=0.0)
    p.add_argument("--orbit-pitch", type=float, default=0.0)
    p.add_argument("--extents", type=_parse_triple, default=(6.0, 4.0, 3.0), help="room size x,y,z")
    p.add_argument("--width", type=int, default=160)
    p.add_argument("--height", type=int, default=120)
    p.add_argument("--fx", type=float, default=110.0)
    p.add_argument("--fy", type=float, default=None)
    p.add_argument("--cx", type=float, default=None)
    p.add_argument("--cy", type=float, default=None)
    p.add_argument("--fps", type=float, default=60.0)
    p.add_argument("--noise-sigma", type=float, default=0.0, help="adds a 'noisy' depth source")
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--supersample", type=int, default=1, help="color antialiasing factor")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("warp-eval", help="warp frame pairs and score them")
    p.add_argument("--session", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--depth-source", default="gt", help="comma list of sources to evaluate")
    p.add_argument("--gaps", type=_parse_int_list, default=list(range(10, 101, 10)),
                   help="e.g. 10..100:10 or 0,1,5 (gap 0 compares a frame with itself)")
    p.add_argument("--pairs-per-gap", type=int, default=16)
    p.add_argument("--mask", choices=("valid", "full"), default="valid")
    p.add_argument("--area-percentile", type=float, default=DEFAULT_AREA_PERCENTILE)
    p.add_argument("--per-pair", action="store_true", help="append one row per evaluated pair")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=int, default=None, help="worker threads (default: auto)")
    p.add_argument("--plot", default=None, help="optional SVG output path")
    p.add_argument("--timings", action="store_true", help="include wall-clock columns")
    p.set_defaults(func=cmd_warp_eval)

    p = sub.add_parser("recon-eval", help="reconstruct at several strides and score Hausdorff")
    p.add_argument("--session", required=True)
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--depth-source", default="gt")
    p.add_argument("--strides", type=_parse_int_list, default=[1] + list(range(10, 101, 10)))
    p.add_argument("--method", choices=("concat", "fused", "fused-icp"), default="fused")
    p.add_argument("--voxel-size", type=float, default=0.02)
    p.add_argument("--pixel-stride", type=int, default=4)
    p.add_argument("--icp-gate", type=float, default=0.1, help="ICP correspondence distance")
    p.add_argument("--gt-cloud", default=None, help="ground-truth PLY point cloud")
    p.add_argument("--synthetic-box", type=_parse_triple, default=None,
                   help="room extents x,y,z; compare against the analytic wall cloud")
    p.add_argument("--gt-density", type=float, default=2500.0, help="samples per m^2")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--plot", default=None)
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=cmd_recon_eval)

    p = sub.add_parser("policy-eval", help="frame-selection policies and curves")
    p.add_argument("--session", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--policy", choices=("temporal", "spatial", "oracle"), default=None)
    p.add_argument("--curve", choices=("overlap", "geodesic"), default=None)
    p.add_argument("--intervals", type=_parse_int_list, default=[1, 2, 4, 8])
    p.add_argument("--thresholds", type=_parse_float_list, default=[0.05, 0.1, 0.2, 0.4])
    p.add_argument("--min-overlap", type=_parse_float_list, default=[0.8])
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--gaps", type=_parse_int_list, default=list(range(10, 101, 10)))
    p.add_argument("--pairs-per-gap", type=int, default=200)
    p.add_argument("--depth-source", default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_policy_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "policy-eval" and (args.policy is None) == (args.curve is None):
        parser.error("policy-eval needs exactly one of --policy or --curve")
    try:
        return args.func(args)
    except Exception as exc:  # surface a clean message, exit 1
        logger.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
