"""Command-line front end: ``rmkit <subcommand> ...``.

Exit codes: 0 success, 1 usage error (the subcommand's help is printed),
2 data error. Diagnostics go to stderr; machine-readable output only to the
files named on the command line.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from rmkit import __version__
from rmkit.container import format_report, inspect, open_reader, validate
from rmkit.container.format import StreamKind
from rmkit.container.tools import export_streams, report_json
from rmkit.errors import RmkitError
from rmkit.frames import ab_to_visual
from rmkit.geometry.calibration import SensorType
from rmkit.geometry.trajectory import TICKS_PER_SECOND, locate_rig_at
from rmkit.reconstruction import (
    TsdfVolume,
    export_ply,
    extract_mesh,
    pixel_ray,
    read_trajectory,
    trajectory_ate,
    triangulate_midpoint,
    write_trajectory,
)
from rmkit.reconstruction.pipeline import (
    auto_bounds,
    depth_stream,
    frame_cloud,
    frame_indices,
    integrate_recording,
)
from rmkit.reconstruction.pointcloud import FrameTag
from rmkit.simulator.config import dump_config, example_config, load_config
from rmkit.simulator.simulate import simulate_config
from rmkit.sync import associate, default_tolerance

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
MAX_VOXELS = 1 << 26


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(EXIT_USAGE, f"\n{self.prog}: error: {message}\n")


def _ranged(kind, lo=None, hi=None, lo_open=False):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a valid {kind.__name__}: {text!r}") from None
        if lo is not None and (v < lo or (lo_open and v == lo)):
            raise argparse.ArgumentTypeError(f"must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and v > hi:
            raise argparse.ArgumentTypeError(f"must be <= {hi}")
        return v

    return conv


positive = _ranged(float, 0.0, lo_open=True)
nonneg = _ranged(float, 0.0)
count = _ranged(int, 1)
index = _ranged(int, 0)


def _existing(path: str) -> str:
    if not os.path.exists(path):
        raise FileNotFoundError(f"{path}: no such file")
    return path


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- subcommands ----------------------------------------------------------------


def cmd_simulate(a) -> int:
    if a.example_config:
        dump_config(example_config(), a.example_config)
        return EXIT_OK
    if not a.config or not a.out:
        raise UsageError("--config and --out are required (or --example-config PATH)")
    cfg = load_config(_existing(a.config))
    if a.seed is not None:
        cfg = replace(cfg, noise=replace(cfg.noise, seed=a.seed))
    res = simulate_config(cfg, a.out, threads=a.threads)
    _err(f"wrote {res.path} ({sum(res.counts.values())} records) and {res.sidecar}")
    return EXIT_OK


def cmd_inspect(a) -> int:
    rep = inspect(_existing(a.container), pixel_stats=not a.no_pixel_stats)
    sys.stdout.write(format_report(rep))
    if a.json:
        Path(a.json).write_text(report_json(rep))
    return EXIT_OK


def cmd_validate(a) -> int:
    problems = validate(_existing(a.container))
    for p in problems:
        _err(p)
    if problems:
        _err(f"{a.container}: INVALID ({len(problems)} problems)")
        return EXIT_DATA
    _err(f"{a.container}: OK")
    return EXIT_OK


def cmd_sync(a) -> int:
    with open_reader(_existing(a.container)) as r:
        ref = r.descriptor(a.ref)
        tol = default_tolerance(ref.nominal_fps) if a.tol_ms is None else int(round(a.tol_ms * 1e4))
        targets = a.streams or [s for s in sorted(r.descriptors) if s != a.ref]
        for s in targets:
            r.descriptor(s)
        assoc = associate(r.timestamps(a.ref), {s: r.timestamps(s) for s in targets}, tol)
        ref_ts = r.timestamps(a.ref)
        traj = r.head_trajectory() if r.streams_of_kind(StreamKind.HEAD_POSE) else None
    if traj is not None and len(traj) == 0:
        traj = None
    pose_cols = [f"T{i}{j}" for i in range(3) for j in range(4)]
    missing = 0
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["ref_index", "timestamp"]
            + [f"s{s}_{c}" for s in targets for c in ("index", "residual_ticks")]
            + pose_cols
        )
        for row in assoc:
            t = int(ref_ts[row.ref_index])
            cells = [row.ref_index, t]
            for s in targets:
                m = row.matched[s]
                cells += [-1, ""] if m is None else [m, row.residual_ticks[s]]
                missing += m is None
            if traj is None:
                cells += [""] * 12
            else:
                cells += [f"{v:.9g}" for v in locate_rig_at(traj, t).matrix34.ravel()]
            w.writerow(cells)
    _err(f"{len(assoc)} reference frames, tolerance {tol} ticks, {missing} unmatched slots")
    return EXIT_OK


def cmd_unproject(a) -> int:
    with open_reader(_existing(a.container)) as r:
        sid = depth_stream(r, a.stream)
        traj = read_trajectory(_existing(a.trajectory)) if a.trajectory else None
        cloud = frame_cloud(r, sid, a.frame, FrameTag[a.frame_of.upper()], traj)
    export_ply(cloud, a.out)
    _err(f"{len(cloud)} points -> {a.out}")
    return EXIT_OK


def cmd_triangulate(a) -> int:
    with open_reader(_existing(a.container)) as r:
        calib = r.calibration
        ray_a = pixel_ray(calib, SensorType[a.cam_a], a.pixel_a)
        ray_b = pixel_ray(calib, SensorType[a.cam_b], a.pixel_b)
        frame = "rig"
        if a.time is not None:
            T = r.head_trajectory().locate(int(round(a.time * TICKS_PER_SECOND)))
            ray_a, ray_b = ray_a.transformed(T, FrameTag.WORLD), ray_b.transformed(T, FrameTag.WORLD)
            frame = "world"
    point, gap = triangulate_midpoint(ray_a, ray_b)
    doc = {"frame": frame, "point": point.tolist(), "gap_m": gap}
    sys.stdout.write(f"{frame} point {point[0]:.6f} {point[1]:.6f} {point[2]:.6f}  gap {gap:.3e} m\n")
    if a.out:
        Path(a.out).write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_integrate(a) -> int:
    with open_reader(_existing(a.container)) as r:
        sid = depth_stream(r, a.stream)
        traj = read_trajectory(_existing(a.trajectory)) if a.trajectory else r.head_trajectory()
        idx = frame_indices(r.frame_count(sid), a.every, a.max_frames)
        trunc = a.trunc if a.trunc is not None else 4.0 * a.voxel
        if a.bounds:
            lo, hi = np.array(a.bounds[:3]), np.array(a.bounds[3:])
            if np.any(hi <= lo):
                raise UsageError("--bounds needs xmin ymin zmin xmax ymax zmax with max > min")
        else:
            lo, hi = auto_bounds(r, sid, traj, idx, margin=trunc)
        n_vox = int(np.prod(np.ceil((hi - lo) / a.voxel)))
        if n_vox > MAX_VOXELS:
            raise ValueError(f"volume of {n_vox} voxels exceeds {MAX_VOXELS}; pass tighter --bounds or a larger --voxel")
        vol = TsdfVolume.from_bounds(lo, hi, a.voxel, truncation=trunc, max_weight=a.max_weight)
        n = integrate_recording(r, vol, sid, traj, idx, threads=a.threads)
    vol.save(a.out)
    _err(f"fused {n} frames into {'x'.join(map(str, vol.dims))} voxels -> {a.out}")
    return EXIT_OK


def cmd_mesh(a) -> int:
    vol = TsdfVolume.load(_existing(a.volume))
    mesh = extract_mesh(vol)
    export_ply(mesh, a.out)
    _err(f"{len(mesh.vertices)} vertices, {len(mesh.triangles)} triangles -> {a.out}")
    return EXIT_OK


def cmd_ate(a) -> int:
    est = read_trajectory(_existing(a.estimate))
    ref = read_trajectory(_existing(a.reference))
    res = trajectory_ate(est, ref, int(round(a.tol_ms * 1e4)))
    sys.stdout.write(f"rmse {res.rmse:.6f} m over {len(res.residuals)} pairs\n")
    if a.json:
        Path(a.json).write_text(json.dumps(res.report(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_export(a) -> int:
    src = _existing(a.container)
    files = export_streams(src, a.out)
    out = Path(a.out)
    with open_reader(src) as r:
        if r.streams_of_kind(StreamKind.HEAD_POSE):
            write_trajectory(r.head_trajectory(), out / "head_trajectory.txt")
            files.append(out / "head_trajectory.txt")
        if a.ab_gamma is not None:
            for d in r.streams_of_kind(StreamKind.DEPTH_LONG_THROW) + r.streams_of_kind(StreamKind.DEPTH_AHAT):
                for i, pkt in enumerate(r.cursor(d.stream_id)):
                    img = ab_to_visual(pkt.ab, a.ab_gamma)
                    p = out / f"stream{d.stream_id:02d}_ab{i:05d}.pgm"
                    h, w = img.shape
                    p.write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes())
                    files.append(p)
    _err(f"wrote {len(files)} files to {out}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rmkit", description="Record, inspect and reconstruct multi-sensor rig captures.")
    p.add_argument("--version", action="version", version=f"rmkit {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    threads_default = os.cpu_count() or 1
    sensors = [s.name for s in SensorType if s.is_camera]

    s = sub.add_parser("simulate", help="synthesize a capture from a JSON scene config")
    s.add_argument("--config", help="simulation config (JSON)")
    s.add_argument("--out", help="output container path")
    s.add_argument("--seed", type=_ranged(int, 0, 2**64 - 1), help="override the noise seed")
    s.add_argument("--threads", type=count, default=threads_default)
    s.add_argument("--example-config", metavar="PATH", help="write an example config and exit")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("inspect", help="print a per-stream summary")
    s.add_argument("container")
    s.add_argument("--json", metavar="PATH", help="also write the report as JSON")
    s.add_argument("--no-pixel-stats", action="store_true", help="skip invalid-pixel statistics")
    s.set_defaults(func=cmd_inspect)

    s = sub.add_parser("validate", help="check structure, CRC and frame contents")
    s.add_argument("container")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("sync", help="associate streams with a reference stream by timestamp")
    s.add_argument("container")
    s.add_argument("--ref", type=index, required=True, help="reference stream id")
    s.add_argument("--streams", type=index, nargs="+", help="target stream ids (default: all others)")
    s.add_argument("--tol-ms", type=nonneg, help="tolerance in ms (default: half the reference period)")
    s.add_argument("--out", required=True, help="association table (CSV)")
    s.set_defaults(func=cmd_sync)

    s = sub.add_parser("unproject", help="Long Throw frame to a PLY point cloud")
    s.add_argument("container")
    s.add_argument("--frame", type=index, default=0, help="frame index")
    s.add_argument("--stream", type=index, help="Long Throw stream id (default: first)")
    s.add_argument("--frame-of", choices=["camera", "rig", "world"], default="world")
    s.add_argument("--trajectory", help="world_from_rig trajectory file (default: head pose stream)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_unproject)

    s = sub.add_parser("triangulate", help="intersect two pixel rays")
    s.add_argument("container", help="container providing the calibration")
    s.add_argument("--cam-a", choices=sensors, default="LEFT_FRONT")
    s.add_argument("--pixel-a", type=float, nargs=2, required=True, metavar=("U", "V"))
    s.add_argument("--cam-b", choices=sensors, default="RIGHT_FRONT")
    s.add_argument("--pixel-b", type=float, nargs=2, required=True, metavar=("U", "V"))
    s.add_argument("--time", type=nonneg, help="seconds; report in world coordinates at this time")
    s.add_argument("--out", help="write the result as JSON")
    s.set_defaults(func=cmd_triangulate)

    s = sub.add_parser("integrate", help="fuse Long Throw frames into a TSDF volume")
    s.add_argument("container")
    s.add_argument("--voxel", type=positive, default=0.02, help="voxel size in m")
    s.add_argument("--trunc", type=positive, help="truncation distance mu in m (default 4 voxels)")
    s.add_argument("--max-weight", type=_ranged(float, 1.0), default=64.0)
    s.add_argument("--bounds", type=float, nargs=6, metavar="B", help="xmin ymin zmin xmax ymax zmax")
    s.add_argument("--stream", type=index)
    s.add_argument("--every", type=count, default=1, help="use every n-th frame")
    s.add_argument("--max-frames", type=count)
    s.add_argument("--trajectory", help="world_from_rig trajectory file (default: head pose stream)")
    s.add_argument("--threads", type=count, default=threads_default)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_integrate)

    s = sub.add_parser("mesh", help="extract the zero level set of a TSDF volume as PLY")
    s.add_argument("volume")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mesh)

    s = sub.add_parser("ate", help="absolute trajectory error between two trajectory files")
    s.add_argument("estimate")
    s.add_argument("reference")
    s.add_argument("--tol-ms", type=nonneg, default=10.0, help="association tolerance in ms")
    s.add_argument("--json", metavar="PATH")
    s.set_defaults(func=cmd_ate)

    s = sub.add_parser("export", help="dump raw streams, timestamps and the head trajectory")
    s.add_argument("container")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--ab-gamma", type=positive, help="also write AB images (PGM) with this gamma")
    s.set_defaults(func=cmd_export)
    p.subcommands = sub.choices
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        parser.subcommands[args.command].print_help(sys.stderr)
        _err(f"rmkit {args.command}: error: {e}")
        return EXIT_USAGE
    except (RmkitError, ValueError, KeyError, OSError) as e:
        _err(f"rmkit {args.command}: {type(e).__name__}: {e}")
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
