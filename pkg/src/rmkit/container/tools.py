"""Container utilities: inspection report, validation, export, rewrite."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from rmkit.container.format import PixelFormat, depth_mode_of
from rmkit.container.reader import Reader, open_reader
from rmkit.container.writer import create_writer
from rmkit.errors import ContainerError, MalformedFrame
from rmkit.frames import (
    AHAT_INVALID,
    DepthMode,
    DepthPacket,
    VLC_SHAPE,
)
from rmkit.geometry.trajectory import TICKS_PER_SECOND


def _stream_stats(reader: Reader, sid: int, pixel_stats: bool) -> dict:
    d = reader.descriptor(sid)
    ts = reader.timestamps(sid).astype(np.int64)
    n = len(ts)
    entry = {
        "stream_id": sid,
        "kind": d.kind.name,
        "width": d.width,
        "height": d.height,
        "pixel_format": d.pixel_format.name,
        "nominal_fps": d.nominal_fps,
        "count": n,
        "first_timestamp": int(ts[0]) if n else None,
        "last_timestamp": int(ts[-1]) if n else None,
    }
    span = (ts[-1] - ts[0]) / TICKS_PER_SECOND if n > 1 else 0.0
    entry["duration_s"] = float(span)
    entry["fps_estimate"] = float((n - 1) / span) if span > 0 else None
    if d.pixel_format is PixelFormat.VEC3_BATCH:
        # IMU rates are per sample, not per batch
        samples = [b.timestamps for b in reader.cursor(sid)]
        st = np.concatenate(samples).astype(np.int64) if samples else np.zeros(0, np.int64)
        sspan = (st[-1] - st[0]) / TICKS_PER_SECOND if len(st) > 1 else 0.0
        entry["sample_count"] = int(len(st))
        entry["fps_estimate"] = float((len(st) - 1) / sspan) if sspan > 0 else None
    mode = depth_mode_of(d.kind)
    if pixel_stats and mode is not None:
        invalid = 0
        total = 0
        for pkt in reader.cursor(sid):
            if mode is DepthMode.AHAT:
                invalid += int(np.count_nonzero(pkt.depth.depth == AHAT_INVALID))
            else:
                invalid += int(np.count_nonzero(pkt.sigma.invalid))
            total += pkt.depth.depth.size
        entry["invalid_pixel_fraction"] = invalid / total if total else None
    return entry


def inspect(path, pixel_stats: bool = True) -> dict:
    """Deterministic summary of a container as a JSON-serializable dict."""
    with open_reader(path) as r:
        streams = [_stream_stats(r, sid, pixel_stats) for sid in sorted(r.descriptors)]
        firsts = [s["first_timestamp"] for s in streams if s["count"]]
        lasts = [s["last_timestamp"] for s in streams if s["count"]]
        return {
            "path": os.path.basename(os.fspath(path)),
            "version": "%d.%d" % r.version,
            "sensor_count": len(r.calibration),
            "stream_count": len(streams),
            "frame_count": sum(s["count"] for s in streams),
            "duration_s": (max(lasts) - min(firsts)) / TICKS_PER_SECOND if firsts else 0.0,
            "streams": streams,
        }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def format_report(report: dict) -> str:
    lines = [
        f"{report['path']}  version {report['version']}  "
        f"{report['stream_count']} streams  {report['frame_count']} records  {report['duration_s']:.3f} s",
        f"{'id':>4} {'kind':<17} {'size':>9} {'format':<11} {'fps':>7} {'count':>6} {'est fps':>8} {'invalid':>8}",
    ]
    for s in report["streams"]:
        size = f"{s['width']}x{s['height']}" if s["width"] else "-"
        est = f"{s['fps_estimate']:.2f}" if s["fps_estimate"] else "-"
        inv = s.get("invalid_pixel_fraction")
        inv = f"{100 * inv:.2f}%" if inv is not None else "-"
        lines.append(
            f"{s['stream_id']:>4} {s['kind']:<17} {size:>9} {s['pixel_format']:<11} "
            f"{s['nominal_fps']:>7.2f} {s['count']:>6} {est:>8} {inv:>8}"
        )
    return "\n".join(lines) + "\n"


def validate(path) -> list[str]:
    """Full structural and content check. Returns a list of violations (empty when valid)."""
    problems: list[str] = []
    try:
        r = open_reader(path)
    except ContainerError as e:
        return [f"{type(e).__name__}: {e}"]
    with r:
        for sid, d in sorted(r.descriptors.items()):
            if d.is_image:
                rows, cols = (d.height, d.width)
                if d.kind.sensor_type is not None and d.kind.sensor_type.is_vlc and (rows, cols) != VLC_SHAPE:
                    problems.append(f"stream {sid}: VLC frames must be 640x480")
                sensor = d.kind.sensor_type
                if sensor not in r.calibration:
                    problems.append(f"stream {sid}: {d.kind.name} missing from the rig calibration")
            for i in range(r.frame_count(sid)):
                try:
                    obj = r.read_frame(sid, i)
                    if isinstance(obj, DepthPacket):
                        obj.depth.check_values()
                except (ContainerError, MalformedFrame, ValueError) as e:
                    problems.append(f"stream {sid} frame {i}: {e}")
    return problems


def copy_container(src, dst) -> None:
    """Rewrite a container record by record. The output is byte-identical."""
    with open_reader(src) as r:
        descs = [r.descriptors[sid] for sid in r.descriptors]
        with create_writer(dst, r.calibration, descs) as w:
            for rec in r.records():
                w.append_frame(rec)


def export_streams(path, out_dir) -> list[Path]:
    """One raw binary (concatenated payloads) and one timestamp text file per stream."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    with open_reader(path) as r:
        for sid, d in sorted(r.descriptors.items()):
            stem = f"stream{sid:02d}_{d.kind.name.lower()}"
            bin_path = out / f"{stem}.bin"
            ts_path = out / f"{stem}_timestamps.txt"
            with open(bin_path, "wb") as fh:
                for rec in r.cursor(sid, decode=False):
                    fh.write(rec.payload)
            ts_path.write_text("".join(f"{int(t)}\n" for t in r.timestamps(sid)))
            written += [bin_path, ts_path]
    return written


__all__ = ["copy_container", "export_streams", "format_report", "inspect", "report_json", "validate"]
