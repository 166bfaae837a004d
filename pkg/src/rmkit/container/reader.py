from __future__ import annotations

import mmap
import os
import zlib
from dataclasses import dataclass

import numpy as np

from rmkit.container.format import (
    HEADER_PREFIX,
    INDEX_ENTRY,
    INDEX_MAGIC,
    INDEX_PREFIX,
    INDEX_STREAM,
    MAGIC,
    RECORD_HEADER,
    STREAM_COUNT,
    TRAILER,
    VERSION_MAJOR,
    FrameRecord,
    StreamDescriptor,
    StreamKind,
    decode_descriptor,
    decode_payload,
)
from rmkit.errors import (
    BadMagic,
    CorruptContainer,
    IndexOutOfRange,
    UnknownStream,
    UnsupportedVersion,
)
from rmkit.geometry.calibration import RigCalibration, calibration_from_text
from rmkit.geometry.trajectory import PoseTrajectory

_CRC_CHUNK = 1 << 24


def _crc32(buf, end: int) -> int:
    crc = 0
    for start in range(0, end, _CRC_CHUNK):
        crc = zlib.crc32(buf[start : min(end, start + _CRC_CHUNK)], crc)
    return crc


@dataclass(frozen=True)
class ContainerIndex:
    """Per-stream ``(timestamp, file_offset)`` tables."""

    entries: dict[int, np.ndarray]

    def count(self, stream_id: int) -> int:
        return len(self.entries[stream_id])

    def timestamps(self, stream_id: int) -> np.ndarray:
        return self.entries[stream_id]["timestamp"]

    @property
    def counts(self) -> dict[int, int]:
        return {sid: len(e) for sid, e in self.entries.items()}


def verify_crc(path) -> bool:
    """True when the trailing CRC-32 matches the file contents."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4:
        return False
    return zlib.crc32(data[:-4]) == int.from_bytes(data[-4:], "little")


class Reader:
    """Read-only view of a finalized container.

    The file is memory-mapped; records are decoded on demand. Several readers
    may open the same file concurrently. Cursors returned by :meth:`cursor`
    are plain iterators and belong to the thread that drives them.
    """

    def __init__(self, path):
        self.path = os.fspath(path)
        self._fh = open(self.path, "rb")
        size = os.fstat(self._fh.fileno()).st_size
        if size == 0:
            self._fh.close()
            raise BadMagic(f"{self.path}: empty file")
        self._mm = mmap.mmap(self._fh.fileno(), 0, access=mmap.ACCESS_READ)
        try:
            self._parse(size)
        except Exception:
            self.close()
            raise

    def _parse(self, size: int) -> None:
        mm = self._mm
        if size < HEADER_PREFIX.size or mm[:4] != MAGIC:
            raise BadMagic(f"{self.path}: not an RMRC container")
        _, major, minor, calib_len = HEADER_PREFIX.unpack_from(mm, 0)
        if major != VERSION_MAJOR:
            raise UnsupportedVersion(f"container version {major}.{minor}; this reader handles {VERSION_MAJOR}.x")
        self.version = (major, minor)
        if size < HEADER_PREFIX.size + TRAILER.size:
            raise CorruptContainer("file too short")
        index_offset, crc = TRAILER.unpack_from(mm, size - TRAILER.size)
        if _crc32(mm, size - 4) != crc:
            raise CorruptContainer(f"{self.path}: CRC-32 mismatch (truncated or modified file)")

        pos = HEADER_PREFIX.size
        try:
            text = bytes(mm[pos : pos + calib_len]).decode("utf-8")
            pos += calib_len
            (n_streams,) = STREAM_COUNT.unpack_from(mm, pos)
            pos += STREAM_COUNT.size
            descriptors: list[StreamDescriptor] = []
            for _ in range(n_streams):
                d, pos = decode_descriptor(mm, pos)
                descriptors.append(d)
        except (UnicodeDecodeError, ValueError, IndexError) as e:
            raise CorruptContainer(f"bad header: {e}") from e
        self.header_size = pos
        self.calibration_text = text
        ids = [d.stream_id for d in descriptors]
        if len(set(ids)) != len(ids):
            raise CorruptContainer("duplicate stream ids in header")
        self.descriptors = {d.stream_id: d for d in descriptors}
        cameras = {d.sensor_type: d.camera for d in descriptors if d.camera is not None and d.sensor_type is not None}
        try:
            self.calibration: RigCalibration = calibration_from_text(text, cameras)
        except (ValueError, KeyError) as e:
            raise CorruptContainer(f"bad calibration document: {e}") from e

        self.index = self._parse_index(index_offset, size - TRAILER.size, ids)

    def _parse_index(self, start: int, end: int, ids) -> ContainerIndex:
        mm = self._mm
        if not self.header_size <= start <= end - INDEX_PREFIX.size:
            raise CorruptContainer("index offset out of range")
        magic, n = INDEX_PREFIX.unpack_from(mm, start)
        if magic != INDEX_MAGIC or n != len(ids):
            raise CorruptContainer("bad index header")
        pos = start + INDEX_PREFIX.size
        entries = {}
        for expected in ids:
            if pos + INDEX_STREAM.size > end:
                raise CorruptContainer("index truncated")
            sid, count = INDEX_STREAM.unpack_from(mm, pos)
            pos += INDEX_STREAM.size
            nbytes = count * INDEX_ENTRY.itemsize
            if sid != expected or pos + nbytes > end:
                raise CorruptContainer("index stream table inconsistent with header")
            e = np.frombuffer(mm, dtype=INDEX_ENTRY, count=count, offset=pos).copy()
            pos += nbytes
            if count > 1 and not (np.all(np.diff(e["offset"].astype(np.int64)) > 0) and np.all(e["timestamp"][1:] > e["timestamp"][:-1])):
                raise CorruptContainer(f"stream {sid}: index offsets/timestamps not increasing")
            entries[sid] = e
        if pos != end:
            raise CorruptContainer("trailing bytes after index")
        # every record must sit between the header and the index
        all_off = np.sort(np.concatenate([e["offset"] for e in entries.values()] or [np.zeros(0, np.uint64)]))
        cursor = self.header_size
        for off in all_off.tolist():
            if off != cursor:
                raise CorruptContainer(f"record at offset {off} does not follow the previous record (expected {cursor})")
            sid, _, plen, ts, _, _ = RECORD_HEADER.unpack_from(mm, off)
            e = entries.get(sid)
            if e is None:
                raise CorruptContainer(f"record for unknown stream {sid}")
            cursor = off + RECORD_HEADER.size + plen
        if cursor != start:
            raise CorruptContainer("gap between the last record and the index")
        for sid, e in entries.items():
            for ts, off in zip(e["timestamp"].tolist(), e["offset"].tolist()):
                rsid, _, _, rts, _, _ = RECORD_HEADER.unpack_from(mm, off)
                if rsid != sid or rts != ts:
                    raise CorruptContainer(f"index entry for stream {sid} disagrees with record header")
        return ContainerIndex(entries)

    # -- access -----------------------------------------------------------------

    def close(self) -> None:
        if getattr(self, "_mm", None) is not None:
            self._mm.close()
            self._mm = None
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def descriptor(self, stream_id: int) -> StreamDescriptor:
        try:
            return self.descriptors[stream_id]
        except KeyError:
            raise UnknownStream(f"no stream with id {stream_id}") from None

    def streams_of_kind(self, kind: StreamKind) -> list[StreamDescriptor]:
        return [d for d in self.descriptors.values() if d.kind is StreamKind(kind)]

    def frame_count(self, stream_id: int) -> int:
        self.descriptor(stream_id)
        return self.index.count(stream_id)

    def timestamps(self, stream_id: int) -> np.ndarray:
        self.descriptor(stream_id)
        return self.index.timestamps(stream_id)

    def read_record(self, stream_id: int, i: int) -> FrameRecord:
        n = self.frame_count(stream_id)
        if not 0 <= i < n:
            raise IndexOutOfRange(f"stream {stream_id} has {n} frames; index {i} requested")
        off = int(self.index.entries[stream_id]["offset"][i])
        sid, _, plen, ts, exposure, gain = RECORD_HEADER.unpack_from(self._mm, off)
        start = off + RECORD_HEADER.size
        return FrameRecord(sid, ts, bytes(self._mm[start : start + plen]), exposure, gain)

    def read_frame(self, stream_id: int, i: int):
        """Decode frame ``i`` of a stream into its frame type."""
        return decode_payload(self.descriptor(stream_id), self.read_record(stream_id, i))

    def cursor(self, stream_id: int, decode: bool = True):
        """Sequential iterator over one stream's frames, in timestamp order."""
        for i in range(self.frame_count(stream_id)):
            yield self.read_frame(stream_id, i) if decode else self.read_record(stream_id, i)

    def records(self):
        """Every record in file order."""
        order = sorted((int(off), sid, i) for sid, e in self.index.entries.items() for i, off in enumerate(e["offset"]))
        for _, sid, i in order:
            yield self.read_record(sid, i)

    def head_trajectory(self) -> PoseTrajectory:
        """World-from-rig samples from the first head-pose stream."""
        heads = self.streams_of_kind(StreamKind.HEAD_POSE)
        if not heads:
            raise UnknownStream("container has no head pose stream")
        sid = heads[0].stream_id
        return PoseTrajectory(self.timestamps(sid), tuple(self.cursor(sid)))


def open_reader(path) -> Reader:
    return Reader(path)
