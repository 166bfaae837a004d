from __future__ import annotations

import os
import zlib

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
    VERSION_MAJOR,
    VERSION_MINOR,
    FrameRecord,
    encode_descriptor,
    encode_payload,
    record_timestamp,
)
from rmkit.errors import (
    DuplicateStreamId,
    NonMonotonicTimestamp,
    PayloadSizeMismatch,
    UnknownStream,
    WriterClosed,
)
from rmkit.geometry.calibration import RigCalibration


def build_header(calibration: RigCalibration, descriptors) -> bytes:
    text = calibration.to_text().encode("utf-8")
    parts = [HEADER_PREFIX.pack(MAGIC, VERSION_MAJOR, VERSION_MINOR, len(text)), text]
    parts.append(STREAM_COUNT.pack(len(descriptors)))
    parts.extend(encode_descriptor(d) for d in descriptors)
    return b"".join(parts)


class Writer:
    """Single-threaded container writer. Use :func:`create_writer`."""

    def __init__(self, path, calibration: RigCalibration, descriptors):
        descriptors = list(descriptors)
        seen = set()
        for d in descriptors:
            if d.stream_id in seen:
                raise DuplicateStreamId(f"stream id {d.stream_id} used twice")
            seen.add(d.stream_id)
        with_tables = {d.sensor_type for d in descriptors if d.camera is not None}
        for s in calibration:
            if s.camera is not None and s.camera.params is None and s.sensor_type not in with_tables:
                raise ValueError(f"{s.sensor_type.name}: table-only camera needs a stream descriptor to carry it")
        self.path = os.fspath(path)
        self.calibration = calibration
        self.descriptors = {d.stream_id: d for d in descriptors}
        self._order = [d.stream_id for d in descriptors]
        self._index: dict[int, list[tuple[int, int]]] = {sid: [] for sid in self._order}
        self._fh = open(self.path, "wb")
        self._crc = 0
        self._offset = 0
        self._closed = False
        self._write(build_header(calibration, descriptors))

    def _write(self, data: bytes) -> None:
        self._fh.write(data)
        self._crc = zlib.crc32(data, self._crc)
        self._offset += len(data)

    @property
    def closed(self) -> bool:
        return self._closed

    def append_frame(self, rec: FrameRecord) -> None:
        if self._closed:
            raise WriterClosed("writer already finalized")
        desc = self.descriptors.get(rec.stream_id)
        if desc is None:
            raise UnknownStream(f"no stream with id {rec.stream_id}")
        entries = self._index[rec.stream_id]
        if not 0 <= rec.timestamp < 2**64:
            raise ValueError("timestamp must fit in an unsigned 64-bit integer")
        if entries and rec.timestamp <= entries[-1][0]:
            raise NonMonotonicTimestamp(
                f"stream {rec.stream_id}: timestamp {rec.timestamp} after {entries[-1][0]}"
            )
        if not desc.payload_size_ok(rec.payload_len):
            raise PayloadSizeMismatch(f"stream {rec.stream_id} ({desc.kind.name}): {rec.payload_len} bytes")
        entries.append((rec.timestamp, self._offset))
        head = RECORD_HEADER.pack(rec.stream_id, 0, rec.payload_len, rec.timestamp, rec.exposure, rec.gain)
        self._write(head + bytes(rec.payload))

    def append(self, stream_id: int, obj, exposure: float = 0.0, gain: float = 0.0) -> None:
        """Encode a frame object and append it."""
        desc = self.descriptors.get(stream_id)
        if desc is None:
            raise UnknownStream(f"no stream with id {stream_id}")
        if hasattr(obj, "depth") and hasattr(obj.depth, "exposure"):
            exposure, gain = obj.depth.exposure, obj.depth.gain
        elif hasattr(obj, "exposure"):
            exposure, gain = obj.exposure, obj.gain
        payload = encode_payload(desc, obj)
        self.append_frame(FrameRecord(stream_id, record_timestamp(obj), payload, exposure, gain))

    def finalize(self) -> None:
        if self._closed:
            raise WriterClosed("finalize called twice")
        index_offset = self._offset
        parts = [INDEX_PREFIX.pack(INDEX_MAGIC, len(self._order))]
        for sid in self._order:
            entries = np.array(self._index[sid], dtype=INDEX_ENTRY)
            parts.append(INDEX_STREAM.pack(sid, len(entries)))
            parts.append(entries.tobytes())
        self._write(b"".join(parts))
        self._write(index_offset.to_bytes(8, "little"))
        # the CRC covers everything before it, including the index offset
        self._fh.write(self._crc.to_bytes(4, "little"))
        self._fh.close()
        self._closed = True

    def abort(self) -> None:
        if not self._closed:
            self._fh.close()
            self._closed = True

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            if not self._closed:
                self.finalize()
        else:
            self.abort()


def create_writer(path, calibration: RigCalibration, descriptors) -> Writer:
    return Writer(path, calibration, descriptors)


def append_frame(w: Writer, rec: FrameRecord) -> None:
    w.append_frame(rec)


def finalize(w: Writer) -> None:
    w.finalize()
