from rmkit.container.format import (
    FrameRecord,
    PixelFormat,
    StreamDescriptor,
    StreamKind,
    decode_payload,
    encode_payload,
)
from rmkit.container.reader import ContainerIndex, Reader, open_reader, verify_crc
from rmkit.container.tools import copy_container, export_streams, format_report, inspect, validate
from rmkit.container.writer import Writer, append_frame, create_writer, finalize

__all__ = [
    "ContainerIndex",
    "FrameRecord",
    "PixelFormat",
    "Reader",
    "StreamDescriptor",
    "StreamKind",
    "Writer",
    "append_frame",
    "copy_container",
    "create_writer",
    "decode_payload",
    "encode_payload",
    "export_streams",
    "finalize",
    "format_report",
    "inspect",
    "open_reader",
    "validate",
    "verify_crc",
]
