"""Exception hierarchy shared by every rmkit module."""

from __future__ import annotations


class RmkitError(Exception):
    """Base class for all toolkit errors."""


# geometry
class OutOfBounds(RmkitError, ValueError):
    pass


class BehindCamera(RmkitError, ValueError):
    pass


class OutOfView(RmkitError, ValueError):
    pass


class UnknownSensor(RmkitError, KeyError):
    pass


class EmptyTrajectory(RmkitError, ValueError):
    pass


# frames
class ModeMismatch(RmkitError, ValueError):
    pass


class DimensionMismatch(RmkitError, ValueError):
    pass


class DomainError(RmkitError, ValueError):
    pass


class MalformedFrame(RmkitError, ValueError):
    """Buffer contents violate the encoding of their stream."""


# container
class ContainerError(RmkitError):
    pass


class BadMagic(ContainerError):
    pass


class UnsupportedVersion(ContainerError):
    pass


class CorruptContainer(ContainerError):
    pass


class DuplicateStreamId(ContainerError, ValueError):
    pass


class NonMonotonicTimestamp(ContainerError, ValueError):
    pass


class PayloadSizeMismatch(ContainerError, ValueError):
    pass


class WriterClosed(ContainerError):
    pass


class IndexOutOfRange(ContainerError, IndexError):
    pass


class UnknownStream(ContainerError, KeyError):
    pass


# sync / reconstruction / simulator
class UnsortedInput(RmkitError, ValueError):
    pass


class NearParallel(RmkitError, ValueError):
    pass


class InsufficientOverlap(RmkitError, ValueError):
    pass


class UnknownTarget(RmkitError, ValueError):
    pass
