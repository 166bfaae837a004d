"""Offline toolkit for headset-style multi-sensor captures: cameras, time-of-flight depth, IMU and tracking."""

__version__ = "0.1.0"
