"""Struct-IoU: structure-aware evaluation of constituency trees over speech and text segments."""

__version__ = "0.1.0"
