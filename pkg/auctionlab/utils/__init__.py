"""
Utility Functions Package

File handling and small numerical helpers shared across auctionlab.
"""

from .file_handler import FileHandler, FileOperationError
from .numerics import bisect_increasing, first_argmax, mean_and_stderr

__all__ = [
    "FileHandler",
    "FileOperationError",
    "bisect_increasing",
    "first_argmax",
    "mean_and_stderr",
]
