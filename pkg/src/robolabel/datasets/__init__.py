"""Dataset adapters and the format registry.

Importing this package registers every built-in format; ``detect_format``
and ``open_dataset`` are the entry points the service layer uses.
"""

from __future__ import annotations

from .base import (
    DatasetBase,
    DatasetError,
    EpisodeDecodeError,
    FormatMismatchError,
    ImageFrame,
    IndexEntry,
    UnknownEpisodeError,
    detect_format,
    open_dataset,
    register_format,
    registered_formats,
)
from .media import FramesDataset, VideoDataset, detect_frames, detect_video
from .reassemble import ReassembleDataset, detect_reassemble
from .rlds import RldsDataset, detect_rlds
from .rosbag import Ros1BagDataset, Ros2BagDataset, detect_rosbag1, detect_rosbag2

register_format("rlds", detect_rlds, RldsDataset)
register_format("video", detect_video, VideoDataset)
register_format("frames", detect_frames, FramesDataset)
register_format("rosbag1", detect_rosbag1, Ros1BagDataset)
register_format("rosbag2", detect_rosbag2, Ros2BagDataset)
register_format("reassemble", detect_reassemble, ReassembleDataset)

__all__ = [
    "DatasetBase",
    "DatasetError",
    "EpisodeDecodeError",
    "FormatMismatchError",
    "FramesDataset",
    "ImageFrame",
    "IndexEntry",
    "ReassembleDataset",
    "RldsDataset",
    "Ros1BagDataset",
    "Ros2BagDataset",
    "UnknownEpisodeError",
    "VideoDataset",
    "detect_format",
    "open_dataset",
    "register_format",
    "registered_formats",
]
