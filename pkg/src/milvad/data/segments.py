"""Temporal segment-boundary arithmetic shared by loading, generation and eval."""

from __future__ import annotations

from ..errors import InputError

GRANULARITIES = (1, 2, 3)


def segment_boundaries(n_frames: int, segments: int, granularity: int = 1):
    """Half-open frame ranges for `granularity * segments` temporal segments.

    Segment i nominally covers [floor(i*N/S), floor((i+1)*N/S)) with
    S = granularity * segments. When N < S that formula would leave empty
    ranges, so each range is widened to at least one frame; neighbouring
    segments then resample the same frames. Every frame is covered, every
    range is nonempty, and ranges are disjoint whenever N >= S.
    """
    if n_frames < 1:
        raise InputError(f"need at least one frame, got {n_frames}")
    if segments < 1:
        raise InputError(f"need at least one segment, got {segments}")
    if granularity not in GRANULARITIES:
        raise InputError(f"granularity must be one of {GRANULARITIES}, got {granularity}")
    count = granularity * segments
    ranges = []
    for i in range(count):
        start = i * n_frames // count
        end = max((i + 1) * n_frames // count, start + 1)
        ranges.append((start, end))
    return ranges
