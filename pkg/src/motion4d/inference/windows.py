"""Sliding-window plans for long sequences: every window starts with the
reference frame; non-reference indices partition 1..T-1."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class WindowPlan:
    windows: list[list[int]]
    window_size: int
    stride: int


def plan_windows(total_frames: int, window_size: int = 256, stride: int | None = None) -> WindowPlan:
    if total_frames < 1:
        raise ValueError("need at least one frame")
    if window_size < 2:
        raise ValueError("window_size must be >= 2")
    if stride is None:
        stride = window_size - 1
    if stride != window_size - 1:
        raise ValueError("stride must equal window_size - 1 (reference-prefixed windows)")
    if total_frames == 1:
        return WindowPlan(windows=[[0]], window_size=window_size, stride=stride)
    windows = []
    start = 1
    while start < total_frames:
        end = min(start + stride, total_frames)
        windows.append([0] + list(range(start, end)))
        start = end
    return WindowPlan(windows=windows, window_size=window_size, stride=stride)
