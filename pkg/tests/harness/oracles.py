"""Brute-force reference implementations and randomized input generators.

The oracles deliberately use the dumbest correct algorithm (linear scans,
double loops, dense sampling) so they cannot share a bug with the package.
"""

from __future__ import annotations

import numpy as np


def linear_nearest(timestamps, t: float) -> int:
    """First index minimizing |timestamps[i] - t|, by linear scan."""
    best = 0
    best_d = abs(timestamps[0] - t)
    for i in range(1, len(timestamps)):
        d = abs(timestamps[i] - t)
        if d < best_d:
            best, best_d = i, d
    return best


def label_at_linear(breakpoints, labels, x: float) -> str:
    for i in range(len(labels)):
        if breakpoints[i] <= x < breakpoints[i + 1]:
            return labels[i]
    return labels[-1]


def sampled_agreement(bk_a, la, bk_b, lb, duration: float, samples: int = 100_001) -> float:
    """Agreement estimated by dense midpoint sampling; error is O(k / samples)."""
    xs = (np.arange(samples) + 0.5) * (duration / samples)
    hits = sum(
        label_at_linear(bk_a, la, x) == label_at_linear(bk_b, lb, x) for x in xs
    )
    return hits / samples


def asym_distance_oracle(a, b) -> float:
    return float(np.mean([min(abs(x - y) for y in b) for x in a]))


def sym_distance_oracle(a, b) -> float:
    return 0.5 * (asym_distance_oracle(a, b) + asym_distance_oracle(b, a))


def random_segments(rng, duration, labels, max_segments=6, gap_prob=0.4, min_len=1e-3):
    """Non-overlapping (start, end, label, success) tuples; may be empty."""
    cuts = np.sort(rng.uniform(0.0, duration, 2 * max_segments))
    segs = []
    for i in range(0, len(cuts) - 1, 2):
        s, e = float(cuts[i]), float(cuts[i + 1])
        if e - s < min_len or rng.random() < gap_prob:
            continue
        segs.append((s, e, str(rng.choice(labels)), bool(rng.random() < 0.8)))
    return segs


def random_timeline_parts(rng, duration, labels, max_interior=8):
    """(breakpoints, labels) for a piecewise-constant timeline spanning [0, T]."""
    n = int(rng.integers(0, max_interior + 1))
    interior = np.unique(rng.uniform(0.0, duration, n))
    interior = interior[(interior > 0.0) & (interior < duration)]
    breakpoints = [0.0, *interior.tolist(), float(duration)]
    segment_labels = [str(rng.choice(labels)) for _ in range(len(breakpoints) - 1)]
    return breakpoints, segment_labels
