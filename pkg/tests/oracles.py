"""Independent reference implementations used to cross-check the package.

Everything here is deliberately plain Python (lists, math.fsum, sorted)
and shares no code with src/. When a test compares the package against
these, both routes must be kept; do not "simplify" one into the other.
"""

from __future__ import annotations

import math

GRASP = "grasp"
RELEASE = "release"


# -- feature references (compensated summation) ------------------------


def iemg_ref(v: list[float]) -> float:
    return math.fsum(abs(x) for x in v)


def mav_ref(v: list[float]) -> float:
    return math.fsum(abs(x) for x in v) / len(v)


def ssi_ref(v: list[float]) -> float:
    return math.fsum(abs(x) * abs(x) for x in v)


def max_ref(v: list[float]) -> float:
    return max(abs(x) for x in v)


def wl_amplitude_ref(v: list[float]) -> float:
    return math.fsum(abs(b - a) for a, b in zip(v, v[1:]))


def wl_literal_ref(t: list[float]) -> float:
    return math.fsum(abs(b - a) for a, b in zip(t, t[1:]))


# -- KNN reference ------------------------------------------------------


def euclid5(a, b) -> float:
    # Left-to-right accumulation matches IEEE evaluation of a 5-term sum.
    s = 0.0
    for x, y in zip(a, b):
        d = x - y
        s += d * d
    return math.sqrt(s)


def scale5(vec, mean, std):
    """Center always, divide only where the training std is positive."""
    out = []
    for x, m, s in zip(vec, mean, std):
        x = x - m
        if s > 0:
            x = x / s
        out.append(x)
    return tuple(out)


def knn_ref(samples, k: int, query, mean=None, std=None) -> tuple[str, list]:
    """Exhaustive-scan KNN with the documented tie rules.

    samples: list of (feature 5-tuple, label). Returns (label, neighbors)
    where neighbors is [(index, distance)] sorted by (distance, index) and
    includes every sample tied with the k-th smallest distance.
    """
    if mean is not None:
        query = scale5(query, mean, std)
        samples = [(scale5(f, mean, std), lab) for f, lab in samples]
    dists = [(euclid5(f, query), i) for i, (f, _) in enumerate(samples)]
    ordered = sorted(dists)
    threshold = ordered[k - 1][0]
    neighbors = [(i, d) for d, i in ordered if d <= threshold]

    grasp_d = [d for i, d in neighbors if samples[i][1] == GRASP]
    release_d = [d for i, d in neighbors if samples[i][1] == RELEASE]
    if len(grasp_d) != len(release_d):
        label = GRASP if len(grasp_d) > len(release_d) else RELEASE
    else:
        mean_g = math.fsum(grasp_d) / len(grasp_d)
        mean_r = math.fsum(release_d) / len(release_d)
        label = RELEASE if mean_r < mean_g else GRASP
    return label, neighbors


# -- forward kinematics reference ---------------------------------------


def chain_points_ref(angles_deg, length_mm: float, sign: float) -> list[tuple[float, float]]:
    """Closed-form planar chain: point j is the sum of j rotated links."""
    points = [(0.0, 0.0)]
    for j in range(1, len(angles_deg) + 1):
        x = math.fsum(
            length_mm * math.cos(math.radians(sign * math.fsum(angles_deg[:i])))
            for i in range(1, j + 1)
        )
        y = math.fsum(
            length_mm * math.sin(math.radians(sign * math.fsum(angles_deg[:i])))
            for i in range(1, j + 1)
        )
        points.append((x, y))
    return points


def polyline_length_ref(points) -> float:
    return math.fsum(
        math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(points, points[1:])
    )
