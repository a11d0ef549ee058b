"""Shape features for segmented symbols.

A glyph becomes a 42-dimensional vector: 16 Fourier descriptor magnitudes
of its boundary, 12 Hellinger distances between its axis density
histograms and the per-class centroids, and 14 geometric features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .imaging import BinaryImage, Contour
from .symbols import NUM_CLASSES, SymbolClass

HIST_BINS = 32
FD_COUNT = 16
GEO_COUNT = 14
FEATURE_DIM = FD_COUNT + 2 * NUM_CLASSES + GEO_COUNT  # 42


class EmptyGlyph(DomainError):
    pass


class LengthMismatch(DomainError):
    pass


class NotNormalized(DomainError):
    pass


class DegenerateContour(DomainError):
    pass


class MissingClass(DomainError):
    pass


@dataclass(frozen=True)
class DensityHistogramPair:
    """Normalized ink densities per column (x) and per row (y), 32 bins each."""

    x_hist: np.ndarray
    y_hist: np.ndarray

    def __post_init__(self):
        for h in (self.x_hist, self.y_hist):
            if h.shape != (HIST_BINS,):
                raise ValueError(f"histogram must have {HIST_BINS} bins")
            if (h < 0).any() or abs(float(h.sum()) - 1.0) > 1e-9:
                raise ValueError("histogram must be nonnegative and sum to 1")


@dataclass(frozen=True)
class ClassCentroids:
    """Mean density histograms of each symbol class on the training set."""

    pairs: tuple[DensityHistogramPair, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.pairs) != NUM_CLASSES or len(self.counts) != NUM_CLASSES:
            raise ValueError(f"need exactly {NUM_CLASSES} class entries")


@dataclass(frozen=True)
class FeatureConfig:
    fd_count: int = FD_COUNT
    resample_points: int = 128


def uniform_centroids() -> ClassCentroids:
    """Flat placeholder centroids (all Hellinger features become equal);
    used when a model is trained on features that bypass the image path."""
    flat = np.full(HIST_BINS, 1.0 / HIST_BINS)
    pair = DensityHistogramPair(x_hist=flat, y_hist=flat)
    return ClassCentroids(pairs=(pair,) * NUM_CLASSES, counts=(0,) * NUM_CLASSES)


# --- Density histograms -----------------------------------------------------


def density_histograms(glyph: BinaryImage) -> DensityHistogramPair:
    """Nearest-neighbor resample the glyph to 32x32, then normalize ink
    counts per column and per row."""
    if glyph.ink_count() == 0:
        raise EmptyGlyph("glyph contains no ink")
    rows = (np.arange(HIST_BINS) * glyph.height) // HIST_BINS
    cols = (np.arange(HIST_BINS) * glyph.width) // HIST_BINS
    small = glyph.bits[np.ix_(rows, cols)]
    total = small.sum()
    if total == 0:
        raise EmptyGlyph("glyph lost all ink when resampled to 32x32")
    x_hist = small.sum(axis=0) / total
    y_hist = small.sum(axis=1) / total
    return DensityHistogramPair(x_hist=x_hist, y_hist=y_hist)


def hellinger(p: np.ndarray, q: np.ndarray) -> float:
    """(1/sqrt 2) * ||sqrt p - sqrt q||_2, clamped to [0, 1]."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise LengthMismatch(f"histogram lengths differ: {p.shape} vs {q.shape}")
    for h in (p, q):
        if (h < 0).any() or abs(float(h.sum()) - 1.0) > 1e-6:
            raise NotNormalized("histograms must be nonnegative and sum to 1")
    d = math.sqrt(0.5) * float(np.linalg.norm(np.sqrt(p) - np.sqrt(q)))
    return min(d, 1.0)


def compute_centroids(training: list[tuple[BinaryImage, SymbolClass]]) -> ClassCentroids:
    """Per class, the renormalized arithmetic mean of the members' density
    histogram pairs."""
    sums_x = np.zeros((NUM_CLASSES, HIST_BINS))
    sums_y = np.zeros((NUM_CLASSES, HIST_BINS))
    counts = [0] * NUM_CLASSES
    for glyph, label in training:
        pair = density_histograms(glyph)
        sums_x[label] += pair.x_hist
        sums_y[label] += pair.y_hist
        counts[label] += 1
    pairs = []
    for c in range(NUM_CLASSES):
        if counts[c] == 0:
            raise MissingClass(f"no training sample for class {SymbolClass(c).canonical_name}")
        x = sums_x[c] / counts[c]
        y = sums_y[c] / counts[c]
        pairs.append(DensityHistogramPair(x_hist=x / x.sum(), y_hist=y / y.sum()))
    return ClassCentroids(pairs=tuple(pairs), counts=tuple(counts))


# --- Fourier descriptors ----------------------------------------------------


def resample_closed(points: np.ndarray, count: int) -> np.ndarray:
    """Resample a closed polyline to `count` points equally spaced by arc
    length, anchored at the lexicographically smallest (y, x) vertex so the
    result is independent of where the input list starts."""
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 1:
        raise DegenerateContour("no points")
    start = int(np.lexsort((pts[:, 0], pts[:, 1]))[0])
    pts = np.roll(pts, -start, axis=0)

    closed = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    keep = seg > 0
    if not keep.any():
        raise DegenerateContour("all contour points coincide")
    verts = np.vstack([closed[:-1][keep], closed[-1:]])
    cum = np.concatenate([[0.0], np.cumsum(seg[keep])])
    total = cum[-1]
    targets = np.arange(count) * total / count
    xs = np.interp(targets, cum, verts[:, 0])
    ys = np.interp(targets, cum, verts[:, 1])
    return xs + 1j * ys


def fourier_descriptors(contour: Contour, k: int = FD_COUNT, resample_points: int = 128) -> np.ndarray:
    """Magnitudes of DFT coefficients 1..k of the arc-length-resampled
    boundary, scaled by the magnitude of coefficient 1. Coefficient 0 is
    dropped (translation invariance); magnitudes ignore the start phase."""
    if k < 1 or k >= resample_points:
        raise ValueError(f"need 1 <= k < {resample_points}, got {k}")
    if len(contour.points) < 8:
        raise ValueError("contour must have at least 8 points")
    z = resample_closed(contour.points, resample_points)
    spectrum = np.fft.fft(z)
    mags = np.abs(spectrum[1 : k + 1])
    base = mags[0]
    if base < 1e-12:
        raise DegenerateContour("fundamental frequency vanishes")
    return mags / base


# --- Geometric features -----------------------------------------------------


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices counter-clockwise
    (in y-down screen coordinates this winds clockwise visually)."""
    pts = np.unique(points, axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=np.float64)


def _polygon_area(verts: np.ndarray) -> float:
    if len(verts) < 3:
        return 0.0
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _min_area_rect(hull: np.ndarray) -> tuple[float, float, float]:
    """(long side, short side, angle of long side) via rotating calipers
    over hull edge directions."""
    best = None
    n = len(hull)
    for i in range(n):
        edge = hull[(i + 1) % n] - hull[i]
        norm = np.linalg.norm(edge)
        if norm == 0:
            continue
        ux, uy = edge / norm
        rot = np.array([[ux, uy], [-uy, ux]])
        proj = hull @ rot.T
        w = proj[:, 0].max() - proj[:, 0].min()
        h = proj[:, 1].max() - proj[:, 1].min()
        area = w * h
        if best is None or area < best[0]:
            theta = math.atan2(uy, ux) if w >= h else math.atan2(ux, -uy)
            best = (area, max(w, h), min(w, h), theta)
    if best is None:
        raise DegenerateContour("hull has no extent")
    return best[1], best[2], best[3]


def _min_enclosing_circle(points: np.ndarray) -> tuple[float, float, float]:
    """Welzl's algorithm, iterative form, deterministic point order."""

    def circle_two(a, b):
        c = (a + b) / 2.0
        return c[0], c[1], float(np.linalg.norm(a - b) / 2.0)

    def circle_three(a, b, c):
        ax, ay = a
        bx, by = b
        cx, cy = c
        d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        if abs(d) < 1e-12:
            return None
        ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
        uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
        center = np.array([ux, uy])
        return ux, uy, float(np.linalg.norm(a - center))

    def contains(circ, p, eps=1e-7):
        cx, cy, r = circ
        return (p[0] - cx) ** 2 + (p[1] - cy) ** 2 <= (r + eps) ** 2

    pts = np.unique(points, axis=0).astype(np.float64)
    circ = (float(pts[0][0]), float(pts[0][1]), 0.0)
    for i in range(1, len(pts)):
        if contains(circ, pts[i]):
            continue
        circ = (float(pts[i][0]), float(pts[i][1]), 0.0)
        for j in range(i):
            if contains(circ, pts[j]):
                continue
            circ = circle_two(pts[i], pts[j])
            for q in range(j):
                if contains(circ, pts[q]):
                    continue
                c3 = circle_three(pts[i], pts[j], pts[q])
                if c3 is not None:
                    circ = c3
    return circ


def _hu_moments(pixels: np.ndarray) -> np.ndarray:
    xs = pixels[:, 0].astype(np.float64)
    ys = pixels[:, 1].astype(np.float64)
    m00 = float(len(xs))
    cx, cy = xs.mean(), ys.mean()
    dx, dy = xs - cx, ys - cy

    def mu(p, q):
        return float(np.sum(dx**p * dy**q))

    def eta(p, q):
        return mu(p, q) / m00 ** (1 + (p + q) / 2.0)

    n20, n02, n11 = eta(2, 0), eta(0, 2), eta(1, 1)
    n30, n03, n21, n12 = eta(3, 0), eta(0, 3), eta(2, 1), eta(1, 2)
    h1 = n20 + n02
    h2 = (n20 - n02) ** 2 + 4 * n11**2
    h3 = (n30 - 3 * n12) ** 2 + (3 * n21 - n03) ** 2
    h4 = (n30 + n12) ** 2 + (n21 + n03) ** 2
    h5 = (n30 - 3 * n12) * (n30 + n12) * ((n30 + n12) ** 2 - 3 * (n21 + n03) ** 2) + (
        3 * n21 - n03
    ) * (n21 + n03) * (3 * (n30 + n12) ** 2 - (n21 + n03) ** 2)
    h6 = (n20 - n02) * ((n30 + n12) ** 2 - (n21 + n03) ** 2) + 4 * n11 * (n30 + n12) * (n21 + n03)
    h7 = (3 * n21 - n03) * (n30 + n12) * ((n30 + n12) ** 2 - 3 * (n21 + n03) ** 2) - (
        n30 - 3 * n12
    ) * (n21 + n03) * (3 * (n30 + n12) ** 2 - (n21 + n03) ** 2)
    return np.array([h1, h2, h3, h4, h5, h6, h7])


def _log_compress(h: np.ndarray) -> np.ndarray:
    return np.sign(h) * np.log10(np.abs(h) + 1e-30)


def geometric_features(contour: Contour) -> np.ndarray:
    """14 values: circularity, convexity, inertia ratio, min-area-rect
    aspect, rect angle as (sin 2t, cos 2t), enclosing-circle fill, and the
    7 log-scaled Hu invariants.

    Hull, rectangle and circle are computed over the pixel corners of the
    boundary (each boundary pixel contributes its four unit-square
    corners), which keeps ratios meaningful for one-pixel-thin shapes.
    """
    if contour.area_px <= 0 or len(contour.points) < 3:
        raise DegenerateContour("contour has no area")
    pts = contour.points.astype(np.float64)
    closed = np.vstack([pts, pts[:1]])
    perimeter = float(np.linalg.norm(np.diff(closed, axis=0), axis=1).sum())
    if perimeter <= 0:
        raise DegenerateContour("zero perimeter")
    area = float(contour.area_px)

    circularity = 4.0 * math.pi * area / perimeter**2

    corners = np.concatenate([pts + off for off in ((0, 0), (1, 0), (0, 1), (1, 1))])
    hull = _convex_hull(corners)
    hull_area = _polygon_area(hull)
    if hull_area <= 0:
        raise DegenerateContour("degenerate convex hull")
    convexity = min(1.0, area / hull_area)

    px = contour.pixels.astype(np.float64)
    cov = np.cov(px.T, bias=True) if len(px) > 1 else np.zeros((2, 2))
    eigvals = np.linalg.eigvalsh(cov)
    lo, hi = max(float(eigvals[0]), 0.0), max(float(eigvals[1]), 0.0)
    if hi <= 0:
        raise DegenerateContour("shape has a single pixel")
    inertia_ratio = math.sqrt(lo / hi)

    long_side, short_side, theta = _min_area_rect(hull)
    aspect = short_side / long_side if long_side > 0 else 1.0

    _, _, radius = _min_enclosing_circle(hull)
    fill = area / (math.pi * radius**2) if radius > 0 else 1.0

    hu = _log_compress(_hu_moments(contour.pixels))
    return np.concatenate(
        [
            [circularity, convexity, inertia_ratio, aspect, math.sin(2 * theta), math.cos(2 * theta), fill],
            hu,
        ]
    )


# --- Assembly ---------------------------------------------------------------


def extract(
    glyph: BinaryImage,
    contour: Contour,
    centroids: ClassCentroids,
    cfg: FeatureConfig = FeatureConfig(),
) -> np.ndarray:
    """Full 42-feature vector: Fourier descriptors, then per-class Hellinger
    distances (class 0 x, class 0 y, class 1 x, ...), then geometry."""
    fd = fourier_descriptors(contour, cfg.fd_count, cfg.resample_points)
    pair = density_histograms(glyph)
    hell = np.empty(2 * NUM_CLASSES)
    for c in range(NUM_CLASSES):
        hell[2 * c] = hellinger(pair.x_hist, centroids.pairs[c].x_hist)
        hell[2 * c + 1] = hellinger(pair.y_hist, centroids.pairs[c].y_hist)
    geo = geometric_features(contour)
    fv = np.concatenate([fd, hell, geo])
    if not np.all(np.isfinite(fv)):
        raise DegenerateContour("non-finite feature value")
    return fv
