"""Grayscale image loading, adaptive binarization, morphology and symbol
segmentation.

Everything here is a pure transformation of immutable value types. Pixel
conventions: 0 = black ink, 255 = white paper; binary images store True
for ink. Coordinates are (x, y) with y growing downward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


class MalformedHeader(DomainError):
    pass


class TruncatedPixelData(DomainError):
    pass


class UnsupportedMaxval(DomainError):
    pass


class EvenWindow(DomainError):
    pass


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale raster. `pixels` is a (height, width) uint8 array."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        if self.pixels.shape != (self.height, self.width):
            raise ValueError("pixel buffer does not match declared dimensions")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "GrayImage":
        a = np.asarray(arr, dtype=np.uint8)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        a = a.copy()
        a.setflags(write=False)
        return cls(width=a.shape[1], height=a.shape[0], pixels=a)


@dataclass(frozen=True)
class BinaryImage:
    """Foreground mask. `bits` is a (height, width) bool array, True = ink."""

    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        if self.bits.shape != (self.height, self.width):
            raise ValueError("bit buffer does not match declared dimensions")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BinaryImage":
        a = np.asarray(arr, dtype=bool).copy()
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        a.setflags(write=False)
        return cls(width=a.shape[1], height=a.shape[0], bits=a)

    def ink_count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class Contour:
    """A traced symbol boundary.

    points: (n, 2) array of (x, y), the closed Moore boundary walk.
    bbox:   (x, y, w, h) axis-aligned bounding rectangle.
    area_px: ink pixel count of the component.
    pixels: (m, 2) array of (x, y), every ink pixel of the component
            (carried so that downstream shape features can work on the
            exact raster, not just the boundary).
    """

    points: np.ndarray
    bbox: tuple[int, int, int, int]
    area_px: int
    pixels: np.ndarray = field(repr=False)

    @property
    def center(self) -> tuple[float, float]:
        x, y, w, h = self.bbox
        return (x + w / 2.0, y + h / 2.0)


@dataclass(frozen=True)
class ImagingConfig:
    """Knobs of the preprocessing stage. Defaults suit pen strokes scanned
    at roughly 300 px per symbol."""

    window: int = 31
    offset: float = 10.0
    min_area: int = 30


# --- PGM (P5) ---------------------------------------------------------------


def load_pgm(data: bytes) -> GrayImage:
    """Decode a binary PGM (P5) file. Comments after the magic token are
    honored; maxval must be <= 255."""
    if not data.startswith(b"P5"):
        raise MalformedHeader("not a P5 PGM file")
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        # skip whitespace and '#' comments
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise MalformedHeader("unterminated comment")
            pos = nl + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tok = data[start:pos]
        if not tok:
            raise MalformedHeader("incomplete header")
        try:
            tokens.append(int(tok))
        except ValueError:
            raise MalformedHeader(f"bad header token {tok!r}") from None
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise MalformedHeader("missing whitespace after maxval")
    pos += 1

    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise MalformedHeader("nonpositive dimensions")
    if maxval < 1:
        raise MalformedHeader("nonpositive maxval")
    if maxval > 255:
        raise UnsupportedMaxval(f"maxval {maxval} > 255")

    need = width * height
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise TruncatedPixelData(f"expected {need} pixel bytes, got {len(payload)}")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return GrayImage.from_array(arr)


def encode_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


# --- Binarization -----------------------------------------------------------


def adaptive_binarize(img: GrayImage, window: int = 31, offset: float = 10.0) -> BinaryImage:
    """Local-mean threshold: a pixel is ink iff its intensity is below the
    mean of its window x window neighborhood (edge-replicated) minus
    `offset`. Windows larger than the image are clamped to the largest odd
    size that fits."""
    if window % 2 == 0 or window < 3:
        raise EvenWindow(f"window must be odd and >= 3, got {window}")
    w_eff = min(window, img.width, img.height)
    if w_eff % 2 == 0:
        w_eff -= 1
    w_eff = max(w_eff, 1)

    pad = w_eff // 2
    px = img.pixels.astype(np.int64)
    padded = np.pad(px, pad, mode="edge")
    # summed-area table; integer arithmetic keeps the threshold exact
    sat = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    sat[1:, 1:] = padded.cumsum(axis=0).cumsum(axis=1)
    h, w = img.height, img.width
    sums = (
        sat[w_eff : w_eff + h, w_eff : w_eff + w]
        - sat[0:h, w_eff : w_eff + w]
        - sat[w_eff : w_eff + h, 0:w]
        + sat[0:h, 0:w]
    )
    n = w_eff * w_eff
    ink = px * n < sums - offset * n
    return BinaryImage.from_array(ink)


def render_binary(img: BinaryImage) -> GrayImage:
    """Back to grayscale: ink 0, background 255."""
    return GrayImage.from_array(np.where(img.bits, 0, 255).astype(np.uint8))


# --- Morphology -------------------------------------------------------------

CROSS3 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
BOX3 = np.ones((3, 3), dtype=bool)

_MORPH_OPS = ("erode", "dilate", "open", "close")


def _shift(bits: np.ndarray, dy: int, dx: int, fill: bool) -> np.ndarray:
    h, w = bits.shape
    out = np.full_like(bits, fill)
    ys = slice(max(0, dy), min(h, h + dy))
    xs = slice(max(0, dx), min(w, w + dx))
    ys_src = slice(max(0, -dy), min(h, h - dy))
    xs_src = slice(max(0, -dx), min(w, w - dx))
    out[ys, xs] = bits[ys_src, xs_src]
    return out


def morph(img: BinaryImage, op: str, se: np.ndarray = CROSS3) -> BinaryImage:
    """Set morphology. Off-image pixels count as background for dilation
    and as foreground for erosion: the dual convention, which keeps opening
    anti-extensive and closing extensive all the way to the border.
    `se` is an odd-sized nonempty boolean mask centered on its middle cell."""
    se = np.asarray(se, dtype=bool)
    if se.ndim != 2 or se.shape[0] % 2 == 0 or se.shape[1] % 2 == 0 or not se.any():
        raise ValueError("structuring element must be a nonempty odd-sized mask")
    if op not in _MORPH_OPS:
        raise ValueError(f"unknown morphological op {op!r}")

    if op == "open":
        return morph(morph(img, "erode", se), "dilate", se)
    if op == "close":
        return morph(morph(img, "dilate", se), "erode", se)

    cy, cx = se.shape[0] // 2, se.shape[1] // 2
    offsets = [(int(dy) - cy, int(dx) - cx) for dy, dx in np.argwhere(se)]
    if op == "dilate":
        acc = np.zeros_like(img.bits)
        for dy, dx in offsets:
            acc |= _shift(img.bits, dy, dx, fill=False)
    else:  # erode
        acc = np.ones_like(img.bits)
        for dy, dx in offsets:
            acc &= _shift(img.bits, -dy, -dx, fill=True)
    return BinaryImage.from_array(acc)


def cleanup(img: BinaryImage) -> BinaryImage:
    """Default despeckle-and-bridge sequence used by the recognition
    pipeline: open then close, both with the 3x3 cross."""
    return morph(morph(img, "open", CROSS3), "close", CROSS3)


# --- Contours ---------------------------------------------------------------

# clockwise Moore neighborhood starting north, (dx, dy) with y down
_MOORE = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))


def _label_components(bits: np.ndarray) -> tuple[np.ndarray, int]:
    """8-connected component labeling by flood fill, labels assigned in
    row-major discovery order starting at 1."""
    h, w = bits.shape
    labels = np.zeros((h, w), dtype=np.int32)
    current = 0
    for sy, sx in np.argwhere(bits):
        if labels[sy, sx]:
            continue
        current += 1
        stack = [(int(sy), int(sx))]
        labels[sy, sx] = current
        while stack:
            y, x = stack.pop()
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and bits[ny, nx] and not labels[ny, nx]:
                        labels[ny, nx] = current
                        stack.append((ny, nx))
    return labels, current


def _moore_trace(bits: np.ndarray, start: tuple[int, int]) -> np.ndarray:
    """Clockwise Moore boundary walk from the topmost-leftmost pixel,
    Jacob's stopping criterion."""
    sy, sx = start
    h, w = bits.shape

    def fg(y: int, x: int) -> bool:
        return 0 <= y < h and 0 <= x < w and bits[y, x]

    points = [(sx, sy)]
    # entered the start pixel from the west (background by construction)
    back = _MOORE.index((-1, 0))
    cy, cx = sy, sx
    first_move = None
    # loop bound: each boundary pixel is visited at most a handful of times
    for _ in range(8 * bits.size + 8):
        move = None
        for k in range(1, 9):
            j = (back + k) % 8
            dx, dy = _MOORE[j]
            if fg(cy + dy, cx + dx):
                move = j
                break
        if move is None:
            break  # isolated pixel
        if (cy, cx) == (sy, sx) and first_move is not None and move == first_move:
            break
        if first_move is None:
            first_move = move
        dx, dy = _MOORE[move]
        cy, cx = cy + dy, cx + dx
        points.append((cx, cy))
        back = (move + 4) % 8
        if (cy, cx) == (sy, sx):
            # next scan around the start decides termination
            pass
    if len(points) > 1 and points[-1] == points[0]:
        points.pop()
    return np.array(points, dtype=np.int64)


def trace_contours(img: BinaryImage, min_area: int = 30) -> list[Contour]:
    """One contour per 8-connected component with at least `min_area` ink
    pixels, in row-major discovery order of the components."""
    labels, count = _label_components(img.bits)
    contours: list[Contour] = []
    for lab in range(1, count + 1):
        ys, xs = np.nonzero(labels == lab)
        area = len(ys)
        if area < min_area:
            continue
        start = (int(ys[0]), int(xs[0]))  # argwhere order: topmost, then leftmost
        points = _moore_trace(labels == lab, start)
        x0, y0 = int(xs.min()), int(ys.min())
        bbox = (x0, y0, int(xs.max()) - x0 + 1, int(ys.max()) - y0 + 1)
        pixels = np.column_stack([xs, ys]).astype(np.int64)
        contours.append(Contour(points=points, bbox=bbox, area_px=area, pixels=pixels))
    return contours


def contour_mask(contour: Contour) -> BinaryImage:
    """The component's ink pixels cropped to its bounding box."""
    x0, y0, w, h = contour.bbox
    bits = np.zeros((h, w), dtype=bool)
    bits[contour.pixels[:, 1] - y0, contour.pixels[:, 0] - x0] = True
    return BinaryImage.from_array(bits)


# --- Reading order ----------------------------------------------------------


def reading_order(contours: list[Contour]) -> list[Contour]:
    """Group contours into rows (vertical bbox overlap >= 50% of the smaller
    height), order rows top to bottom, then left to right within a row."""
    n = len(contours)
    if n <= 1:
        return list(contours)

    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        _, yi, _, hi = contours[i].bbox
        for j in range(i + 1, n):
            _, yj, _, hj = contours[j].bbox
            overlap = min(yi + hi, yj + hj) - max(yi, yj)
            if overlap >= 0.5 * min(hi, hj):
                parent[find(i)] = find(j)

    rows: dict[int, list[int]] = {}
    for i in range(n):
        rows.setdefault(find(i), []).append(i)

    def row_key(members: list[int]) -> float:
        return float(np.mean([contours[i].center[1] for i in members]))

    ordered: list[Contour] = []
    for members in sorted(rows.values(), key=row_key):
        members.sort(key=lambda i: (contours[i].center[0], contours[i].center[1], i))
        ordered.extend(contours[i] for i in members)
    return ordered
