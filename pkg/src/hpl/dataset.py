"""Synthetic handwritten-arrow image generation, stratified splitting and
dataset directory I/O.

The generator stands in for a hand-collected corpus: it renders each
class's canonical stroke skeleton with seeded jitter (control points,
global rotation, stroke width, pixel noise) so that datasets are exactly
reproducible from (class, seed, size).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .imaging import GrayImage, encode_pgm, load_pgm
from .symbols import SymbolClass

GENERATOR_INK_JITTER = 0.06  # max control-point displacement, fraction of size
GENERATOR_ROT_JITTER_DEG = 10.0
NOISE_SIGMA = 8.0


class SizeTooSmall(DomainError):
    pass


class ClassTooSmall(DomainError):
    pass


class MissingIndex(DomainError):
    pass


class UnknownLabel(DomainError):
    pass


class UnreadableImage(DomainError):
    pass


@dataclass(frozen=True)
class LabeledImage:
    image: GrayImage
    label: SymbolClass
    id: str


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.60
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train_fraction must be in (0, 1)")


# --- Skeletons ---------------------------------------------------------------


def _mirror_x(polys: list[np.ndarray]) -> list[np.ndarray]:
    return [np.column_stack([1.0 - p[:, 0], p[:, 1]]) for p in polys]


def _mirror_y(polys: list[np.ndarray]) -> list[np.ndarray]:
    return [np.column_stack([p[:, 0], 1.0 - p[:, 1]]) for p in polys]


def _head(tip: np.ndarray, direction: np.ndarray, length: float = 0.17, spread_deg: float = 27.0) -> np.ndarray:
    u = direction / np.linalg.norm(direction)
    a = math.radians(spread_deg)
    left = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]]) @ u
    right = np.array([[math.cos(-a), -math.sin(-a)], [math.sin(-a), math.cos(-a)]]) @ u
    return np.array([tip - length * left, tip, tip - length * right])


def _bezier2(p0, p1, p2, n: int = 12) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n)[:, None]
    return (1 - t) ** 2 * p0 + 2 * (1 - t) * t * p1 + t**2 * p2


def _arc(center, radius, phi0_deg, phi1_deg, step_deg: float = 20.0) -> np.ndarray:
    n = max(2, int(round(abs(phi1_deg - phi0_deg) / step_deg)) + 1)
    phi = np.radians(np.linspace(phi0_deg, phi1_deg, n))
    return np.column_stack([center[0] + radius * np.cos(phi), center[1] + radius * np.sin(phi)])


def class_skeleton(cls: SymbolClass) -> list[np.ndarray]:
    """Pre-jitter stroke polylines in the unit square (x right, y down).
    Left variants are exact x-mirrors of the right variants, and Down is
    the y-mirror of Up."""
    if cls is SymbolClass.UP:
        tip = np.array([0.5, 0.15])
        shaft = np.array([[0.5, 0.85], tip])
        return [shaft, _head(tip, np.array([0.0, -1.0]))]
    if cls is SymbolClass.DOWN:
        return _mirror_y(class_skeleton(SymbolClass.UP))
    if cls is SymbolClass.FORWARD_RIGHT:
        p0 = np.array([0.30, 0.86])
        p1 = np.array([0.32, 0.26])
        p2 = np.array([0.80, 0.22])
        shaft = _bezier2(p0, p1, p2)
        return [shaft, _head(p2, p2 - p1)]
    if cls is SymbolClass.FORWARD_LEFT:
        return _mirror_x(class_skeleton(SymbolClass.FORWARD_RIGHT))
    if cls is SymbolClass.ROTATE_RIGHT:
        # clockwise ring with its gap at the bottom; screen y grows down,
        # so increasing polar angle sweeps clockwise visually
        center = np.array([0.5, 0.5])
        radius = 0.31
        arc = _arc(center, radius, 120.0, 415.0)
        end_phi = math.radians(415.0)
        travel = np.array([-math.sin(end_phi), math.cos(end_phi)])
        return [arc, _head(arc[-1], travel, length=0.20)]
    if cls is SymbolClass.ROTATE_LEFT:
        return _mirror_x(class_skeleton(SymbolClass.ROTATE_RIGHT))
    raise ValueError(cls)


# --- Rasterization -----------------------------------------------------------


def _stamp_segment(canvas: np.ndarray, p0: np.ndarray, p1: np.ndarray, halfw: float, value: float) -> None:
    size_y, size_x = canvas.shape
    x0 = max(0, int(math.floor(min(p0[0], p1[0]) - halfw - 1)))
    x1 = min(size_x, int(math.ceil(max(p0[0], p1[0]) + halfw + 2)))
    y0 = max(0, int(math.floor(min(p0[1], p1[1]) - halfw - 1)))
    y1 = min(size_y, int(math.ceil(max(p0[1], p1[1]) + halfw + 2)))
    if x0 >= x1 or y0 >= y1:
        return
    ys, xs = np.mgrid[y0:y1, x0:x1]
    d = p1 - p0
    len2 = float(d @ d)
    if len2 == 0:
        dist2 = (xs - p0[0]) ** 2 + (ys - p0[1]) ** 2
    else:
        t = np.clip(((xs - p0[0]) * d[0] + (ys - p0[1]) * d[1]) / len2, 0.0, 1.0)
        dist2 = (xs - (p0[0] + t * d[0])) ** 2 + (ys - (p0[1] + t * d[1])) ** 2
    window = canvas[y0:y1, x0:x1]
    # +0.5: count pixels whose center is within half a pixel of the ideal
    # stroke edge, so nominal 2 px strokes stay connected after opening
    window[dist2 <= (halfw + 0.5) ** 2] = value


def gen_arrow(cls: SymbolClass, seed: int, size: int = 300) -> LabeledImage:
    """Render one jittered arrow. Deterministic for a given
    (class, seed, size) triple."""
    if size < 64:
        raise SizeTooSmall(f"size must be >= 64, got {size}")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    rng = np.random.default_rng([int(cls), seed, size])

    polys = class_skeleton(cls)

    # one jitter sample per distinct control point, so strokes that share a
    # junction stay attached
    jitter: dict[tuple[float, float], np.ndarray] = {}

    def jit(p: np.ndarray) -> np.ndarray:
        key = (round(float(p[0]), 9), round(float(p[1]), 9))
        if key not in jitter:
            jitter[key] = rng.uniform(-GENERATOR_INK_JITTER, GENERATOR_INK_JITTER, 2)
        return p + jitter[key]

    polys = [np.array([jit(p) for p in poly]) for poly in polys]

    theta = math.radians(rng.uniform(-GENERATOR_ROT_JITTER_DEG, GENERATOR_ROT_JITTER_DEG))
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    center = np.array([0.5, 0.5])
    polys = [(poly - center) @ rot.T + center for poly in polys]

    width = rng.uniform(2.0, 6.0)
    ink = rng.uniform(10.0, 60.0)

    margin = 0.10 * size
    scale = size - 2 * margin
    canvas = np.full((size, size), 255.0)
    for poly in polys:
        pts = margin + poly * scale
        for a, b in zip(pts[:-1], pts[1:]):
            _stamp_segment(canvas, a, b, width / 2.0, ink)

    canvas += rng.normal(0.0, NOISE_SIGMA, canvas.shape)
    img = GrayImage.from_array(np.clip(canvas, 0, 255).astype(np.uint8))
    return LabeledImage(image=img, label=cls, id=f"{cls.canonical_name}_{seed:06d}")


def gen_dataset(per_class: int, seed: int = 0, size: int = 300) -> list[LabeledImage]:
    """per_class arrows of every class; image j of any class uses seed
    `seed + j`."""
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    return [gen_arrow(cls, seed + j, size) for cls in SymbolClass for j in range(per_class)]


def compose_sheet(images: list[GrayImage], pad: int = 24) -> GrayImage:
    """Paste glyph images left to right on one white sheet."""
    if not images:
        raise ValueError("no images to compose")
    height = max(im.height for im in images) + 2 * pad
    width = sum(im.width for im in images) + pad * (len(images) + 1)
    sheet = np.full((height, width), 255, dtype=np.uint8)
    x = pad
    for im in images:
        y = (height - im.height) // 2
        sheet[y : y + im.height, x : x + im.width] = im.pixels
        x += im.width + pad
    return GrayImage.from_array(sheet)


# --- Splitting ---------------------------------------------------------------


def split(data: list[LabeledImage], cfg: SplitConfig = SplitConfig()) -> tuple[list[LabeledImage], list[LabeledImage]]:
    """Stratified partition: per class, a seeded shuffle with the first
    floor(fraction * n) samples going to train."""
    by_class: dict[SymbolClass, list[LabeledImage]] = {}
    for item in data:
        by_class.setdefault(item.label, []).append(item)
    for cls, items in by_class.items():
        if len(items) < 2:
            raise ClassTooSmall(f"class {cls.canonical_name} has {len(items)} sample(s), need >= 2")
    rng = np.random.default_rng(cfg.seed)
    train: list[LabeledImage] = []
    test: list[LabeledImage] = []
    for cls in sorted(by_class, key=int):
        items = by_class[cls]
        order = rng.permutation(len(items))
        n_train = int(cfg.train_fraction * len(items))
        train.extend(items[i] for i in order[:n_train])
        test.extend(items[i] for i in order[n_train:])
    return train, test


# --- Directory I/O -----------------------------------------------------------

INDEX_NAME = "labels.tsv"


def save_dir(data: list[LabeledImage], path: str | Path) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    lines = []
    for item in data:
        fname = re.sub(r"[^A-Za-z0-9_.-]", "_", item.id) + ".pgm"
        (root / fname).write_bytes(encode_pgm(item.image))
        lines.append(f"{fname}\t{item.label.canonical_name}")
    (root / INDEX_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_dir(path: str | Path) -> list[LabeledImage]:
    root = Path(path)
    index = root / INDEX_NAME
    if not index.is_file():
        raise MissingIndex(f"no {INDEX_NAME} in {root}")
    out: list[LabeledImage] = []
    for lineno, line in enumerate(index.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise UnknownLabel(f"{INDEX_NAME}:{lineno}: expected <filename>\\t<class>")
        fname, label_name = parts
        try:
            label = SymbolClass.from_name(label_name)
        except KeyError:
            raise UnknownLabel(f"{INDEX_NAME}:{lineno}: unknown class {label_name!r}") from None
        fpath = root / fname
        try:
            img = load_pgm(fpath.read_bytes())
        except (OSError, DomainError) as exc:
            raise UnreadableImage(f"{fname}: {exc}") from None
        out.append(LabeledImage(image=img, label=label, id=Path(fname).stem))
    return out
