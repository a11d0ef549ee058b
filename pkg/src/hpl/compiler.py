"""From symbol sequences to robot motion commands, and from a photographed
sheet to a symbol sequence.

Sign convention, honored by the simulator and the UI: positive angles turn
counter-clockwise, so the *right* symbols compile to negative angles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifier import MlpModel, forward
from .errors import DomainError
from .features import FeatureConfig, extract
from .imaging import (
    Contour,
    GrayImage,
    ImagingConfig,
    adaptive_binarize,
    cleanup,
    contour_mask,
    reading_order,
    trace_contours,
)
from .symbols import MIRROR, SymbolClass


class UnknownSymbolName(DomainError):
    def __init__(self, token: str, index: int):
        super().__init__(f"unknown symbol {token!r} at position {index}")
        self.token = token
        self.index = index


class NoSymbolsFound(DomainError):
    pass


class LowConfidence(DomainError):
    def __init__(self, rejected: list["GlyphRejection"]):
        boxes = ", ".join(f"{r.box} ({r.confidence:.2f})" for r in rejected)
        super().__init__(f"all glyphs below the confidence threshold: {boxes}")
        self.rejected = rejected


@dataclass(frozen=True)
class Program:
    symbols: tuple[SymbolClass, ...]
    confidences: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.confidences is not None and len(self.confidences) != len(self.symbols):
            raise ValueError("confidence count must match symbol count")

    def to_json_dict(self) -> dict:
        doc: dict = {"symbols": [s.canonical_name for s in self.symbols]}
        if self.confidences is not None:
            doc["confidences"] = [round(c, 6) for c in self.confidences]
        return doc


@dataclass(frozen=True)
class Translate:
    distance_mm: float


@dataclass(frozen=True)
class Rotate:
    angle_deg: float


@dataclass(frozen=True)
class Arc:
    heading_change_deg: float
    chord_mm: float


MotionCommand = Translate | Rotate | Arc


@dataclass(frozen=True)
class CompilerConfig:
    step_mm: float = 110.0
    turn_deg: float = 45.0

    def __post_init__(self):
        if self.step_mm <= 0:
            raise ValueError("step_mm must be > 0")
        if not (0 < self.turn_deg <= 180):
            raise ValueError("turn_deg must be in (0, 180]")


def compile_program(program: Program, cfg: CompilerConfig = CompilerConfig()) -> list[MotionCommand]:
    """One command per symbol, order preserved."""
    table: dict[SymbolClass, MotionCommand] = {
        SymbolClass.UP: Translate(+cfg.step_mm),
        SymbolClass.DOWN: Translate(-cfg.step_mm),
        SymbolClass.ROTATE_LEFT: Rotate(+cfg.turn_deg),
        SymbolClass.ROTATE_RIGHT: Rotate(-cfg.turn_deg),
        SymbolClass.FORWARD_LEFT: Arc(+cfg.turn_deg, cfg.step_mm),
        SymbolClass.FORWARD_RIGHT: Arc(-cfg.turn_deg, cfg.step_mm),
    }
    return [table[s] for s in program.symbols]


def mirror_program(program: Program) -> Program:
    return Program(
        symbols=tuple(MIRROR[s] for s in program.symbols),
        confidences=program.confidences,
    )


def parse_symbols(text: str) -> Program:
    """Comma-separated canonical names, case-insensitive, whitespace
    trimmed. Empty input is the empty program."""
    if not text.strip():
        return Program(symbols=())
    symbols = []
    for i, token in enumerate(text.split(",")):
        name = token.strip()
        try:
            symbols.append(SymbolClass.from_name(name))
        except KeyError:
            raise UnknownSymbolName(name, i) from None
    return Program(symbols=tuple(symbols))


def command_to_json_dict(cmd: MotionCommand) -> dict:
    if isinstance(cmd, Translate):
        return {"kind": "translate", "distance_mm": cmd.distance_mm}
    if isinstance(cmd, Rotate):
        return {"kind": "rotate", "angle_deg": cmd.angle_deg}
    return {"kind": "arc", "heading_change_deg": cmd.heading_change_deg, "chord_mm": cmd.chord_mm}


# --- Sheet classification ---------------------------------------------------


@dataclass(frozen=True)
class GlyphRejection:
    box: tuple[int, int, int, int]
    confidence: float
    best_guess: SymbolClass


@dataclass(frozen=True)
class SheetClassification:
    program: Program
    boxes: tuple[tuple[int, int, int, int], ...]
    rejected: tuple[GlyphRejection, ...] = field(default=())


def segment_sheet(img: GrayImage, icfg: ImagingConfig = ImagingConfig()) -> list[Contour]:
    """The shared preprocessing front end: binarize, despeckle/bridge, trace
    and order the symbol contours."""
    binary = cleanup(adaptive_binarize(img, icfg.window, icfg.offset))
    return reading_order(trace_contours(binary, icfg.min_area))


def primary_glyph(img: GrayImage, icfg: ImagingConfig = ImagingConfig()):
    """The largest symbol on a single-symbol image, as (glyph, contour)."""
    contours = segment_sheet(img, icfg)
    if not contours:
        raise NoSymbolsFound("no symbol contour survives preprocessing")
    best = max(contours, key=lambda c: c.area_px)
    return contour_mask(best), best


def classify_sheet(
    img: GrayImage,
    model: MlpModel,
    icfg: ImagingConfig = ImagingConfig(),
    fcfg: FeatureConfig = FeatureConfig(),
    reject_threshold: float = 0.5,
) -> SheetClassification:
    """Recognize every symbol on a sheet in reading order.

    Glyphs whose top class probability falls below `reject_threshold` are
    returned in `rejected` rather than silently dropped; if nothing at all
    clears the threshold the sheet is unusable and LowConfidence is raised.
    """
    contours = segment_sheet(img, icfg)
    if not contours:
        raise NoSymbolsFound("no symbol contour survives preprocessing")

    symbols: list[SymbolClass] = []
    confidences: list[float] = []
    boxes: list[tuple[int, int, int, int]] = []
    rejected: list[GlyphRejection] = []
    for contour in contours:
        fv = extract(contour_mask(contour), contour, model.centroids, fcfg)
        probs = forward(model, fv)
        best = int(np.argmax(probs))
        conf = float(probs[best])
        if conf < reject_threshold:
            rejected.append(GlyphRejection(box=contour.bbox, confidence=conf, best_guess=SymbolClass(best)))
            continue
        symbols.append(SymbolClass(best))
        confidences.append(conf)
        boxes.append(contour.bbox)

    if not symbols:
        if rejected:
            raise LowConfidence(rejected)
        raise NoSymbolsFound("no symbol contour survives preprocessing")
    return SheetClassification(
        program=Program(symbols=tuple(symbols), confidences=tuple(confidences)),
        boxes=tuple(boxes),
        rejected=tuple(rejected),
    )
