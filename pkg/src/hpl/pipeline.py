"""End-to-end glue: turn labeled images into feature sets, train and
evaluate models, and run the synthetic benchmark. Used by the CLI, the
scripts and the test suite."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import classifier, dataset, features
from .classifier import MetricsReport, MlpModel, TrainingConfig
from .compiler import primary_glyph
from .dataset import LabeledImage, SplitConfig
from .features import ClassCentroids, FeatureConfig
from .imaging import BinaryImage, Contour, ImagingConfig
from .symbols import SymbolClass


@dataclass(frozen=True)
class PreparedGlyph:
    glyph: BinaryImage
    contour: Contour
    label: SymbolClass


def prepare_glyphs(images: list[LabeledImage], icfg: ImagingConfig = ImagingConfig()) -> list[PreparedGlyph]:
    out = []
    for item in images:
        glyph, contour = primary_glyph(item.image, icfg)
        out.append(PreparedGlyph(glyph=glyph, contour=contour, label=item.label))
    return out


def glyph_features(
    glyphs: list[PreparedGlyph],
    centroids: ClassCentroids,
    fcfg: FeatureConfig = FeatureConfig(),
) -> list[tuple[np.ndarray, SymbolClass]]:
    return [(features.extract(g.glyph, g.contour, centroids, fcfg), g.label) for g in glyphs]


def train_on_images(
    train_images: list[LabeledImage],
    cfg: TrainingConfig = TrainingConfig(),
    icfg: ImagingConfig = ImagingConfig(),
    fcfg: FeatureConfig = FeatureConfig(),
) -> MlpModel:
    """Centroids from the training images, then features, then the MLP.
    Test data must stay out of this function."""
    glyphs = prepare_glyphs(train_images, icfg)
    centroids = features.compute_centroids([(g.glyph, g.label) for g in glyphs])
    data = glyph_features(glyphs, centroids, fcfg)
    return classifier.train(data, cfg, centroids=centroids)


def evaluate_on_images(
    model: MlpModel,
    test_images: list[LabeledImage],
    icfg: ImagingConfig = ImagingConfig(),
    fcfg: FeatureConfig = FeatureConfig(),
) -> MetricsReport:
    glyphs = prepare_glyphs(test_images, icfg)
    data = glyph_features(glyphs, model.centroids, fcfg)
    return classifier.evaluate(model, data)


@dataclass(frozen=True)
class BenchmarkResult:
    model: MlpModel
    report: MetricsReport
    n_train: int
    n_test: int
    elapsed_s: float


def run_benchmark(per_class: int = 200, seed: int = 42, size: int = 300) -> BenchmarkResult:
    """Generate, split 60/40, train with defaults, evaluate."""
    t0 = time.monotonic()
    data = dataset.gen_dataset(per_class, seed=seed, size=size)
    train_set, test_set = dataset.split(data, SplitConfig(seed=seed))
    model = train_on_images(train_set, TrainingConfig(seed=seed))
    report = evaluate_on_images(model, test_set)
    return BenchmarkResult(
        model=model,
        report=report,
        n_train=len(train_set),
        n_test=len(test_set),
        elapsed_s=time.monotonic() - t0,
    )
