import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpl import dataset, imaging
from hpl.compiler import (
    Arc,
    CompilerConfig,
    LowConfidence,
    NoSymbolsFound,
    Program,
    Rotate,
    Translate,
    UnknownSymbolName,
    classify_sheet,
    compile_program,
    mirror_program,
    parse_symbols,
)
from hpl.symbols import SymbolClass

programs = st.lists(st.sampled_from(list(SymbolClass)), max_size=24).map(
    lambda syms: Program(symbols=tuple(syms))
)


class TestCompile:
    def test_empty(self):
        assert compile_program(Program(symbols=())) == []

    def test_fig_constants(self):
        cmds = compile_program(parse_symbols("up, rotate_right, up"))
        assert cmds == [Translate(110.0), Rotate(-45.0), Translate(110.0)]

    def test_forward_left_is_ccw_arc(self):
        assert compile_program(parse_symbols("forward_left")) == [Arc(45.0, 110.0)]

    def test_down_is_negative_translate(self):
        assert compile_program(parse_symbols("down")) == [Translate(-110.0)]

    @given(programs, programs)
    @settings(max_examples=100, deadline=None)
    def test_concatenation_homomorphism(self, p1, p2):
        joined = Program(symbols=p1.symbols + p2.symbols)
        assert compile_program(joined) == compile_program(p1) + compile_program(p2)

    @given(programs)
    @settings(max_examples=100, deadline=None)
    def test_mirror_negates_angles_preserves_distances(self, program):
        cmds = compile_program(program)
        mirrored = compile_program(mirror_program(program))
        assert len(cmds) == len(mirrored)
        for a, b in zip(cmds, mirrored):
            if isinstance(a, Translate):
                assert b == a
            elif isinstance(a, Rotate):
                assert isinstance(b, Rotate) and b.angle_deg == -a.angle_deg
            else:
                assert isinstance(b, Arc)
                assert b.heading_change_deg == -a.heading_change_deg
                assert b.chord_mm == a.chord_mm

    def test_custom_config(self):
        cfg = CompilerConfig(step_mm=200.0, turn_deg=90.0)
        assert compile_program(parse_symbols("up"), cfg) == [Translate(200.0)]

    def test_bad_config(self):
        with pytest.raises(ValueError):
            CompilerConfig(step_mm=0)
        with pytest.raises(ValueError):
            CompilerConfig(turn_deg=200)


class TestParseSymbols:
    def test_basic(self):
        assert parse_symbols("up, rotate_right").symbols == (
            SymbolClass.UP,
            SymbolClass.ROTATE_RIGHT,
        )

    def test_empty_string(self):
        assert parse_symbols("").symbols == ()
        assert parse_symbols("   ").symbols == ()

    def test_case_insensitive_and_trimmed(self):
        assert parse_symbols(" Up ,FORWARD_left ").symbols == (
            SymbolClass.UP,
            SymbolClass.FORWARD_LEFT,
        )

    def test_unknown_name_with_position(self):
        with pytest.raises(UnknownSymbolName) as exc:
            parse_symbols("up, zigzag")
        assert exc.value.token == "zigzag"
        assert exc.value.index == 1

    @given(programs)
    @settings(max_examples=100, deadline=None)
    def test_roundtrip_through_names(self, program):
        names = ",".join(s.canonical_name for s in program.symbols)
        assert parse_symbols(names).symbols == program.symbols


class TestProgramType:
    def test_confidence_length_checked(self):
        with pytest.raises(ValueError):
            Program(symbols=(SymbolClass.UP,), confidences=(0.5, 0.5))

    def test_json_dict(self):
        p = Program(symbols=(SymbolClass.UP,), confidences=(0.875,))
        assert p.to_json_dict() == {"symbols": ["up"], "confidences": [0.875]}


SHEET_LABELS = (SymbolClass.UP, SymbolClass.FORWARD_RIGHT, SymbolClass.ROTATE_LEFT)


def three_glyph_sheet(seed=101, size=300):
    glyphs = [dataset.gen_arrow(cls, seed=seed, size=size) for cls in SHEET_LABELS]
    return dataset.compose_sheet([g.image for g in glyphs])


class TestClassifySheet:
    def test_blank_page(self, bench):
        blank = imaging.GrayImage.from_array(np.full((200, 200), 255, dtype=np.uint8))
        with pytest.raises(NoSymbolsFound):
            classify_sheet(blank, bench.model)

    def test_three_glyphs_in_reading_order(self, bench):
        result = classify_sheet(three_glyph_sheet(), bench.model)
        assert result.program.symbols == SHEET_LABELS
        assert all(c >= 0.5 for c in result.program.confidences)
        xs = [box[0] for box in result.boxes]
        assert xs == sorted(xs)

    def test_smudge_below_min_area_ignored(self, bench):
        sheet = three_glyph_sheet()
        pixels = sheet.pixels.copy()
        pixels[5:8, 5:8] = 0  # 9-pixel smudge, below the default 30 px floor
        smudged = imaging.GrayImage.from_array(pixels)
        result = classify_sheet(smudged, bench.model)
        assert result.program.symbols == SHEET_LABELS

    def test_deterministic(self, bench):
        sheet = three_glyph_sheet()
        a = classify_sheet(sheet, bench.model)
        b = classify_sheet(sheet, bench.model)
        assert a.program == b.program
        assert a.boxes == b.boxes

    def test_all_rejected_raises_low_confidence(self, bench):
        sheet = three_glyph_sheet()
        with pytest.raises(LowConfidence) as exc:
            classify_sheet(sheet, bench.model, reject_threshold=1.01)
        assert len(exc.value.rejected) == 3
        assert all(r.confidence <= 1.0 for r in exc.value.rejected)

    def test_partial_rejection_reported(self, bench):
        sheet = three_glyph_sheet()
        baseline = classify_sheet(sheet, bench.model)
        confidences = sorted(baseline.program.confidences)
        # a threshold between the lowest and highest confidence rejects some
        threshold = (confidences[0] + confidences[-1]) / 2
        if confidences[0] == confidences[-1]:
            pytest.skip("all confidences equal; cannot split")
        result = classify_sheet(sheet, bench.model, reject_threshold=threshold)
        assert len(result.program.symbols) + len(result.rejected) == 3
        assert len(result.rejected) >= 1
