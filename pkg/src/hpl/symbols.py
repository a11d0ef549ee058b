"""The six arrow symbol classes and their canonical names."""

from __future__ import annotations

from enum import IntEnum


class SymbolClass(IntEnum):
    """Arrow vocabulary. Integer codes fix the class order everywhere
    (confusion matrices, centroid tables, model outputs)."""

    UP = 0
    DOWN = 1
    FORWARD_RIGHT = 2
    FORWARD_LEFT = 3
    ROTATE_RIGHT = 4
    ROTATE_LEFT = 5

    @property
    def canonical_name(self) -> str:
        return _NAMES[self]

    @classmethod
    def from_name(cls, name: str) -> "SymbolClass":
        key = name.strip().lower()
        if key not in _BY_NAME:
            raise KeyError(name)
        return _BY_NAME[key]


_NAMES = {
    SymbolClass.UP: "up",
    SymbolClass.DOWN: "down",
    SymbolClass.FORWARD_RIGHT: "forward_right",
    SymbolClass.FORWARD_LEFT: "forward_left",
    SymbolClass.ROTATE_RIGHT: "rotate_right",
    SymbolClass.ROTATE_LEFT: "rotate_left",
}

_BY_NAME = {name: sym for sym, name in _NAMES.items()}

NUM_CLASSES = len(SymbolClass)

ALL_CLASSES = tuple(SymbolClass)

# Left/right swaps; up/down are their own mirror partner.
MIRROR = {
    SymbolClass.UP: SymbolClass.UP,
    SymbolClass.DOWN: SymbolClass.DOWN,
    SymbolClass.FORWARD_RIGHT: SymbolClass.FORWARD_LEFT,
    SymbolClass.FORWARD_LEFT: SymbolClass.FORWARD_RIGHT,
    SymbolClass.ROTATE_RIGHT: SymbolClass.ROTATE_LEFT,
    SymbolClass.ROTATE_LEFT: SymbolClass.ROTATE_RIGHT,
}
