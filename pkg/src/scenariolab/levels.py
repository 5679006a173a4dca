"""Static description of the five decision levels.

A scenario walks levels 1..5 in order.  Every level is a classification
task over 2 or 4 classes plus a credit-limited "gather additional data"
action.  Internally all levels share one canonical action space of 5
slots: slots 0..3 are class indices for the current level, slot 4 is
gather.  The per-level presentation ids used in reports and in the
operator UI (where gather is action 2 for binary levels and 4 for
level 2) are a display mapping only.
"""
from __future__ import annotations

from dataclasses import dataclass

N_SLOTS = 5
GATHER_SLOT = 4
MAX_CLASSES = 4
N_LEVELS = 5

GATHER_LABEL = "Gather Additional Data"


@dataclass(frozen=True)
class LevelSpec:
    level_id: int
    class_labels: tuple[str, ...]

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    @property
    def gather_slot(self) -> int:
        return GATHER_SLOT

    @property
    def n_actions(self) -> int:
        """Size of the level's native action space (classes + gather)."""
        return self.n_classes + 1

    def native_action_id(self, slot: int) -> int:
        """Map a canonical slot to the level's presentation action id."""
        if slot == GATHER_SLOT:
            return self.n_classes
        if 0 <= slot < self.n_classes:
            return slot
        raise ValueError(f"slot {slot} not valid for level {self.level_id}")

    def option_labels(self) -> list[str]:
        """Button labels in native order: one per class, then gather."""
        return [*self.class_labels, GATHER_LABEL]


LEVELS: dict[int, LevelSpec] = {
    1: LevelSpec(1, ("informative", "not informative")),
    2: LevelSpec(
        2,
        (
            "affected individuals",
            "infrastructure and utility damage",
            "other relevant information",
            "rescue and volunteering efforts",
        ),
    ),
    3: LevelSpec(3, ("little or no damage", "severe damage")),
    4: LevelSpec(4, ("no damage", "major damage")),
    5: LevelSpec(5, ("building no damage", "building destroyed")),
}


def level_spec(level_id: int) -> LevelSpec:
    try:
        return LEVELS[level_id]
    except KeyError:
        raise ValueError(f"level must be in 1..{N_LEVELS}, got {level_id}") from None
