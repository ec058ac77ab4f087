"""The five terminal possession outcomes and their points values."""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class OutcomeLabel(IntEnum):
    """Terminal outcome of a possession, encoded 0..4 in CSV files."""

    NO_POINTS = 0
    DROP_GOAL = 1
    PENALTY_GOAL = 2
    UNCONVERTED_TRY = 3
    CONVERTED_TRY = 4

    @property
    def points(self) -> int:
        return _POINTS[self.value]


_POINTS = (0, 1, 2, 4, 6)

#: Points value per outcome, indexed by ``OutcomeLabel`` value.
POINTS = np.array(_POINTS, dtype=float)

#: Column-name stems used in CSV headers, in outcome order.
OUTCOME_NAMES = (
    "no_points",
    "drop_goal",
    "penalty_goal",
    "unconverted_try",
    "converted_try",
)

N_OUTCOMES = len(OUTCOME_NAMES)
