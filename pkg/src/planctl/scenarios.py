"""The five input-size scenarios for the linear regression script (dense)."""
from __future__ import annotations

from dataclasses import dataclass

from .hops.characteristics import DENSE_CELL_BYTES, MatrixCharacteristics
from .metadata import InputMeta


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    rows: int
    cols: int
    density: float = 1.0

    def inputs(self, block_size: int = 1000) -> dict:
        """Metadata for the inputs ``X`` (rows x cols) and ``y`` (rows x 1)."""
        nnz_x = round(self.rows * self.cols * self.density)
        nnz_y = round(self.rows * self.density)
        return {
            "X": InputMeta(MatrixCharacteristics(self.rows, self.cols, block_size, block_size,
                                                 nnz_x)),
            "y": InputMeta(MatrixCharacteristics(self.rows, 1, block_size, block_size, nnz_y)),
        }

    @property
    def x_bytes(self) -> int:
        return self.rows * self.cols * DENSE_CELL_BYTES


SCENARIOS = {s.name: s for s in (
    ScenarioSpec("XS", 10**4, 10**3),
    ScenarioSpec("XL1", 10**8, 10**3),
    ScenarioSpec("XL2", 10**8, 2 * 10**3),
    ScenarioSpec("XL3", 2 * 10**8, 10**3),
    ScenarioSpec("XL4", 2 * 10**8, 2 * 10**3),
)}
