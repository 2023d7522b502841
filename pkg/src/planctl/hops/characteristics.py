"""Matrix size descriptors and in-memory / serialized size estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

UNKNOWN = -1
MB = 1 << 20

# dense and sparse (CSR-like) cell costs in bytes
DENSE_CELL_BYTES = 8
SPARSE_CELL_BYTES = 12
SPARSE_ROW_BYTES = 4
SPARSITY_THRESHOLD = 0.4


@dataclass(frozen=True)
class MatrixCharacteristics:
    rows: int = UNKNOWN
    cols: int = UNKNOWN
    row_block: int = UNKNOWN
    col_block: int = UNKNOWN
    nnz: int = UNKNOWN

    @classmethod
    def scalar(cls) -> "MatrixCharacteristics":
        return cls(0, 0, UNKNOWN, UNKNOWN, UNKNOWN)

    @property
    def dims_known(self) -> bool:
        return self.rows >= 0 and self.cols >= 0

    @property
    def nnz_known(self) -> bool:
        return self.nnz >= 0

    @property
    def cells(self) -> int:
        return self.rows * self.cols if self.dims_known else UNKNOWN

    @property
    def sparsity(self) -> float:
        """nnz / cells; 1.0 when nnz is unknown (dense assumption)."""
        if not self.dims_known:
            return 1.0
        if self.cells == 0:
            return 0.0
        if not self.nnz_known:
            return 1.0
        return self.nnz / self.cells

    def with_blocks(self, block: int) -> "MatrixCharacteristics":
        return replace(self, row_block=block, col_block=block)

    def num_blocks(self) -> int:
        if not self.dims_known or self.row_block <= 0 or self.col_block <= 0:
            return UNKNOWN
        return max(1, math.ceil(self.rows / self.row_block)) * max(1, math.ceil(self.cols / self.col_block))

    def as_list(self) -> list:
        return [self.rows, self.cols, self.row_block, self.col_block, self.nnz]


def is_sparse(mc: MatrixCharacteristics) -> bool:
    return (mc.dims_known and mc.nnz_known and mc.cols > 1
            and mc.cells > 0 and mc.sparsity < SPARSITY_THRESHOLD)


def mem_estimate_matrix(mc: MatrixCharacteristics, representation: str = "auto") -> float:
    """In-memory size in bytes; ``math.inf`` when dimensions are unknown.

    ``representation`` is ``"dense"``, ``"sparse"`` or ``"auto"`` (sparse iff
    sparsity < 0.4 and more than one column).
    """
    if not mc.dims_known:
        return math.inf
    if representation == "auto":
        representation = "sparse" if is_sparse(mc) else "dense"
    if representation == "sparse" and mc.nnz_known:
        return float(mc.nnz * SPARSE_CELL_BYTES + mc.rows * SPARSE_ROW_BYTES)
    return float(mc.rows * mc.cols * DENSE_CELL_BYTES)


def serialized_size(mc: MatrixCharacteristics, fmt: str = "binaryblock",
                    text_bytes_per_cell: float = 24.0) -> float:
    """Serialized size on disk/HDFS in bytes; ``math.inf`` when unknown."""
    if not mc.dims_known:
        return math.inf
    if fmt == "textcell":
        nnz = mc.nnz if mc.nnz_known else mc.cells
        return float(nnz * text_bytes_per_cell)
    return mem_estimate_matrix(mc)


def to_mb(nbytes: float) -> float:
    return nbytes / MB


def format_dim(v: int) -> str:
    """Compact dimension formatting: 1, 1000 -> 1e3, 20000000 -> 2e7."""
    if v < 1000:
        return str(v)
    exp = len(str(v)) - 1
    mant = v / 10 ** exp
    ms = f"{mant:.6g}"
    return f"{ms}e{exp}"


def format_mc(mc: MatrixCharacteristics) -> str:
    return "[" + ",".join(format_dim(v) for v in mc.as_list()) + "]"
