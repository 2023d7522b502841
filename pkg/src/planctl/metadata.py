"""Metadata sidecars: ``<path>.mtd`` files with key=value lines.

Keys are ``rows``, ``cols``, ``nnz`` (optional, -1 = unknown), ``format``
(``binaryblock`` or ``textcell``) and optionally ``rows_in_block`` /
``cols_in_block``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .config import ConfigError, parse_key_values
from .hops.characteristics import UNKNOWN, MatrixCharacteristics

FORMATS = ("binaryblock", "textcell")


class MetadataError(ValueError):
    pass


@dataclass(frozen=True)
class InputMeta:
    mc: MatrixCharacteristics
    format: str = "binaryblock"


def sidecar_path(path: str) -> Path:
    return Path(str(path) + ".mtd")


def parse_metadata(text: str, source: str = "<metadata>", block_size: int = 1000) -> InputMeta:
    try:
        kv = parse_key_values(text, source)
    except ConfigError as e:
        raise MetadataError(str(e)) from None
    unknown = set(kv) - {"rows", "cols", "nnz", "format", "rows_in_block", "cols_in_block"}
    if unknown:
        raise MetadataError(f"{source}: unknown key(s) {', '.join(sorted(unknown))}")
    vals = {}
    for key, default in (("rows", None), ("cols", None), ("nnz", UNKNOWN),
                         ("rows_in_block", block_size), ("cols_in_block", block_size)):
        if key not in kv:
            if default is None:
                raise MetadataError(f"{source}: missing '{key}'")
            vals[key] = default
            continue
        try:
            v = float(kv[key])
        except ValueError:
            raise MetadataError(f"{source}: {key} must be a number, got {kv[key]!r}") from None
        if v != int(v) or v < UNKNOWN:
            raise MetadataError(f"{source}: {key} must be an integer >= -1, got {kv[key]!r}")
        vals[key] = int(v)
    fmt = kv.get("format", "binaryblock")
    if fmt not in FORMATS:
        raise MetadataError(f"{source}: unsupported format {fmt!r}")
    mc = MatrixCharacteristics(vals["rows"], vals["cols"], vals["rows_in_block"],
                               vals["cols_in_block"], vals["nnz"])
    if mc.dims_known and mc.nnz_known and mc.nnz > mc.cells:
        raise MetadataError(f"{source}: nnz {mc.nnz} exceeds rows*cols {mc.cells}")
    return InputMeta(mc, fmt)


def read_metadata(path: str, block_size: int = 1000) -> InputMeta:
    side = sidecar_path(path)
    if not side.is_file():
        raise MetadataError(f"no metadata for input '{path}' (expected {side})")
    return parse_metadata(side.read_text(encoding="utf-8"), str(side), block_size)


def format_metadata(meta: InputMeta) -> str:
    mc = meta.mc
    return (f"rows={mc.rows}\ncols={mc.cols}\nnnz={mc.nnz}\nformat={meta.format}\n"
            f"rows_in_block={mc.row_block}\ncols_in_block={mc.col_block}\n")


def write_metadata(path: str, meta: InputMeta) -> Path:
    side = sidecar_path(path)
    side.write_text(format_metadata(meta), encoding="utf-8")
    return side
