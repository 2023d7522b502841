"""Cluster configuration and cost-model calibration.

Both are plain dataclasses loadable from line-oriented ``key=value`` text.
Bandwidths are in binary MB/s (2**20 bytes per second).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

MB = 1 << 20
GB = 1 << 30


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CalibrationTable:
    clock_hz: float = 2.0e9
    flops_per_cycle: float = 1.0
    binaryblock_read_mbs: float = 150.0
    binaryblock_write_mbs: float = 150.0
    textcell_read_mbs: float = 30.0
    textcell_write_mbs: float = 30.0
    hdfs_read_mbs: float = 150.0
    hdfs_write_mbs: float = 150.0
    local_disk_mbs: float = 200.0
    shuffle_mbs: float = 200.0
    main_memory_mbs: float = 100.0 * 1024
    job_latency_s: float = 20.0
    task_latency_s: float = 1.5
    parallelism_discount: float = 0.5
    unknown_iterations: float = 10.0
    mmd_corr: float = 0.5
    mms_corr: float = 0.5
    bookkeeping_cycles: float = 10.0
    kahan_flops_per_cell: float = 4.0
    partition_cycles_per_cell: float = 138.0
    textcell_cycles_per_cell: float = 400.0
    textcell_bytes_per_cell: float = 24.0

    def read_bandwidth(self, fmt: str) -> float:
        mbs = self.textcell_read_mbs if fmt == "textcell" else self.binaryblock_read_mbs
        return mbs * MB

    def write_bandwidth(self, fmt: str) -> float:
        mbs = self.textcell_write_mbs if fmt == "textcell" else self.binaryblock_write_mbs
        return mbs * MB

    @property
    def cycles_per_second(self) -> float:
        return self.clock_hz * self.flops_per_cycle


# clock rate of the reference calibration for per-instruction compute times
PAPER_CALIBRATION = CalibrationTable(clock_hz=2.15e9)
DEFAULT_CALIBRATION = CalibrationTable()

CALIBRATIONS = {"default": DEFAULT_CALIBRATION, "paper": PAPER_CALIBRATION}


@dataclass(frozen=True)
class ClusterConfig:
    local_max_heap: int = 2048 * MB
    map_max_heap: int = 2048 * MB
    reduce_max_heap: int = 2048 * MB
    budget_ratio: float = 0.7
    k_local: int = 24
    k_map: int = 144
    k_reduce: int = 72
    hdfs_block_size: int = 128 * MB
    num_reducers: int = 12
    block_size: int = 1000
    partition_threshold: int = 256 * MB
    partition_size: int = 32 * MB
    # resource-capped (YARN-like) profile; zero disables the cap
    yarn_cores: int = 0
    yarn_memory: int = 0
    yarn_task_memory: int = 0
    scratch_host: str = "127.0.0.1"
    calibration: CalibrationTable = field(default_factory=CalibrationTable)

    def __post_init__(self):
        for f in fields(self):
            if f.name in ("calibration", "scratch_host"):
                continue
            v = getattr(self, f.name)
            if f.name.startswith("yarn_"):
                if v < 0:
                    raise ConfigError(f"{f.name} must be >= 0, got {v}")
            elif not v > 0:
                raise ConfigError(f"{f.name} must be positive, got {v}")
        for f in fields(self.calibration):
            v = getattr(self.calibration, f.name)
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{f.name} must be positive, got {v}")

    @property
    def local_budget(self) -> float:
        return self.budget_ratio * self.local_max_heap

    @property
    def map_budget(self) -> float:
        return self.budget_ratio * self.map_max_heap

    @property
    def reduce_budget(self) -> float:
        return self.budget_ratio * self.reduce_max_heap

    def _yarn_cap(self, k: int) -> int:
        if not (self.yarn_cores and self.yarn_memory and self.yarn_task_memory):
            return k
        return max(1, min(k, self.yarn_cores, self.yarn_memory // self.yarn_task_memory))

    @property
    def effective_k_map(self) -> int:
        return self._yarn_cap(self.k_map)

    @property
    def effective_k_reduce(self) -> int:
        return self._yarn_cap(self.k_reduce)


def _all_keys() -> dict:
    keys = {f.name: ("cluster", f.type) for f in fields(ClusterConfig) if f.name != "calibration"}
    keys.update({f.name: ("calibration", f.type) for f in fields(CalibrationTable)})
    return keys


def _coerce(name: str, ftype, text: str):
    t = ftype if isinstance(ftype, str) else getattr(ftype, "__name__", str(ftype))
    if t == "str":
        return text
    num = float(text)
    if t == "int":
        if num != int(num):
            raise ValueError(f"{name} must be an integer")
        return int(num)
    return num


def apply_overrides(cc: ClusterConfig, pairs: dict) -> ClusterConfig:
    keys = _all_keys()
    cluster, calib = {}, {}
    for k, v in pairs.items():
        if k not in keys:
            raise ConfigError(f"unknown config key '{k}'")
        scope, ftype = keys[k]
        try:
            value = _coerce(k, ftype, str(v).strip())
        except ValueError as e:
            raise ConfigError(f"bad value for {k}: {v!r} ({e})")
        (cluster if scope == "cluster" else calib)[k] = value
    if calib:
        cluster["calibration"] = replace(cc.calibration, **calib)
    return replace(cc, **cluster)


def parse_key_values(text: str, source: str = "<config>") -> dict:
    out = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{no}: expected key=value, got {raw.strip()!r}")
        k, v = line.split("=", 1)
        k = k.strip()
        if not k:
            raise ConfigError(f"{source}:{no}: empty key")
        out[k] = v.strip()
    return out


def load_config(path: Optional[str] = None, calibration: str = "default",
                overrides: Optional[dict] = None) -> ClusterConfig:
    """Build a config from defaults, an optional key=value file and overrides."""
    if calibration not in CALIBRATIONS:
        raise ConfigError(f"unknown calibration preset '{calibration}'")
    cc = ClusterConfig(calibration=CALIBRATIONS[calibration])
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        pairs = parse_key_values(text, str(path))
        try:
            cc = apply_overrides(cc, pairs)
        except ConfigError as e:
            # attach the offending line number
            for no, raw in enumerate(text.splitlines(), 1):
                key = raw.split("=", 1)[0].strip()
                if key and key in str(e):
                    raise ConfigError(f"{path}:{no}: {e}") from None
            raise
    if overrides:
        cc = apply_overrides(cc, overrides)
    return cc


def dump_config(cc: ClusterConfig) -> str:
    lines = []
    for f in fields(ClusterConfig):
        if f.name != "calibration":
            lines.append(f"{f.name}={getattr(cc, f.name)}")
    for f in fields(CalibrationTable):
        lines.append(f"{f.name}={getattr(cc.calibration, f.name)!r}")
    return "\n".join(lines) + "\n"


def format_budget_mb(nbytes: float) -> str:
    return f"{int(nbytes / MB + 0.5)}MB"

