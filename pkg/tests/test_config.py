import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planctl.config import (GB, MB, ConfigError, apply_overrides, dump_config, format_budget_mb,
                            load_config, parse_key_values)
from planctl.hops.explain import explain_header
from planctl.metadata import MetadataError, parse_metadata
from planctl.scenarios import SCENARIOS


def test_defaults_reproduce_reference_setup():
    cc = load_config()
    assert cc.local_max_heap == cc.map_max_heap == cc.reduce_max_heap == 2048 * MB
    assert format_budget_mb(cc.local_budget) == "1434MB"
    assert (cc.k_local, cc.effective_k_map, cc.effective_k_reduce) == (24, 144, 72)
    assert cc.num_reducers == 12 and cc.hdfs_block_size == 128 * MB and cc.block_size == 1000
    assert explain_header(cc) == [
        "# Memory Budget local/remote = 1434MB/1434MB/1434MB",
        "# Degree of Parallelism (vcores) local/remote = 24/144/72"]


def test_budget_ratio_override():
    assert format_budget_mb(load_config(overrides={"budget_ratio": "0.5"}).local_budget) == "1024MB"


def test_resource_capped_profile():
    cc = load_config(overrides={"yarn_cores": "36", "yarn_memory": str(72 * GB),
                                "yarn_task_memory": str(2 * GB)})
    assert cc.effective_k_map == 36
    assert cc.effective_k_reduce == 36
    assert cc.k_map == 144


def test_reference_calibration_preset():
    assert load_config(calibration="paper").calibration.clock_hz == 2.15e9
    assert load_config().calibration.clock_hz == 2.0e9
    with pytest.raises(ConfigError):
        load_config(calibration="nope")


def test_round_trip(tmp_path):
    cc = load_config(calibration="paper", overrides={"budget_ratio": "0.6", "k_map": "100",
                                                      "shuffle_mbs": "123.5"})
    path = tmp_path / "cluster.conf"
    path.write_text(dump_config(cc))
    assert load_config(str(path)) == cc


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 1.0), st.integers(1, 512), st.integers(1, 64),
       st.floats(1.0, 1e4, allow_nan=False))
def test_round_trip_property(ratio, k_map, reducers, bw):
    cc = apply_overrides(load_config(), {"budget_ratio": repr(ratio), "k_map": str(k_map),
                                         "num_reducers": str(reducers), "hdfs_read_mbs": repr(bw)})
    again = apply_overrides(load_config(), parse_key_values(dump_config(cc)))
    assert again == cc


def test_config_file_comments_and_blank_lines(tmp_path):
    path = tmp_path / "c.conf"
    path.write_text("# cluster\n\nbudget_ratio = 0.5  # half\nk_local=8\n")
    cc = load_config(str(path))
    assert cc.budget_ratio == 0.5 and cc.k_local == 8


@pytest.mark.parametrize("text,needle", [
    ("budget_ratio=0.5\nnot a pair\n", ":2:"),
    ("k_map=0\n", "k_map"),
    ("budget_ratio=-1\n", "budget_ratio"),
    ("k_map=1.5\n", "integer"),
    ("frobnicate=1\n", "unknown config key"),
    ("clock_hz=abc\n", "clock_hz"),
])
def test_bad_config_files(tmp_path, text, needle):
    path = tmp_path / "bad.conf"
    path.write_text(text)
    with pytest.raises(ConfigError, match=needle):
        load_config(str(path))


def test_bad_line_reports_line_number(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("k_local=4\nk_map=-3\n")
    with pytest.raises(ConfigError, match=r"bad.conf:2:"):
        load_config(str(path))


@pytest.mark.parametrize("name,gigabytes", [("XS", 0.08), ("XL1", 800), ("XL2", 1600),
                                            ("XL3", 1600), ("XL4", 3200)])
def test_scenario_sizes(name, gigabytes):
    spec = SCENARIOS[name]
    assert abs(spec.x_bytes - gigabytes * 1e9) <= 0.01 * gigabytes * 1e9
    x = spec.inputs()["X"].mc
    assert x.nnz == x.rows * x.cols


class TestMetadata:
    def test_parse(self):
        m = parse_metadata("rows=10\ncols=5\nnnz=7\nformat=textcell\n")
        assert (m.mc.rows, m.mc.cols, m.mc.nnz, m.format) == (10, 5, 7, "textcell")
        assert m.mc.row_block == 1000

    def test_nnz_defaults_to_unknown(self):
        assert parse_metadata("rows=10\ncols=5\n").mc.nnz == -1

    @pytest.mark.parametrize("text,needle", [
        ("cols=5\n", "missing 'rows'"),
        ("rows=10\ncols=5\nnnz=51\n", "exceeds"),
        ("rows=10\ncols=x\n", "number"),
        ("rows=10\ncols=5\nformat=csv\n", "format"),
        ("rows=10\ncols=5\ncolour=red\n", "unknown key"),
        ("rows=1.5\ncols=5\n", "integer"),
    ])
    def test_errors(self, text, needle):
        with pytest.raises(MetadataError, match=needle):
            parse_metadata(text)
