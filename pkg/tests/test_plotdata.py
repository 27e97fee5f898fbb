import csv

import numpy as np
import pytest

from anisowave.anisotropy import make_expansive
from anisowave.cli.plotdata import emit_plot_data
from anisowave.group import field_from_function
from anisowave.models import CheckResult, GridSpec

LINE = make_expansive([[2.0]])
GRID = GridSpec(d=1, n=64, X=8.0, m=3, s_min=-1.0, s_max=1.0)


@pytest.fixture
def gaussian_field():
    return field_from_function(GRID, lambda X, s: np.exp(-np.sum(X ** 2, axis=1) * 2.0 ** s))


def read(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    return lines[0], list(csv.reader(lines[1:]))


def test_slice_kind_emits_one_scale_slice(gaussian_field, tmp_path):
    path = tmp_path / "slice.csv"
    count = emit_plot_data(gaussian_field, "slice", str(path))
    comment, rows = read(path)
    assert count == 64
    assert comment.startswith("# scale slice s=0")
    assert rows[0] == ["x1", "real", "imag", "abs"]
    assert len(rows) == 65
    centre = rows[1 + 32]
    assert float(centre[0]) == 0.0
    assert abs(float(centre[3]) - 1.0) < 1e-12


def test_slice_kind_honours_scale_index(gaussian_field, tmp_path):
    path = tmp_path / "slice.csv"
    emit_plot_data(gaussian_field, "slice", str(path), scale_index=0)
    comment, _ = read(path)
    assert comment.startswith("# scale slice s=-1")


def test_decay_kind_emits_log_pairs(gaussian_field, tmp_path):
    path = tmp_path / "decay.csv"
    count = emit_plot_data(gaussian_field, "decay", str(path), M=LINE)
    comment, rows = read(path)
    assert comment.startswith("# radial decay")
    assert rows[0] == ["log_radius", "log_max_modulus"]
    assert count == len(rows) - 1 > 1
    radius = [float(row[0]) for row in rows[1:]]
    modulus = [float(row[1]) for row in rows[1:]]
    assert all(a < b for a, b in zip(radius, radius[1:]))
    assert all(a >= b for a, b in zip(modulus, modulus[1:]))


def test_decay_kind_needs_matrix(gaussian_field, tmp_path):
    with pytest.raises(ValueError):
        emit_plot_data(gaussian_field, "decay", str(tmp_path / "decay.csv"))


def test_ratio_kind_from_report_rows(tmp_path):
    report = {"rows": [{"seq": 2.0, "maximal": 3.0}, {"seq": 1.0, "maximal": 1.5}]}
    path = tmp_path / "ratio.csv"
    assert emit_plot_data(report, "ratio", str(path)) == 2
    comment, rows = read(path)
    assert "maximal/seq" in comment
    assert rows[0] == ["index", "kind", "maximal", "seq", "ratio"]
    assert [float(row[4]) for row in rows[1:]] == [1.5, 1.5]


def test_ratio_kind_from_check_result(tmp_path):
    result = CheckResult(name="norm-equiv", passed=True,
                         rows=[{"kind": "gaussian", "lp": 2.0, "peetre_disc": 3.0, "peetre_cont": 2.5}])
    path = tmp_path / "ratio.csv"
    emit_plot_data(result, "ratio", str(path))
    _, rows = read(path)
    assert rows[1][:2] == ["0", "gaussian"]
    assert float(rows[1][4]) == 1.5


def test_ratio_kind_without_columns(tmp_path):
    with pytest.raises(ValueError):
        emit_plot_data([{"a": 1.0}], "ratio", str(tmp_path / "ratio.csv"))


def test_header_is_present_for_empty_report(tmp_path):
    path = tmp_path / "ratio.csv"
    with pytest.raises(ValueError):
        emit_plot_data({"rows": []}, "ratio", str(path))
    zero = field_from_function(GRID, lambda X, s: np.zeros(len(X)))
    assert emit_plot_data(zero, "decay", str(path), M=LINE) == 0
    comment, rows = read(path)
    assert comment.startswith("#")
    assert rows == [["log_radius", "log_max_modulus"]]


def test_unknown_kind(gaussian_field, tmp_path):
    with pytest.raises(ValueError):
        emit_plot_data(gaussian_field, "histogram", str(tmp_path / "x.csv"))
