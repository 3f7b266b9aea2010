import os

import pytest

from courbure.output import csv_text, format_number, svg_lineplot, write_atomic, write_csv


def test_number_format_has_enough_digits():
    assert format_number(3) == "3"
    s = format_number(1 / 3)
    assert float(s) == 1 / 3 or abs(float(s) - 1 / 3) < 1e-15
    assert len(s.split("e")[0].replace(".", "")) >= 12


def test_csv_text():
    text = csv_text(("a", "b"), [(1, 0.5)])
    assert text == "a,b\n1,5.000000000000000e-01\n"


def test_atomic_write_leaves_no_temp(tmp_path):
    path = write_csv(tmp_path / "sub" / "x.csv", ("a",), [(1,)])
    assert path.read_text() == "a\n1\n"
    assert os.listdir(tmp_path / "sub") == ["x.csv"]


def test_atomic_write_keeps_old_file_on_failure(tmp_path):
    path = tmp_path / "x.txt"
    write_atomic(path, "old")


    with pytest.raises(TypeError):
        write_atomic(path, 123)
    assert path.read_text() == "old"
    assert os.listdir(tmp_path) == ["x.txt"]


def test_svg_lineplot():
    svg = svg_lineplot({"a": ([1, 2, 3], [1, 10, 100]), "b": ([1, 3], [0, 5])}, logy=True)
    assert svg.startswith("<svg") and svg.count("<polyline") == 2
    with pytest.raises(ValueError):
        svg_lineplot({"a": ([1], [-1])}, logy=True)
