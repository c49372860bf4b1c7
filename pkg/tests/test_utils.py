# stdlib
import math
from typing import NamedTuple

# 3rd party
import numpy
import pytest
from domdf_python_tools.paths import PathPlus

# this package
from multiplier_lab.enums import BoundaryLabel, FeedbackKind, FieldFamily, Verdict
from multiplier_lab.utils import (
		atomic_write,
		format_float,
		jsonable,
		read_csv_columns,
		read_snapshot,
		trapezoid_weights,
		write_csv,
		write_json,
		write_snapshot
		)


class Report(NamedTuple):
	value: float
	label: BoundaryLabel
	points: numpy.ndarray


def test_atomic_write(tmp_path):
	target = PathPlus(tmp_path / "nested" / "dir" / "file.txt")
	assert atomic_write(target, "first\n") == target
	atomic_write(target, "second\n")
	assert target.read_text() == "second\n"
	assert [p.name for p in target.parent.iterdir()] == ["file.txt"]


@pytest.mark.parametrize(
		"value, expected",
		[
				(0.1, "0.1"),
				(1 / 3, "0.3333333333333333"),
				(numpy.float64(2.5), "2.5"),
				(math.nan, "nan"),
				(math.inf, "inf"),
				(-math.inf, "-inf"),
				]
		)
def test_format_float(value: float, expected: str):
	assert format_float(value) == expected


def test_jsonable():
	report = Report(math.inf, BoundaryLabel.N, numpy.array([[0.5, numpy.nan]]))
	assert jsonable(report) == {"value": None, "label": 'N', "points": [[0.5, None]]}
	assert jsonable({1: numpy.int64(3), "flag": numpy.bool_(True)}) == {'1': 3, "flag": True}
	assert jsonable(PathPlus("a/b")) == "a/b"


def test_write_json(tmp_path):
	filename = PathPlus(tmp_path / "out.json")
	write_json(filename, {'b': 1, 'a': numpy.float64(0.25)})
	assert filename.read_text() == '{\n  "a": 0.25,\n  "b": 1\n}\n'


def test_csv_round_trip(tmp_path):
	filename = tmp_path / "table.csv"
	write_csv(filename, ['t', 'E'], [(0.0, 1.0), (0.1, numpy.float64(1 / 3)), (0.2, math.nan)])
	assert PathPlus(filename).read_lines()[:2] == ["t,E", "0.0,1.0"]

	columns = read_csv_columns(filename)
	numpy.testing.assert_array_equal(columns['t'], [0.0, 0.1, 0.2])
	assert columns['E'][1] == 1 / 3
	assert math.isnan(columns['E'][2])


def test_snapshot(tmp_path):
	filename = tmp_path / "u.csv"
	values = numpy.linspace(0, 1, 25)
	write_snapshot(filename, values, 0.25, 1.5)
	assert PathPlus(filename).read_lines()[0] == "h=0.25 t=1.5"

	read_values, h, t = read_snapshot(filename)
	numpy.testing.assert_array_equal(read_values, values)
	assert (h, t) == (0.25, 1.5)


def test_snapshot_without_header(tmp_path):
	filename = PathPlus(tmp_path / "u.csv")
	filename.write_text("h=0.25\n1.0\n")
	with pytest.raises(ValueError, match="no 't'"):
		read_snapshot(filename)

	filename.write_text('')
	with pytest.raises(ValueError, match="is empty"):
		read_snapshot(filename)


def test_trapezoid_weights():
	weights = trapezoid_weights(numpy.array([0.0, 0.5, 2.0]))
	numpy.testing.assert_allclose(weights, [0.25, 1.0, 0.75])
	assert weights.sum() == pytest.approx(2.0)
	assert trapezoid_weights(numpy.array([1.0])).tolist() == [0.0]


class TestFromName:

	@pytest.mark.parametrize(
			"name, member",
			[
					("affine", FieldFamily.affine),
					("Rotated2D", FieldFamily.rotated2d),
					(" perturbed ", FieldFamily.perturbed),
					("not-verified", Verdict.not_verified),
					("not verified", Verdict.not_verified),
					("NOT_DECAYING", Verdict.not_decaying),
					]
			)
	def test_lookup(self, name: str, member):
		assert type(member).from_name(name) is member

	def test_member_passes_through(self):
		assert FeedbackKind.from_name(FeedbackKind.linear) is FeedbackKind.linear

	def test_unknown(self):
		with pytest.raises(ValueError, match="'cubic' is not a valid FeedbackKind"):
			FeedbackKind.from_name("cubic")

	def test_str(self):
		assert str(Verdict.not_verified) == "not verified"
