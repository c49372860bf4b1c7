#!/usr/bin/env python3
#
#  utils.py
"""
General utility functions.
"""
#
#  Copyright © 2025 Dominic Davis-Foster <dominic@davis-foster.co.uk>
#
#  Permission is hereby granted, free of charge, to any person obtaining a copy
#  of this software and associated documentation files (the "Software"), to deal
#  in the Software without restriction, including without limitation the rights
#  to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
#  copies of the Software, and to permit persons to whom the Software is
#  furnished to do so, subject to the following conditions:
#
#  The above copyright notice and this permission notice shall be included in all
#  copies or substantial portions of the Software.
#
#  THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND,
#  EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF
#  MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT.
#  IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
#  DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
#  OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE
#  OR OTHER DEALINGS IN THE SOFTWARE.
#

# stdlib
import csv
import dataclasses
import io
import json
import math
import os
from collections.abc import Iterable, Sequence
from enum import Enum
from typing import Any

# 3rd party
import numpy
from domdf_python_tools.paths import PathPlus
from domdf_python_tools.typing import PathLike

__all__ = [
		"atomic_write",
		"format_float",
		"jsonable",
		"read_csv_columns",
		"read_snapshot",
		"trapezoid_weights",
		"write_csv",
		"write_json",
		"write_snapshot"
		]


def atomic_write(filename: PathLike, text: str) -> PathPlus:
	"""
	Write ``text`` to ``filename``, replacing it in one step.

	The text is written to a hidden sibling file which is then renamed over the target,
	so readers never see a partially written file.

	:param filename:
	:param text:

	:returns: The path written to.
	"""

	filename = PathPlus(filename)
	filename.parent.maybe_make(parents=True)
	tmp_filename = filename.with_name(f".{filename.name}.tmp")
	tmp_filename.write_text(text, encoding="UTF-8")
	os.replace(tmp_filename, filename)
	return filename


def format_float(value: float) -> str:
	"""
	Format a float for CSV output with round-trip precision.

	:param value:
	"""

	value = float(value)
	if math.isnan(value):
		return "nan"
	if math.isinf(value):
		return "inf" if value > 0 else "-inf"
	return repr(value)


def jsonable(obj: Any) -> Any:
	"""
	Convert ``obj`` into something :func:`json.dumps` accepts.

	Handles numpy arrays and scalars, enums, dataclasses and :class:`~typing.NamedTuple`\\s.
	Non-finite floats become :py:obj:`None`.

	:param obj:
	"""

	if isinstance(obj, Enum):
		return obj.value
	if isinstance(obj, numpy.ndarray):
		return jsonable(obj.tolist())
	if isinstance(obj, (numpy.floating, float)):
		return float(obj) if math.isfinite(obj) else None
	if isinstance(obj, (numpy.integer, )):
		return int(obj)
	if isinstance(obj, (numpy.bool_, )):
		return bool(obj)
	if hasattr(obj, "_asdict"):
		return {k: jsonable(v) for k, v in obj._asdict().items()}
	if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
		return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
	if isinstance(obj, dict):
		return {str(k): jsonable(v) for k, v in obj.items()}
	if isinstance(obj, (list, tuple)):
		return [jsonable(v) for v in obj]
	if isinstance(obj, os.PathLike):
		return os.fspath(obj)
	return obj


def write_json(filename: PathLike, payload: Any) -> PathPlus:
	"""
	Atomically write ``payload`` as indented JSON with sorted keys.

	:param filename:
	:param payload:
	"""

	return atomic_write(filename, json.dumps(jsonable(payload), indent=2, sort_keys=True) + '\n')


def write_csv(filename: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> PathPlus:
	"""
	Atomically write a CSV file.

	Floats are written with :func:`format_float` so identical data gives identical bytes.

	:param filename:
	:param header: The column names.
	:param rows:
	"""

	buf = io.StringIO()
	writer = csv.writer(buf, lineterminator='\n')
	writer.writerow(header)
	for row in rows:
		writer.writerow([format_float(v) if isinstance(v, (float, numpy.floating)) else jsonable(v) for v in row])

	return atomic_write(filename, buf.getvalue())


def write_snapshot(filename: PathLike, values: numpy.ndarray, h: float, t: float) -> PathPlus:
	"""
	Atomically write lattice node values as a flat CSV with a one-line ``h=<…> t=<…>`` header.

	:param filename:
	:param values: Node values, in lattice order.
	:param h: The lattice spacing.
	:param t: The simulation time of the snapshot.
	"""

	lines = [f"h={format_float(h)} t={format_float(t)}"]
	lines.extend(format_float(v) for v in numpy.ravel(values))
	return atomic_write(filename, '\n'.join(lines) + '\n')


def read_csv_columns(filename: PathLike) -> dict[str, numpy.ndarray]:
	"""
	Read a numeric CSV file written by :func:`write_csv` into a mapping of column name to array.

	:param filename:
	"""

	with PathPlus(filename).open(encoding="UTF-8", newline='') as fp:
		reader = csv.reader(fp)
		header = next(reader)
		rows = [[float(v) for v in row] for row in reader if row]

	data = numpy.array(rows, dtype=float).reshape(len(rows), len(header))
	return {name: data[:, idx] for idx, name in enumerate(header)}


def trapezoid_weights(points: numpy.ndarray) -> numpy.ndarray:
	"""
	Return trapezoid rule weights for the (sorted) abscissae ``points``.

	:param points:
	"""

	points = numpy.asarray(points, dtype=float)
	weights = numpy.zeros_like(points)
	if points.size < 2:
		return weights

	gaps = numpy.diff(points)
	weights[:-1] += gaps / 2
	weights[1:] += gaps / 2
	return weights


def read_snapshot(filename: PathLike) -> tuple[numpy.ndarray, float, float]:
	"""
	Read a file written by :func:`write_snapshot`.

	:param filename:

	:returns: The node values, the lattice spacing and the time.
	"""

	lines = PathPlus(filename).read_text(encoding="UTF-8").splitlines()
	if not lines:
		raise ValueError(f"{filename} is empty")

	header = dict(part.split('=', 1) for part in lines[0].split())
	try:
		h, t = float(header['h']), float(header['t'])
	except KeyError as e:
		raise ValueError(f"{filename} has no {e.args[0]!r} in its header") from None

	values = numpy.array([float(line) for line in lines[1:] if line.strip()], dtype=float)
	return values, h, t
