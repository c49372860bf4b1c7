#!/usr/bin/env python3
#
#  errors.py
"""
Exception classes.
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
from typing import Optional

# 3rd party
import numpy

__all__ = ["AdmissibilityError", "GridMismatchError", "MultiplierLabError", "NumericalError"]


class MultiplierLabError(Exception):
	"""
	Base class for errors raised by this package.
	"""


class AdmissibilityError(MultiplierLabError, ValueError):
	"""
	Raised when the input to a constructor or check is rejected.

	:param message:
	:param witness: A point at which the failure was observed, if there is one.
	"""

	#: A point at which the failure was observed.
	witness: Optional[numpy.ndarray]

	def __init__(self, message: str, witness: Optional[numpy.ndarray] = None):
		super().__init__(message)
		self.witness = None if witness is None else numpy.asarray(witness, dtype=float)


class NumericalError(MultiplierLabError, ArithmeticError):
	"""
	Raised when a computation breaks down (non-finite values, failed root brackets,
	iterations that do not converge).

	:param message:
	:param time: The simulation time at which the failure happened.
	:param index: The lattice node or iteration index at which the failure happened.
	"""

	def __init__(self, message: str, time: Optional[float] = None, index: object = None):
		super().__init__(message)

		#: The simulation time at which the failure happened.
		self.time = time

		#: The lattice node or iteration index at which the failure happened.
		self.index = index


class GridMismatchError(MultiplierLabError, ValueError):
	"""
	Raised when time-indexed boundary data does not fit the solver lattice.
	"""
