#!/usr/bin/env python3
#
#  enums.py
"""
Enumerations.
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
from enum import Enum

__all__ = [
		"BeltTag",
		"BoundaryLabel",
		"CaseTag",
		"FeedbackKind",
		"FieldFamily",
		"FitModel",
		"InterfaceKind",
		"LabEnum",
		"NodeKind",
		"Verdict"
		]


class LabEnum(str, Enum):
	"""
	Base class for string-valued enums which can be looked up leniently by name or value.
	"""

	@classmethod
	def from_name(cls, name: str) -> "LabEnum":
		"""
		Return the member with the given name or value.

		Lookup ignores case, and treats ``-`` and ``_`` as equivalent.

		:param name:
		"""

		if isinstance(name, cls):
			return name

		normalised = name.strip().lower().replace('-', '_')
		for member in cls:
			if normalised in {member.name.lower(), member.value.lower().replace('-', '_')}:
				return member

		raise ValueError(f"{name!r} is not a valid {cls.__name__}")

	def __str__(self) -> str:
		return self.value


class FieldFamily(LabEnum):
	"""
	Families of multiplier fields.
	"""

	affine = "affine"
	rotated2d = "rotated2d"
	perturbed = "perturbed"
	custom = "custom"


class BoundaryLabel(LabEnum):
	"""
	Boundary condition carried by part of the boundary.
	"""

	#: Feedback (or control) part, where ``m.ν ≥ 0``.
	N = "N"

	#: Clamped part, where ``m.ν ≤ 0``.
	D = "D"


class InterfaceKind(LabEnum):
	"""
	Where an interface point between the two boundary parts sits.
	"""

	edge_interior = "edge-interior"
	corner = "corner"


class BeltTag(LabEnum):
	"""
	Classification of an edge of the square against a rotated multiplier.
	"""

	no_interface = "no-interface"
	B_minus = "B_minus"
	B_plus = "B_plus"


class CaseTag(LabEnum):
	"""
	The three parameter cells for the pair of rotation angles.
	"""

	C1 = "C1"
	C2 = "C2"
	C3 = "C3"


class FeedbackKind(LabEnum):
	"""
	Kinds of boundary feedback law.
	"""

	zero = "zero"
	linear = "linear"
	power = "power"
	custom = "custom"


class FitModel(LabEnum):
	"""
	Decay models which can be fitted to an energy trace.
	"""

	exponential = "exponential"
	power = "power"


class NodeKind(LabEnum):
	"""
	Role of a node of the square lattice.
	"""

	interior = "interior"
	dirichlet = "dirichlet"
	neumann = "neumann"


class Verdict(LabEnum):
	"""
	Outcome of a checked condition.
	"""

	verified = "verified"
	not_verified = "not verified"
	inapplicable = "inapplicable"
	consistent = "consistent"
	inconsistent = "inconsistent"
	not_decaying = "not decaying"
