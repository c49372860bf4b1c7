#!/usr/bin/env python3
#
#  config.py
"""
Run configuration schemas for the command line.
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
import math
from typing import Annotated, Literal, Optional, Union

# 3rd party
import numpy
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

# this package
from multiplier_lab.enums import FitModel
from multiplier_lab.errors import GridMismatchError
from multiplier_lab.fields import Box, MultiplierField, field_from_spec
from multiplier_lab.geometry import PolygonDomain, polygon_from_vertices
from multiplier_lab.lattice import Lattice, mode
from multiplier_lab.utils import read_snapshot
from multiplier_lab.wavesim import FeedbackLaw, make_feedback

__all__ = [
		"AffineFieldSpec",
		"BoxSpec",
		"ConeConfig",
		"ConstantShiftSpec",
		"ConstantsSpec",
		"ControlConfig",
		"DomainSpec",
		"FeedbackSpec",
		"FieldSpec",
		"FileData",
		"FitConfig",
		"InitialDataSpec",
		"ModeData",
		"ObserveConfig",
		"PartitionConfig",
		"PerturbedFieldSpec",
		"RellichConfig",
		"RotatedFieldSpec",
		"SimulateConfig",
		"SineShearSpec",
		"SpeedSpec",
		"ZeroData"
		]

Matrix = list[list[float]]
Vector = list[float]


class _Schema(BaseModel):
	model_config = ConfigDict(extra="forbid", frozen=True)


class _FieldSpecBase(_Schema):

	#: Multiplies the whole field.
	scale: float = 1.0

	def build(self, box: Optional[Box] = None) -> MultiplierField:
		"""
		Construct the field.

		:param box: The domain of the field.
		"""

		return field_from_spec(self.model_dump(exclude_none=True), box)


class AffineFieldSpec(_FieldSpecBase):
	"""
	``m(x) = (A1 + A2)(x − x0)``.
	"""

	family: Literal["affine"] = "affine"
	A1: Matrix
	A2: Optional[Matrix] = None
	x0: Optional[Vector] = None


class RotatedFieldSpec(_FieldSpecBase):
	"""
	The planar field whose Jacobian rotates ``e1`` by ``θ1`` and ``e2`` by ``θ2``.
	"""

	family: Literal["rotated2d"] = "rotated2d"
	theta1: float
	theta2: float
	x0: Optional[Vector] = None


class SineShearSpec(_Schema):
	kind: Literal["sine_shear"] = "sine_shear"
	amplitude: float


class ConstantShiftSpec(_Schema):
	kind: Literal["constant"] = "constant"
	value: Vector


class PerturbedFieldSpec(_FieldSpecBase):
	"""
	``m(x) = (d·I + A)(x − x0) + F(x)``.
	"""

	family: Literal["perturbed"] = "perturbed"
	d: float
	A: Optional[Matrix] = None
	x0: Optional[Vector] = None
	perturbation: Optional[Annotated[Union[SineShearSpec, ConstantShiftSpec], Field(discriminator="kind")]] = None


FieldSpec = Annotated[Union[AffineFieldSpec, RotatedFieldSpec, PerturbedFieldSpec], Field(discriminator="family")]


class BoxSpec(_Schema):
	"""
	An axis-aligned sampling box.
	"""

	lower: Vector
	upper: Vector

	def build(self) -> Box:
		return Box.from_bounds(self.lower, self.upper)


class DomainSpec(_Schema):
	"""
	A polygon given by its vertices in counter-clockwise order.
	"""

	vertices: list[tuple[float, float]] = Field(
			default=[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
			min_length=3,
			)

	def build(self) -> PolygonDomain:
		return polygon_from_vertices(self.vertices)


class FeedbackSpec(_Schema):
	"""
	One of the built-in feedback laws.
	"""

	kind: Literal["zero", "linear", "power"] = "linear"

	#: The coefficient of the linear law.
	alpha: Optional[PositiveFloat] = None

	#: The exponent of the power law.
	p: Optional[float] = Field(default=None, ge=1)

	@model_validator(mode="after")
	def _parameters_match_kind(self) -> "FeedbackSpec":
		if self.alpha is not None and self.kind != "linear":
			raise ValueError(f"'alpha' only applies to linear feedback, not {self.kind!r}")
		if self.p is not None and self.kind != "power":
			raise ValueError(f"'p' only applies to power feedback, not {self.kind!r}")
		return self

	def build(self) -> FeedbackLaw:
		return make_feedback(self.model_dump(exclude_none=True))


class ModeData(_Schema):
	"""
	``amplitude·sin(kx·πx)·sin(ky·πy)``.
	"""

	kind: Literal["mode"] = "mode"
	kx: PositiveInt = 1
	ky: PositiveInt = 1
	amplitude: float = 1.0

	def build(self, lattice: Lattice) -> numpy.ndarray:
		return self.amplitude * mode(lattice, self.kx, self.ky)


class ZeroData(_Schema):
	kind: Literal["zero"] = "zero"

	def build(self, lattice: Lattice) -> numpy.ndarray:
		return numpy.zeros(lattice.size)


class FileData(_Schema):
	"""
	Node values read from a snapshot file.
	"""

	kind: Literal["file"] = "file"
	path: str

	def build(self, lattice: Lattice) -> numpy.ndarray:
		"""
		Read the node values.

		:param lattice:

		:raises GridMismatchError: If the file was written for another lattice.
		"""

		values, h, _ = read_snapshot(self.path)
		if values.size != lattice.size or not math.isclose(h, lattice.h, rel_tol=1e-9):
			raise GridMismatchError(
					f"{self.path} holds {values.size} values at h = {h}; "
					f"the lattice has {lattice.size} nodes at h = {lattice.h}"
					)
		return values


InitialDataSpec = Annotated[Union[ModeData, ZeroData, FileData], Field(discriminator="kind")]


class _TimedConfig(_Schema):
	"""
	A run whose final time is given directly or as a multiple of the control time threshold.
	"""

	T: Optional[PositiveFloat] = None
	T_over_T0: Optional[PositiveFloat] = None

	@model_validator(mode="after")
	def _one_final_time(self) -> "_TimedConfig":
		if (self.T is None) == (self.T_over_T0 is None):
			raise ValueError("Give exactly one of 'T' and 'T_over_T0'")
		return self

	def final_time(self, T0: float) -> float:
		"""
		Resolve the final time.

		:param T0: The control time threshold of the field.
		"""

		if self.T is not None:
			return self.T
		assert self.T_over_T0 is not None
		return self.T_over_T0 * T0


class ConeConfig(_Schema):
	"""
	Configuration for ``cone``.
	"""

	field: FieldSpec
	box: Optional[BoxSpec] = None
	resolution: PositiveFloat = 1 / 16


class PartitionConfig(_Schema):
	"""
	Configuration for ``partition``.
	"""

	field: FieldSpec
	domain: DomainSpec = DomainSpec()
	samples_per_edge: int = Field(default=64, ge=16)


class SimulateConfig(_Schema):
	"""
	Configuration for ``simulate``.
	"""

	field: FieldSpec
	domain: DomainSpec = DomainSpec()
	feedback: FeedbackSpec = FeedbackSpec()
	u0: InitialDataSpec = ModeData()
	u1: InitialDataSpec = ZeroData()
	T: PositiveFloat
	h: PositiveFloat = 1 / 64
	dt: Optional[PositiveFloat] = None
	output_stride: PositiveInt = 1

	#: Write the displacement every this many steps.
	snapshot_stride: Optional[PositiveInt] = None


class ConstantsSpec(_Schema):
	"""
	Estimate the Poincaré and trace constants for the partition of ``field``.
	"""

	field: FieldSpec
	h: PositiveFloat = 1 / 64


class SpeedSpec(_Schema):
	"""
	Tabulate the stabilisation speed.
	"""

	k_minus: PositiveFloat = 1.0
	k_plus: PositiveFloat = 1.0
	lambdas: Optional[list[PositiveFloat]] = None


class FitConfig(_Schema):
	"""
	Configuration for ``fit``.
	"""

	#: A trace CSV written by ``simulate``.
	trace: str

	models: list[FitModel] = [FitModel.exponential]
	window: Optional[tuple[float, float]] = None

	#: The feedback exponent, for the predicted power-law exponent.
	p: Optional[float] = Field(default=None, ge=1)

	komornik: bool = True

	#: Defaults to ``(p − 1)/2``, or zero without ``p``.
	alpha: Optional[float] = Field(default=None, ge=0)

	slack: float = Field(default=0.02, ge=0)
	constants: Optional[ConstantsSpec] = None
	speed: Optional[SpeedSpec] = None

	@model_validator(mode="after")
	def _speed_needs_constants(self) -> "FitConfig":
		if self.speed is not None and self.constants is None:
			raise ValueError("'speed' needs a 'constants' block")
		if self.window is not None and not self.window[0] < self.window[1]:
			raise ValueError(f"The window {self.window} is empty")
		return self


class RellichConfig(_Schema):
	"""
	Configuration for ``rellich``.

	The regular check evaluates random trigonometric functions on the domain over a ladder of spacings;
	the singular check measures the junction defect of each multiplier.
	"""

	check: Literal["regular", "singular"] = "regular"
	multipliers: list[FieldSpec] = Field(min_length=1)
	domain: DomainSpec = DomainSpec()

	#: The number of random functions for the regular check.
	functions: PositiveInt = 3

	#: Decreasing spacings, see :meth:`~.RellichConfig.spacings`.
	h_ladder: Optional[list[PositiveFloat]] = None

	#: Decreasing puncture radii for the singular check.
	rho_ladder: list[PositiveFloat] = [0.1, 0.05, 0.025]

	#: The smallest acceptable convergence order of the regular defect.
	min_order: float = 1.8

	@model_validator(mode="after")
	def _decreasing_ladders(self) -> "RellichConfig":
		for name in ("h_ladder", "rho_ladder"):
			ladder = getattr(self, name)
			if ladder is None:
				continue
			if len(ladder) < 2 or any(b >= a for a, b in zip(ladder, ladder[1:])):
				raise ValueError(f"{name!r} must hold at least two decreasing values")
		return self

	def spacings(self) -> list[float]:
		"""
		The spacings to use.

		Defaults to ``1/64, 1/128, 1/256`` for the regular check and ``0.1, 0.05, 0.025`` for the singular one.
		"""

		if self.h_ladder is not None:
			return list(self.h_ladder)
		if self.check == "regular":
			return [1 / 64, 1 / 128, 1 / 256]
		return [0.1, 0.05, 0.025]


class ObserveConfig(_TimedConfig):
	"""
	Configuration for ``observe``.
	"""

	field: FieldSpec
	domain: DomainSpec = DomainSpec()
	h: PositiveFloat = 1 / 64
	dt: Optional[PositiveFloat] = None
	phi0: InitialDataSpec = ModeData()
	phi1: InitialDataSpec = ZeroData()


class ControlConfig(_TimedConfig):
	"""
	Configuration for ``control``.
	"""

	field: FieldSpec
	domain: DomainSpec = DomainSpec()
	h: PositiveFloat = 1 / 32
	dt: Optional[PositiveFloat] = None
	u0: InitialDataSpec = ModeData()
	u1: InitialDataSpec = ZeroData()
	tol: PositiveFloat = 1e-6
	max_iter: PositiveInt = 200
