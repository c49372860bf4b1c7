#!/usr/bin/env python3
#
#  fields.py
"""
Multiplier vector fields and the cone condition on their Jacobians.
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
import logging
import math
import warnings
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional, Union

# 3rd party
import numpy
import scipy.linalg

# this package
from multiplier_lab.enums import FieldFamily
from multiplier_lab.errors import AdmissibilityError

__all__ = [
		"Box",
		"ConeReport",
		"MultiplierField",
		"Perturbation",
		"SupNorm",
		"check_jacobian",
		"cone_check",
		"constant_shift",
		"divergence",
		"evaluate",
		"field_from_spec",
		"lambda_min",
		"make_affine",
		"make_custom",
		"make_perturbed",
		"make_rotated",
		"scale",
		"sine_shear",
		"sup_norm"
		]

logger = logging.getLogger(__name__)

ArrayLike = Union[numpy.ndarray, Sequence[float], Sequence[Sequence[float]]]
VectorFunction = Callable[[numpy.ndarray], numpy.ndarray]

#: Entrywise tolerance for the symmetry and skew-symmetry checks.
MATRIX_TOLERANCE = 1e-12

#: Relative step of the central differences used for fields without an analytic Jacobian.
FD_STEP = 1e-6


class Box(NamedTuple):
	"""
	An axis-aligned box, used as the sampling domain for essential extrema.
	"""

	lower: numpy.ndarray
	upper: numpy.ndarray

	@classmethod
	def unit(cls, dim: int = 2) -> "Box":
		"""
		The unit cube ``[0, 1]^dim``.

		:param dim:
		"""

		return cls(numpy.zeros(dim), numpy.ones(dim))

	@classmethod
	def from_bounds(cls, lower: ArrayLike, upper: ArrayLike) -> "Box":
		"""
		Construct a box from its lower and upper corners.

		:param lower:
		:param upper:
		"""

		lower_a = numpy.asarray(lower, dtype=float)
		upper_a = numpy.asarray(upper, dtype=float)
		if lower_a.shape != upper_a.shape or lower_a.ndim != 1:
			raise AdmissibilityError("Box corners must be vectors of the same length")
		if numpy.any(upper_a <= lower_a):
			raise AdmissibilityError("Box must have positive extent along every axis")
		return cls(lower_a, upper_a)

	@property
	def dim(self) -> int:
		"""
		The dimension of the box.
		"""

		return int(self.lower.size)

	@property
	def diameter(self) -> float:
		"""
		The length of the box's diagonal.
		"""

		return float(numpy.linalg.norm(self.upper - self.lower))

	def grid(self, resolution: float, min_samples: int = 8) -> numpy.ndarray:
		"""
		Return the nodes of the uniform grid with spacing ``resolution``, as an array of shape ``(points, dim)``.

		:param resolution: The grid spacing, which must divide every side of the box.
		:param min_samples: The minimum number of samples per axis.
		"""

		if resolution <= 0:
			raise AdmissibilityError(f"Grid resolution must be positive, not {resolution}")

		axes = []
		for lo, hi in zip(self.lower, self.upper):
			cells = (hi - lo) / resolution
			n_cells = round(cells)
			if abs(cells - n_cells) > 1e-9 * max(1.0, cells):
				raise AdmissibilityError(f"Resolution {resolution} does not divide the side [{lo}, {hi}]")
			if n_cells + 1 < min_samples:
				raise AdmissibilityError(
						f"Resolution {resolution} gives {n_cells + 1} samples along [{lo}, {hi}]; "
						f"at least {min_samples} are required"
						)
			axes.append(numpy.linspace(lo, hi, n_cells + 1))

		mesh = numpy.meshgrid(*axes, indexing="ij")
		return numpy.stack(mesh, axis=-1).reshape(-1, self.dim)


class Perturbation(NamedTuple):
	"""
	A perturbation ``F`` added to the multiple of the identity in a perturbed field.
	"""

	#: ``F(x)``, vectorised over leading axes.
	value: VectorFunction

	#: ``∇F(x)``, vectorised over leading axes.
	jacobian: VectorFunction

	#: JSON description of the perturbation, or :py:obj:`None` if it cannot be serialised.
	spec: Optional[dict[str, Any]] = None


def sine_shear(amplitude: float) -> Perturbation:
	"""
	The planar shear ``F(x) = amplitude·(sin x₂, 0)``.

	:param amplitude:
	"""

	def value(x: numpy.ndarray) -> numpy.ndarray:
		out = numpy.zeros_like(x)
		out[..., 0] = amplitude * numpy.sin(x[..., 1])
		return out

	def jacobian(x: numpy.ndarray) -> numpy.ndarray:
		out = numpy.zeros(x.shape + (x.shape[-1], ))
		out[..., 0, 1] = amplitude * numpy.cos(x[..., 1])
		return out

	return Perturbation(value, jacobian, {"kind": "sine_shear", "amplitude": float(amplitude)})


def constant_shift(vector: ArrayLike) -> Perturbation:
	"""
	A constant perturbation, which leaves the Jacobian unchanged.

	:param vector:
	"""

	shift = numpy.asarray(vector, dtype=float)

	def value(x: numpy.ndarray) -> numpy.ndarray:
		return numpy.broadcast_to(shift, x.shape).copy()

	def jacobian(x: numpy.ndarray) -> numpy.ndarray:
		return numpy.zeros(x.shape + (x.shape[-1], ))

	return Perturbation(value, jacobian, {"kind": "constant", "value": shift.tolist()})


@dataclass(frozen=True)
class MultiplierField:
	"""
	A vector field ``m`` on ``ℝⁿ`` together with its Jacobian.

	Every evaluator is vectorised: points are arrays whose last axis has length :attr:`dim`.
	"""

	#: The dimension ``n``.
	dim: int

	#: Which family of fields this one belongs to.
	family: FieldFamily

	#: The family-specific parameters, as JSON-compatible values.
	params: dict[str, Any]

	value_function: VectorFunction = field(repr=False)
	jacobian_function: VectorFunction = field(repr=False)

	#: Returns ``(∇m)^s`` directly, for families where the skew part is known separately.
	symmetric_jacobian_function: Optional[VectorFunction] = field(default=None, repr=False)

	#: The declared domain of the field.
	box: Optional[Box] = None

	#: Whether the Jacobian comes from finite differences.
	approximate_jacobian: bool = False

	#: Whether the Jacobian is the same at every point.
	constant_jacobian: bool = False

	#: Positive factor applied by :func:`scale`.
	factor: float = 1.0

	def value(self, x: ArrayLike) -> numpy.ndarray:
		"""
		Evaluate ``m(x)``.

		:param x:
		"""

		return self.factor * self.value_function(numpy.asarray(x, dtype=float))

	def jacobian(self, x: ArrayLike) -> numpy.ndarray:
		"""
		Evaluate ``∇m(x)``.

		:param x:
		"""

		return self.factor * self.jacobian_function(numpy.asarray(x, dtype=float))

	def symmetric_jacobian(self, x: ArrayLike) -> numpy.ndarray:
		"""
		Evaluate the symmetric part ``(∇m(x))^s``.

		:param x:
		"""

		x = numpy.asarray(x, dtype=float)
		if self.symmetric_jacobian_function is not None:
			return self.factor * self.symmetric_jacobian_function(x)

		grad = self.jacobian_function(x)
		return self.factor * (grad + numpy.swapaxes(grad, -1, -2)) / 2

	def to_spec(self) -> dict[str, Any]:
		"""
		Return the JSON description of the field, which :func:`field_from_spec` turns back into a field.
		"""

		if self.family is FieldFamily.custom:
			raise TypeError("Custom fields cannot be serialised")
		if self.family is FieldFamily.perturbed and self.params.get("perturbation") is None:
			raise TypeError("Fields with an arbitrary perturbation cannot be serialised")

		spec: dict[str, Any] = {"family": self.family.value, **self.params}
		if self.factor != 1.0:
			spec["scale"] = self.factor
		return spec


class ConeReport(NamedTuple):
	"""
	The sampled extrema behind the cone condition on ``m``.
	"""

	#: Smallest sampled value of ``div m``.
	essinf_div: float

	#: Largest sampled value of ``div m − 2λ_m``.
	esssup_div_minus_2lambda: float

	#: Half the difference of the two extrema.
	c_m: float

	#: Half the sum of the two extrema.
	a0: float

	#: :py:obj:`True` if and only if :attr:`c_m` is positive.
	satisfied: bool

	#: Sample points where the infimum and the supremum were attained.
	witness_points: tuple[numpy.ndarray, numpy.ndarray]

	#: The sampling grid spacing.
	resolution: float


class SupNorm(NamedTuple):
	"""
	The sampled supremum of ``|m|``.
	"""

	value: float
	witness: numpy.ndarray


def _as_vector(x: Optional[ArrayLike], dim: int, name: str) -> numpy.ndarray:
	if x is None:
		return numpy.zeros(dim)

	vector = numpy.asarray(x, dtype=float)
	if vector.shape != (dim, ):
		raise AdmissibilityError(f"{name} must be a vector of length {dim}, got shape {vector.shape}")
	return vector


def _as_square(matrix: ArrayLike, name: str, dim: Optional[int] = None) -> numpy.ndarray:
	array = numpy.asarray(matrix, dtype=float)
	if array.ndim != 2 or array.shape[0] != array.shape[1]:
		raise AdmissibilityError(f"{name} must be a square matrix, got shape {array.shape}")
	if dim is not None and array.shape[0] != dim:
		raise AdmissibilityError(f"{name} must be {dim}×{dim}, got shape {array.shape}")
	if array.shape[0] < 2:
		raise AdmissibilityError(f"{name} must be at least 2×2")
	return array


def _constant_matrix(matrix: numpy.ndarray) -> VectorFunction:

	def function(x: numpy.ndarray) -> numpy.ndarray:
		return numpy.broadcast_to(matrix, x.shape[:-1] + matrix.shape).copy()

	return function


def make_affine(
		A1: ArrayLike,
		A2: Optional[ArrayLike] = None,
		x0: Optional[ArrayLike] = None,
		box: Optional[Box] = None,
		) -> MultiplierField:
	"""
	Construct the affine field ``m(x) = (A1 + A2)(x − x0)``.

	:param A1: A symmetric positive-definite matrix.
	:param A2: A skew-symmetric matrix. Defaults to zero.
	:param x0: The centre of the field. Defaults to the origin.
	:param box: The domain of the field.

	:raises AdmissibilityError: If ``A1`` is not symmetric positive-definite or ``A2`` is not skew-symmetric.
	"""

	sym = _as_square(A1, "A1")
	dim = sym.shape[0]
	skew = numpy.zeros((dim, dim)) if A2 is None else _as_square(A2, "A2", dim)
	centre = _as_vector(x0, dim, "x0")

	if numpy.max(numpy.abs(sym - sym.T)) > MATRIX_TOLERANCE:
		raise AdmissibilityError("A1 is not symmetric")
	if numpy.max(numpy.abs(skew + skew.T)) > MATRIX_TOLERANCE:
		raise AdmissibilityError("A2 is not skew-symmetric")

	try:
		factor = scipy.linalg.cholesky(sym, lower=True)
	except numpy.linalg.LinAlgError:
		raise AdmissibilityError("A1 is not positive-definite") from None

	pivots = numpy.diag(factor)**2
	if numpy.min(pivots) <= MATRIX_TOLERANCE * max(1.0, float(numpy.max(numpy.abs(sym)))):
		raise AdmissibilityError(f"A1 is not positive-definite (smallest pivot {numpy.min(pivots):.3g})")

	sym = (sym + sym.T) / 2
	gradient = sym + skew

	def value(x: numpy.ndarray) -> numpy.ndarray:
		return (x - centre) @ gradient.T

	return MultiplierField(
			dim=dim,
			family=FieldFamily.affine,
			params={"A1": sym.tolist(), "A2": skew.tolist(), "x0": centre.tolist()},
			value_function=value,
			jacobian_function=_constant_matrix(gradient),
			symmetric_jacobian_function=_constant_matrix(sym),
			box=box,
			constant_jacobian=True,
			)


def make_rotated(
		theta1: float,
		theta2: float,
		x0: Optional[ArrayLike] = None,
		box: Optional[Box] = None,
		) -> MultiplierField:
	"""
	Construct the planar field whose Jacobian has rows ``(cot θ1, −1)`` and ``(1, cot θ2)``.

	:param theta1:
	:param theta2:
	:param x0: The point where the field vanishes. Defaults to the origin.
	:param box: The domain of the field.

	:raises AdmissibilityError: If either angle lies outside ``(0, π/2)``.
	"""

	for name, angle in (("theta1", theta1), ("theta2", theta2)):
		if not 0 < angle < math.pi / 2:
			raise AdmissibilityError(f"{name} must lie in the open interval (0, π/2), not {angle}")

	cot1, cot2 = 1 / math.tan(theta1), 1 / math.tan(theta2)
	gradient = numpy.array([[cot1, -1.0], [1.0, cot2]])
	sym = numpy.diag([cot1, cot2])
	centre = _as_vector(x0, 2, "x0")

	def value(x: numpy.ndarray) -> numpy.ndarray:
		return (x - centre) @ gradient.T

	return MultiplierField(
			dim=2,
			family=FieldFamily.rotated2d,
			params={"theta1": float(theta1), "theta2": float(theta2), "x0": centre.tolist()},
			value_function=value,
			jacobian_function=_constant_matrix(gradient),
			symmetric_jacobian_function=_constant_matrix(sym),
			box=box,
			constant_jacobian=True,
			)


def make_perturbed(
		d: float,
		A: Optional[ArrayLike] = None,
		x0: Optional[ArrayLike] = None,
		F: Optional[Perturbation] = None,
		box: Optional[Box] = None,
		resolution: float = 1 / 200,
		dim: int = 2,
		) -> MultiplierField:
	"""
	Construct the field ``m(x) = (dI + A)(x − x0) + F(x)``.

	The size of ``(∇F)^s`` is checked on a grid over ``box`` (the unit cube if not given).

	:param d: A positive multiple of the identity.
	:param A: A skew-symmetric matrix. Defaults to zero.
	:param x0:
	:param F: The perturbation. Defaults to zero.
	:param box: The domain of the field.
	:param resolution: Grid spacing for the perturbation check.
	:param dim: The dimension, when neither ``A`` nor ``x0`` fix it.

	:raises AdmissibilityError: If ``d ≤ 0``, ``A`` is not skew, or ``sup |(∇F)^s|₂ ≥ d/n`` on the grid.
	"""

	if not d > 0:
		raise AdmissibilityError(f"d must be positive, not {d}")

	if A is not None:
		dim = numpy.asarray(A).shape[0]
	elif x0 is not None:
		dim = len(x0)  # type: ignore[arg-type]

	skew = numpy.zeros((dim, dim)) if A is None else _as_square(A, 'A', dim)
	if numpy.max(numpy.abs(skew + skew.T)) > MATRIX_TOLERANCE:
		raise AdmissibilityError("A is not skew-symmetric")

	centre = _as_vector(x0, dim, "x0")
	perturbation = constant_shift(numpy.zeros(dim)) if F is None else F
	linear = d * numpy.eye(dim) + skew

	sample_box = box or Box.unit(dim)
	points = sample_box.grid(resolution)
	perturbation_grad = perturbation.jacobian(points)
	norms = numpy.linalg.norm(
			(perturbation_grad + numpy.swapaxes(perturbation_grad, -1, -2)) / 2,
			ord=2,
			axis=(-2, -1),
			)
	worst = int(numpy.argmax(norms))
	logger.debug("Perturbation check: sup |(∇F)^s| = %g against d/n = %g", norms[worst], d / dim)
	if norms[worst] >= d / dim:
		raise AdmissibilityError(
				f"sup |(∇F)^s|₂ = {norms[worst]:.6g} is not below d/n = {d / dim:.6g}",
				witness=points[worst],
				)

	def value(x: numpy.ndarray) -> numpy.ndarray:
		return (x - centre) @ linear.T + perturbation.value(x)

	def jacobian(x: numpy.ndarray) -> numpy.ndarray:
		return linear + perturbation.jacobian(x)

	def symmetric_jacobian(x: numpy.ndarray) -> numpy.ndarray:
		grad = perturbation.jacobian(x)
		return d * numpy.eye(dim) + (grad + numpy.swapaxes(grad, -1, -2)) / 2

	return MultiplierField(
			dim=dim,
			family=FieldFamily.perturbed,
			params={'d': float(d), 'A': skew.tolist(), "x0": centre.tolist(), "perturbation": perturbation.spec},
			value_function=value,
			jacobian_function=jacobian,
			symmetric_jacobian_function=symmetric_jacobian,
			box=box,
			constant_jacobian=perturbation.spec is not None and perturbation.spec["kind"] == "constant",
			)


def make_custom(
		value_function: VectorFunction,
		jacobian_function: Optional[VectorFunction] = None,
		dim: int = 2,
		box: Optional[Box] = None,
		) -> MultiplierField:
	"""
	Wrap an arbitrary vectorised field.

	Without ``jacobian_function`` the Jacobian is computed by central differences with
	a step of ``1e-6`` times the diameter of ``box``, and the field is flagged as approximate.

	:param value_function:
	:param jacobian_function:
	:param dim:
	:param box: The domain of the field. Defaults to the unit cube.
	"""

	box = box or Box.unit(dim)
	approximate = jacobian_function is None

	if jacobian_function is None:
		warnings.warn("No Jacobian supplied; using central finite differences", stacklevel=2)
		step = FD_STEP * box.diameter

		def jacobian_function(x: numpy.ndarray) -> numpy.ndarray:
			columns = []
			for axis in range(dim):
				offset = numpy.zeros(dim)
				offset[axis] = step
				columns.append((value_function(x + offset) - value_function(x - offset)) / (2 * step))
			return numpy.stack(columns, axis=-1)

	return MultiplierField(
			dim=dim,
			family=FieldFamily.custom,
			params={},
			value_function=value_function,
			jacobian_function=jacobian_function,
			box=box,
			approximate_jacobian=approximate,
			)


def scale(field: MultiplierField, factor: float) -> MultiplierField:
	"""
	Return ``factor·m``.

	:param field:
	:param factor: A positive number.

	:raises AdmissibilityError: If ``factor ≤ 0``.
	"""

	if not factor > 0:
		raise AdmissibilityError(f"Scale factor must be positive, not {factor}")

	return MultiplierField(
			dim=field.dim,
			family=field.family,
			params=field.params,
			value_function=field.value_function,
			jacobian_function=field.jacobian_function,
			symmetric_jacobian_function=field.symmetric_jacobian_function,
			box=field.box,
			approximate_jacobian=field.approximate_jacobian,
			constant_jacobian=field.constant_jacobian,
			factor=field.factor * factor,
			)


def evaluate(field: MultiplierField, x: ArrayLike) -> tuple[numpy.ndarray, numpy.ndarray]:
	"""
	Return ``m(x)`` and ``∇m(x)``.

	:param field:
	:param x:
	"""

	return field.value(x), field.jacobian(x)


def divergence(field: MultiplierField, x: ArrayLike) -> numpy.ndarray:
	"""
	Return ``div m(x)``.

	:param field:
	:param x:
	"""

	return numpy.trace(field.symmetric_jacobian(x), axis1=-2, axis2=-1)


def lambda_min(field: MultiplierField, x: ArrayLike) -> numpy.ndarray:
	"""
	Return the smallest eigenvalue of ``(∇m(x))^s``.

	The skew part of the Jacobian does not enter.

	:param field:
	:param x:
	"""

	sym = field.symmetric_jacobian(x)

	if field.dim == 2:
		a, b, c = sym[..., 0, 0], sym[..., 0, 1], sym[..., 1, 1]
		return (a + c) / 2 - numpy.hypot((a - c) / 2, b)

	return numpy.linalg.eigvalsh(sym)[..., 0]


def cone_check(field: MultiplierField, box: Optional[Box] = None, resolution: float = 1 / 16) -> ConeReport:
	"""
	Sample ``div m`` and ``div m − 2λ_m`` over a grid and derive ``c(m)`` and ``a0``.

	:param field:
	:param box: The sampling domain. Defaults to the field's own box, then the unit cube.
	:param resolution: The grid spacing, which must divide the box with at least 8 samples per axis.
	"""

	box = box or field.box or Box.unit(field.dim)
	points = box.grid(resolution)

	div = divergence(field, points)
	gap = div - 2 * lambda_min(field, points)

	inf_at = int(numpy.argmin(div))
	sup_at = int(numpy.argmax(gap))
	essinf, esssup = float(div[inf_at]), float(gap[sup_at])
	c_m = (essinf - esssup) / 2

	logger.debug("Cone check over %d points: inf div = %g, sup(div - 2λ) = %g", len(points), essinf, esssup)

	return ConeReport(
			essinf_div=essinf,
			esssup_div_minus_2lambda=esssup,
			c_m=c_m,
			a0=(essinf + esssup) / 2,
			satisfied=c_m > 0,
			witness_points=(points[inf_at], points[sup_at]),
			resolution=resolution,
			)


def sup_norm(field: MultiplierField, box: Optional[Box] = None, resolution: float = 1 / 16) -> SupNorm:
	"""
	Return the largest Euclidean length of ``m`` over a grid on ``box``.

	The grid always includes the corners of the box, where affine fields attain their maximum.

	:param field:
	:param box: Defaults to the field's own box, then the unit cube.
	:param resolution:
	"""

	box = box or field.box or Box.unit(field.dim)
	points = box.grid(resolution)
	lengths = numpy.linalg.norm(field.value(points), axis=-1)
	idx = int(numpy.argmax(lengths))
	return SupNorm(float(lengths[idx]), points[idx])


def check_jacobian(
		field: MultiplierField,
		points: int = 100,
		rng: Optional[numpy.random.Generator] = None,
		box: Optional[Box] = None,
		) -> float:
	"""
	Compare the field's Jacobian with central differences of ``m`` at random points.

	:param field:
	:param points: The number of random points.
	:param rng: Source of the random points.
	:param box: Where to draw the points. Defaults to the field's own box, then the unit cube.

	:returns: The largest entrywise difference, relative to the largest Jacobian entry.
	"""

	rng = rng or numpy.random.default_rng(0)
	box = box or field.box or Box.unit(field.dim)
	x = box.lower + rng.random((points, field.dim)) * (box.upper - box.lower)
	step = 1e-5 * box.diameter

	columns = []
	for axis in range(field.dim):
		offset = numpy.zeros(field.dim)
		offset[axis] = step
		columns.append((field.value(x + offset) - field.value(x - offset)) / (2 * step))

	numeric = numpy.stack(columns, axis=-1)
	analytic = field.jacobian(x)
	return float(numpy.max(numpy.abs(numeric - analytic)) / max(float(numpy.max(numpy.abs(analytic))), 1e-300))


_perturbation_factories: dict[str, Callable[..., Perturbation]] = {
		"sine_shear": lambda spec: sine_shear(spec["amplitude"]),
		"constant": lambda spec: constant_shift(spec["value"]),
		}


def field_from_spec(spec: Mapping[str, Any], box: Optional[Box] = None) -> MultiplierField:
	"""
	Construct a field from its JSON description.

	:param spec: A mapping with a ``family`` key and the family's parameters.
	:param box: The domain of the field.
	"""

	family = FieldFamily.from_name(spec["family"])
	new_field: MultiplierField

	if family is FieldFamily.affine:
		new_field = make_affine(spec["A1"], spec.get("A2"), spec.get("x0"), box=box)
	elif family is FieldFamily.rotated2d:
		new_field = make_rotated(spec["theta1"], spec["theta2"], spec.get("x0"), box=box)
	elif family is FieldFamily.perturbed:
		perturbation_spec = spec.get("perturbation")
		perturbation = None
		if perturbation_spec is not None:
			perturbation = _perturbation_factories[perturbation_spec["kind"]](perturbation_spec)
		new_field = make_perturbed(spec['d'], spec.get('A'), spec.get("x0"), perturbation, box=box)
	else:
		raise AdmissibilityError(f"Fields of family {family.value!r} cannot be built from JSON")

	factor = spec.get("scale", 1.0)
	if factor != 1.0:
		new_field = scale(new_field, factor)

	return new_field
