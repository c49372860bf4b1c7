#!/usr/bin/env python3
#
#  rellich.py
"""
Numerical checks of the Rellich identity, for smooth functions and for the model crack-tip singularity.
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
from collections.abc import Callable, Sequence
from typing import NamedTuple, Optional

# 3rd party
import numpy

# this package
from multiplier_lab.errors import AdmissibilityError
from multiplier_lab.fields import Box, MultiplierField, sup_norm
from multiplier_lab.geometry import PolygonDomain, fan_quadrature

__all__ = [
		"RellichReport",
		"ShamirReport",
		"ShamirRow",
		"SmoothFunction",
		"inequality_check",
		"rellich_residual",
		"richardson",
		"shamir_defect"
		]

logger = logging.getLogger(__name__)

PointFunction = Callable[[numpy.ndarray], numpy.ndarray]


class SmoothFunction(NamedTuple):
	"""
	A scalar function with its gradient and Laplacian, each vectorised over points of shape ``(..., 2)``.
	"""

	value: PointFunction
	gradient: PointFunction
	laplacian: PointFunction

	@classmethod
	def constant(cls, c: float = 1.0) -> "SmoothFunction":
		return cls(
				lambda x: numpy.full(x.shape[:-1], float(c)),
				lambda x: numpy.zeros_like(x, dtype=float),
				lambda x: numpy.zeros(x.shape[:-1]),
				)

	@classmethod
	def plane(cls, direction: Sequence[float]) -> "SmoothFunction":
		"""
		The linear function ``x ↦ a.x``.

		:param direction: The vector ``a``.
		"""

		a = numpy.asarray(direction, dtype=float)
		return cls(
				lambda x: x @ a,
				lambda x: numpy.broadcast_to(a, x.shape).astype(float),
				lambda x: numpy.zeros(x.shape[:-1]),
				)

	@classmethod
	def sine_product(cls, kx: int = 1, ky: int = 1) -> "SmoothFunction":
		"""
		The function ``sin(kx·πx)·sin(ky·πy)``.

		:param kx:
		:param ky:
		"""

		wx, wy = kx * math.pi, ky * math.pi

		def value(x: numpy.ndarray) -> numpy.ndarray:
			return numpy.sin(wx * x[..., 0]) * numpy.sin(wy * x[..., 1])

		def gradient(x: numpy.ndarray) -> numpy.ndarray:
			return numpy.stack([
					wx * numpy.cos(wx * x[..., 0]) * numpy.sin(wy * x[..., 1]),
					wy * numpy.sin(wx * x[..., 0]) * numpy.cos(wy * x[..., 1]),
					], axis=-1)

		def laplacian(x: numpy.ndarray) -> numpy.ndarray:
			return -(wx**2 + wy**2) * value(x)

		return cls(value, gradient, laplacian)

	@classmethod
	def random_trigonometric(
			cls,
			rng: numpy.random.Generator,
			terms: int = 3,
			max_frequency: int = 2,
			) -> "SmoothFunction":
		"""
		A random sum of plane waves ``Σ a·cos(ω.x + φ)`` with ``ω`` in ``π·ℤ²``.

		:param rng:
		:param terms:
		:param max_frequency: The largest integer multiple of ``π`` in each frequency component.
		"""

		omegas = []
		while len(omegas) < terms:
			omega = rng.integers(-max_frequency, max_frequency + 1, size=2)
			if numpy.any(omega):
				omegas.append(omega * math.pi)

		frequencies = numpy.array(omegas, dtype=float)
		amplitudes = rng.uniform(-1, 1, size=terms)
		phases = rng.uniform(0, 2 * math.pi, size=terms)
		squared = numpy.sum(frequencies**2, axis=-1)

		def value(x: numpy.ndarray) -> numpy.ndarray:
			return numpy.cos(x @ frequencies.T + phases) @ amplitudes

		def gradient(x: numpy.ndarray) -> numpy.ndarray:
			return -(numpy.sin(x @ frequencies.T + phases) * amplitudes) @ frequencies

		def laplacian(x: numpy.ndarray) -> numpy.ndarray:
			return -numpy.cos(x @ frequencies.T + phases) @ (amplitudes * squared)

		return cls(value, gradient, laplacian)

	@classmethod
	def shamir(cls) -> "SmoothFunction":
		"""
		The harmonic function ``r^{1/2}·sin(θ/2)`` on the upper half plane, with ``θ ∈ [0, π]``.

		It vanishes on the positive real axis and has zero normal derivative on the negative one.
		"""

		def polar(x: numpy.ndarray) -> tuple[numpy.ndarray, numpy.ndarray]:
			return numpy.hypot(x[..., 0], x[..., 1]), numpy.arctan2(x[..., 1], x[..., 0])

		def value(x: numpy.ndarray) -> numpy.ndarray:
			r, theta = polar(x)
			return numpy.sqrt(r) * numpy.sin(theta / 2)

		def gradient(x: numpy.ndarray) -> numpy.ndarray:
			r, theta = polar(x)
			factor = 0.5 / numpy.sqrt(r)
			return numpy.stack([-factor * numpy.sin(theta / 2), factor * numpy.cos(theta / 2)], axis=-1)

		return cls(value, gradient, lambda x: numpy.zeros(x.shape[:-1]))


class RellichReport(NamedTuple):
	"""
	The three integrals of the Rellich identity and the amount by which it fails.
	"""

	#: ``2∫Δu m.∇u``.
	lhs: float

	#: ``∫(div m·I − 2(∇m)^s)(∇u, ∇u)``.
	volume_term: float

	#: ``∫ 2∂_ν u m.∇u − m.ν|∇u|² dσ``.
	boundary_term: float

	#: ``lhs − volume_term − boundary_term``.
	defect: float

	h: float

	#: The defect the identity predicts, if known.
	predicted_defect: Optional[float] = None


def _volume_terms(
		u: SmoothFunction,
		field: MultiplierField,
		points: numpy.ndarray,
		weights: numpy.ndarray,
		) -> tuple[float, float]:
	gradient = u.gradient(points)
	m = field.value(points)
	symmetric = field.symmetric_jacobian(points)
	div = numpy.trace(symmetric, axis1=-2, axis2=-1)

	lhs = numpy.sum(weights * 2 * u.laplacian(points) * numpy.einsum("...i,...i->...", m, gradient))
	quadratic = numpy.einsum("...i,...ij,...j->...", gradient, symmetric, gradient)
	volume = numpy.sum(weights * (div * numpy.sum(gradient**2, axis=-1) - 2 * quadratic))
	return float(lhs), float(volume)


def _boundary_term(
		u: SmoothFunction,
		field: MultiplierField,
		points: numpy.ndarray,
		normal: numpy.ndarray,
		weights: numpy.ndarray,
		) -> float:
	gradient = u.gradient(points)
	m = field.value(points)
	normal_derivative = gradient @ normal
	integrand = (
			2 * normal_derivative * numpy.einsum("...i,...i->...", m, gradient)
			- (m @ normal) * numpy.sum(gradient**2, axis=-1)
			)
	return float(numpy.sum(weights * integrand))


def _check_derivatives(
		u: SmoothFunction,
		lower: numpy.ndarray,
		upper: numpy.ndarray,
		rng: numpy.random.Generator,
		points: int = 20,
		tolerance: float = 1e-4,
		) -> None:
	diameter = float(numpy.linalg.norm(upper - lower))
	step = 1e-5 * diameter
	lap_step = 1e-3 * diameter
	margin = 2 * lap_step
	samples = rng.uniform(lower + margin, upper - margin, size=(points, 2))

	gradient = u.gradient(samples)
	laplacian = u.laplacian(samples)
	fd_gradient = numpy.empty_like(gradient)
	fd_laplacian = -4 * u.value(samples)
	for axis in range(2):
		offset = numpy.zeros(2)
		offset[axis] = step
		fd_gradient[:, axis] = (u.value(samples + offset) - u.value(samples - offset)) / (2 * step)
		offset[axis] = lap_step
		fd_laplacian = fd_laplacian + u.value(samples + offset) + u.value(samples - offset)
	fd_laplacian /= lap_step**2

	gradient_error = numpy.max(numpy.abs(fd_gradient - gradient), axis=-1) / max(1.0, float(numpy.abs(gradient).max()))
	laplacian_error = numpy.abs(fd_laplacian - laplacian) / max(1.0, float(numpy.abs(laplacian).max()))

	for name, error in (("gradient", gradient_error), ("Laplacian", laplacian_error)):
		worst = int(numpy.argmax(error))
		if error[worst] > tolerance:
			raise AdmissibilityError(
					f"The supplied {name} disagrees with finite differences (relative error {error[worst]:.3g})",
					witness=samples[worst],
					)


def rellich_residual(
		u: SmoothFunction,
		field: MultiplierField,
		domain: PolygonDomain,
		h: float,
		rng: Optional[numpy.random.Generator] = None,
		) -> RellichReport:
	"""
	Evaluate the three integrals of the regular Rellich identity on a polygon.

	On axis-aligned rectangles the volume integrals use the midpoint rule on square-ish cells of side at most ``h``;
	on other polygons they use the centroid rule on a refined triangle fan (see :func:`~.fan_quadrature`),
	which evaluates ``u`` and ``m`` outside the domain when it is not convex.
	The edge integrals use the trapezoid rule. The defect is ``O(h²)`` for smooth ``u``.

	:param u:
	:param field:
	:param domain:
	:param h: The grid spacing, at most a sixteenth of the diameter of the bounding box.
	:param rng: Source of the finite difference check points. Defaults to a generator seeded with 0.

	:raises AdmissibilityError: If ``h`` is too coarse, or the derivatives of ``u`` disagree with finite differences.
	"""

	lower, upper = domain.bounds()
	diameter = float(numpy.linalg.norm(upper - lower))
	if not 0 < h <= diameter / 16 * (1 + 1e-12):
		raise AdmissibilityError(f"h = {h} must lie in (0, diameter/16 = {diameter / 16}]")

	_check_derivatives(u, lower, upper, numpy.random.default_rng(0) if rng is None else rng)

	if domain.is_rectangle():
		counts = numpy.ceil((upper - lower) / h - 1e-9).astype(int)
		spacing = (upper - lower) / counts
		axes = [lower[k] + (numpy.arange(counts[k]) + 0.5) * spacing[k] for k in range(2)]
		x, y = numpy.meshgrid(*axes, indexing="ij")
		points = numpy.stack([x, y], axis=-1)
		weights = numpy.full(x.shape, spacing[0] * spacing[1])
	else:
		points, weights = fan_quadrature(domain, h)
	lhs, volume = _volume_terms(u, field, points, weights)

	boundary = 0.0
	for edge in domain.edges:
		intervals = max(1, math.ceil(edge.length / h - 1e-9))
		weights = numpy.full(intervals + 1, edge.length / intervals)
		weights[[0, -1]] /= 2
		boundary += _boundary_term(u, field, edge.point_at(numpy.linspace(0, 1, intervals + 1)), edge.normal, weights)

	defect = lhs - volume - boundary
	logger.debug("Rellich residual at h = %g: defect %g", h, defect)
	return RellichReport(lhs, volume, boundary, defect, h, 0.0)


def richardson(values: Sequence[float], spacings: Sequence[float], orders: Sequence[float]) -> list[list[float]]:
	"""
	Build a Richardson extrapolation table from values computed on a geometric ladder of spacings.

	Row ``j`` removes an error term of order ``orders[j-1]`` from row ``j-1``.

	:param values: The values, coarsest first.
	:param spacings: The spacing of each value, decreasing by a constant ratio.
	:param orders:

	:returns: The rows of the table, the first being ``values``.
	"""

	if len(values) != len(spacings):
		raise AdmissibilityError("Each value needs a spacing")

	table = [[float(v) for v in values]]
	if len(spacings) < 2:
		return table

	ratios = numpy.asarray(spacings[:-1], dtype=float) / numpy.asarray(spacings[1:], dtype=float)
	if not numpy.allclose(ratios, ratios[0], rtol=1e-9) or ratios[0] <= 1:
		raise AdmissibilityError(f"Spacings must decrease geometrically: {list(spacings)}")

	ratio = float(ratios[0])
	for order in orders:
		previous = table[-1]
		if len(previous) < 2:
			break
		factor = ratio**order
		table.append([(factor * fine - coarse) / (factor - 1) for coarse, fine in zip(previous[:-1], previous[1:])])

	return table


class ShamirRow(NamedTuple):
	"""
	The integrals on one punctured half-disk at one grid spacing.
	"""

	h: float
	rho: float
	lhs: float
	volume: float
	boundary: float
	defect: float


class ShamirReport(NamedTuple):
	"""
	The result of :func:`shamir_defect`.
	"""

	#: The defect extrapolated to ``h → 0`` and ``ρ → 0``.
	extrapolated: float

	#: ``(π/4)·m(0).τ``.
	predicted: float

	relative_gap: float

	#: Whether the last two extrapolants agree.
	converged: bool

	table: list[ShamirRow]


def _punctured_half_disk(u: SmoothFunction, field: MultiplierField, rho: float, h: float) -> ShamirRow:
	s_min = math.log(rho)
	s_count = max(4, math.ceil(-s_min / h - 1e-9))
	theta_count = max(4, math.ceil(math.pi / h - 1e-9))
	ds, dtheta = -s_min / s_count, math.pi / theta_count

	s = s_min + (numpy.arange(s_count) + 0.5) * ds
	theta = (numpy.arange(theta_count) + 0.5) * dtheta
	grid_s, grid_theta = numpy.meshgrid(s, theta, indexing="ij")
	r = numpy.exp(grid_s)
	points = numpy.stack([r * numpy.cos(grid_theta), r * numpy.sin(grid_theta)], axis=-1)
	lhs, volume = _volume_terms(u, field, points, r**2 * ds * dtheta)

	# the inner arc is left out, so the boundary term covers the two flat pieces and the outer arc
	radii = numpy.exp(numpy.linspace(s_min, 0, s_count + 1))
	radial_weights = numpy.full(s_count + 1, ds) * radii
	radial_weights[[0, -1]] /= 2
	zeros = numpy.zeros_like(radii)
	down = numpy.array([0.0, -1.0])
	boundary = _boundary_term(u, field, numpy.stack([radii, zeros], axis=-1), down, radial_weights)
	boundary += _boundary_term(u, field, numpy.stack([-radii, zeros], axis=-1), down, radial_weights)

	arc = numpy.linspace(0, math.pi, theta_count + 1)
	arc_points = numpy.stack([numpy.cos(arc), numpy.sin(arc)], axis=-1)
	arc_weights = numpy.full(theta_count + 1, dtheta)
	arc_weights[[0, -1]] /= 2
	gradient = u.gradient(arc_points)
	m = field.value(arc_points)
	integrand = (
			2 * numpy.sum(gradient * arc_points, axis=-1) * numpy.sum(m * gradient, axis=-1)
			- numpy.sum(m * arc_points, axis=-1) * numpy.sum(gradient**2, axis=-1)
			)
	boundary += float(numpy.sum(arc_weights * integrand))

	return ShamirRow(h, rho, lhs, volume, boundary, lhs - volume - boundary)


def shamir_defect(
		field: MultiplierField,
		h_ladder: Sequence[float] = (0.1, 0.05, 0.025),
		rho_ladder: Sequence[float] = (0.1, 0.05, 0.025),
		) -> ShamirReport:
	"""
	Measure the singular defect of the Rellich identity at a Dirichlet/Neumann junction.

	The domain is the upper unit half-disk with the junction at the origin, Dirichlet on the positive
	and Neumann on the negative real axis, and ``u = r^{1/2}·sin(θ/2)``. A disk of radius ``ρ`` around the
	origin is cut out and the defect of the regular identity, without the cut's own boundary, is computed in
	log-polar coordinates. Values are extrapolated to ``h → 0`` (order 2) and then to ``ρ → 0`` (orders 1 and 2).

	:param field:
	:param h_ladder: Decreasing grid spacings in the log-polar coordinates.
	:param rho_ladder: Decreasing puncture radii.
	"""

	u = SmoothFunction.shamir()
	table = []
	per_rho = []
	for rho in rho_ladder:
		rows = [_punctured_half_disk(u, field, rho, h) for h in h_ladder]
		table.extend(rows)
		per_rho.append(richardson([row.defect for row in rows], h_ladder, [2])[-1][-1])

	rho_table = richardson(per_rho, rho_ladder, [1, 2])
	extrapolated = rho_table[-1][-1]

	scale = sup_norm(field, Box.from_bounds([-1, 0], [1, 1])).value
	converged = True
	for row in reversed(rho_table):
		if len(row) >= 2:
			a, b = row[-2], row[-1]
			converged = abs(a - b) <= 0.05 * max(abs(a), abs(b)) or abs(a - b) <= 1e-3 * scale
			break

	if not converged:
		warnings.warn("The singular defect extrapolation has not converged", stacklevel=2)

	tangent = numpy.array([1.0, 0.0])
	predicted = math.pi / 4 * float(field.value(numpy.zeros(2)) @ tangent)
	gap = abs(extrapolated - predicted)
	relative_gap = gap / abs(predicted) if predicted else gap / max(scale, 1e-300)

	logger.info("Singular defect %g against predicted %g", extrapolated, predicted)
	return ShamirReport(extrapolated, predicted, relative_gap, converged, table)


def inequality_check(report: ShamirReport, tolerance: float = 1e-3) -> bool:
	"""
	Returns whether the Rellich inequality ``2∫Δu m.∇u ≤ volume + boundary`` holds for the extrapolated defect.

	It holds whenever ``m.τ ≤ 0`` at the junction.

	:param report:
	:param tolerance:
	"""

	return report.extrapolated <= tolerance
