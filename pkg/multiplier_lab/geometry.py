#!/usr/bin/env python3
#
#  geometry.py
"""
Polygonal domains, the boundary partition induced by a multiplier, and the geometric conditions on it.
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
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

# 3rd party
import numpy

# this package
from multiplier_lab.enums import BeltTag, BoundaryLabel, CaseTag, InterfaceKind
from multiplier_lab.errors import AdmissibilityError
from multiplier_lab.fields import MultiplierField, divergence

__all__ = [
		"BoundaryPartition",
		"BoundaryQuadrature",
		"DivergenceCheck",
		"Edge",
		"InterfacePoint",
		"PolygonDomain",
		"RCheck",
		"S2Check",
		"S2Point",
		"Segment",
		"belt_classify",
		"boundary_quadrature",
		"case_classify",
		"check_R",
		"check_S2",
		"divergence_check",
		"fan_quadrature",
		"interface_rows",
		"partition",
		"polygon_from_vertices",
		"segment_rows",
		"unit_square"
		]

logger = logging.getLogger(__name__)

#: Maximum number of bisection steps when locating an interface.
BISECTION_STEPS = 60

#: Interfaces are located to ``|m.ν| < BISECTION_TOLERANCE·‖m‖∞``.
BISECTION_TOLERANCE = 1e-12

#: Samples with ``|m.ν| ≤ PARTITION_TOLERANCE·‖m‖∞`` count as zero.
PARTITION_TOLERANCE = 1e-9

#: Tolerance on corner angles when deciding whether a point is flat.
ANGLE_TOLERANCE = 1e-9


def _cross(u: numpy.ndarray, v: numpy.ndarray) -> float:
	return float(u[0] * v[1] - u[1] * v[0])


class Edge(NamedTuple):
	"""
	A straight edge of a counter-clockwise polygon.
	"""

	#: The start point.
	a: numpy.ndarray

	#: The end point.
	b: numpy.ndarray

	#: The unit outward normal.
	normal: numpy.ndarray

	length: float

	#: The position of the edge in the polygon.
	index: int

	@property
	def tangent(self) -> numpy.ndarray:
		"""
		The unit vector from :attr:`a` to :attr:`b`.
		"""

		return (self.b - self.a) / self.length

	def point_at(self, t: numpy.ndarray) -> numpy.ndarray:
		"""
		Return the point(s) at parameter ``t ∈ [0, 1]`` along the edge.

		:param t:
		"""

		t = numpy.asarray(t, dtype=float)
		return self.a + t[..., None] * (self.b - self.a)


@dataclass(frozen=True)
class PolygonDomain:
	"""
	A simple polygon with counter-clockwise vertices.

	Construct instances with :func:`polygon_from_vertices`, which validates the vertices.
	"""

	#: Array of shape ``(k, 2)``.
	vertices: numpy.ndarray = field(repr=False)

	@cached_property
	def edges(self) -> list[Edge]:
		"""
		The edges of the polygon, with edge ``i`` running from vertex ``i`` to vertex ``i + 1``.
		"""

		edges = []
		for idx, a in enumerate(self.vertices):
			b = self.vertices[(idx + 1) % len(self.vertices)]
			length = float(numpy.linalg.norm(b - a))
			tangent = (b - a) / length
			edges.append(Edge(a, b, numpy.array([tangent[1], -tangent[0]]), length, idx))
		return edges

	@property
	def signed_area(self) -> float:
		"""
		The shoelace area, positive for counter-clockwise vertices.
		"""

		x, y = self.vertices[:, 0], self.vertices[:, 1]
		return float(numpy.sum(x * numpy.roll(y, -1) - numpy.roll(x, -1) * y) / 2)

	@property
	def perimeter(self) -> float:
		return sum(edge.length for edge in self.edges)

	@property
	def centroid(self) -> numpy.ndarray:
		"""
		The area centroid.
		"""

		x, y = self.vertices[:, 0], self.vertices[:, 1]
		cross = x * numpy.roll(y, -1) - numpy.roll(x, -1) * y
		factor = 1 / (6 * self.signed_area)
		return numpy.array([
				factor * numpy.sum((x + numpy.roll(x, -1)) * cross),
				factor * numpy.sum((y + numpy.roll(y, -1)) * cross),
				])

	@cached_property
	def corner_angles(self) -> numpy.ndarray:
		"""
		The interior angle at each vertex, in ``(0, 2π)``.
		"""

		angles = numpy.empty(len(self.vertices))
		for idx, edge in enumerate(self.edges):
			incoming = self.edges[idx - 1].tangent
			turn = math.atan2(_cross(incoming, edge.tangent), float(numpy.dot(incoming, edge.tangent)))
			angles[idx] = math.pi - turn
		return angles

	def is_rectangle(self) -> bool:
		"""
		Returns whether the polygon is an axis-aligned rectangle.
		"""

		if len(self.vertices) != 4:
			return False

		return all(
				abs(edge.tangent[0]) < 1e-12 or abs(edge.tangent[1]) < 1e-12 for edge in self.edges
				) and numpy.allclose(self.corner_angles, math.pi / 2)

	def bounds(self) -> tuple[numpy.ndarray, numpy.ndarray]:
		"""
		The lower and upper corners of the bounding box.
		"""

		return self.vertices.min(axis=0), self.vertices.max(axis=0)


def _segments_cross(p1: numpy.ndarray, p2: numpy.ndarray, q1: numpy.ndarray, q2: numpy.ndarray) -> bool:
	d1 = _cross(q2 - q1, p1 - q1)
	d2 = _cross(q2 - q1, p2 - q1)
	d3 = _cross(p2 - p1, q1 - p1)
	d4 = _cross(p2 - p1, q2 - p1)

	if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
		return True

	def on_segment(a: numpy.ndarray, b: numpy.ndarray, c: numpy.ndarray, orientation: float) -> bool:
		return orientation == 0 and bool(numpy.all(numpy.minimum(a, b) <= c) and numpy.all(c <= numpy.maximum(a, b)))

	return (
			on_segment(q1, q2, p1, d1) or on_segment(q1, q2, p2, d2) or on_segment(p1, p2, q1, d3)
			or on_segment(p1, p2, q2, d4)
			)


def polygon_from_vertices(vertices: Sequence[Sequence[float]]) -> PolygonDomain:
	"""
	Construct a :class:`~.PolygonDomain`, checking that it is simple and counter-clockwise.

	:param vertices: At least three points, in counter-clockwise order.

	:raises AdmissibilityError: If the vertices are clockwise, repeated, or the polygon self-intersects.
	"""

	points = numpy.asarray(vertices, dtype=float)
	if points.ndim != 2 or points.shape[1] != 2 or len(points) < 3:
		raise AdmissibilityError("A polygon needs at least three 2-D vertices")

	count = len(points)
	for idx in range(count):
		if numpy.allclose(points[idx], points[(idx + 1) % count], rtol=0, atol=1e-14):
			raise AdmissibilityError(f"Edge {idx} is degenerate", witness=points[idx])

	for i in range(count):
		for j in range(i + 1, count):
			if j == i + 1 or (i == 0 and j == count - 1):
				continue
			if _segments_cross(points[i], points[(i + 1) % count], points[j], points[(j + 1) % count]):
				raise AdmissibilityError(f"Edges {i} and {j} intersect; the polygon is not simple")

	domain = PolygonDomain(points)
	if domain.signed_area <= 0:
		raise AdmissibilityError("Vertices must be listed counter-clockwise")

	return domain


def unit_square() -> PolygonDomain:
	"""
	The unit square ``[0, 1]²``, with vertices starting at the origin.
	"""

	return polygon_from_vertices([[0, 0], [1, 0], [1, 1], [0, 1]])


class Segment(NamedTuple):
	"""
	A parameter interval of one edge carrying a single boundary label.
	"""

	edge_index: int
	t_start: float
	t_end: float
	label: BoundaryLabel


class InterfacePoint(NamedTuple):
	"""
	A point where the boundary switches between the two labels.
	"""

	point: numpy.ndarray
	kind: InterfaceKind

	#: Unit tangent pointing away from the Neumann part along the boundary.
	tangent: numpy.ndarray

	#: The boundary angle at the point (``π`` inside an edge).
	angle: float

	m_dot_tau: float
	m_dot_nu: float

	#: The edge the point lies on; for corners, the edge which starts there.
	edge_index: int

	#: Parameter along :attr:`edge_index`.
	t: float


@dataclass
class BoundaryPartition:
	"""
	The split of a polygon's boundary into Neumann and Dirichlet parts by the sign of ``m.ν``.
	"""

	domain: PolygonDomain = field(repr=False)
	segments: list[Segment]
	interface_points: list[InterfacePoint]

	#: Total length of the Dirichlet part.
	dirichlet_length: float

	#: Total length of the Neumann part.
	neumann_length: float

	#: Samples with ``|m.ν|`` at most this value count as zero.
	tolerance: float

	#: Edges where ``m.ν`` changes sign more than once.
	oscillating_edges: list[int] = field(default_factory=list)

	#: Edges where ``m.ν`` vanishes at every sample.
	degenerate_edges: list[int] = field(default_factory=list)

	def segments_on(self, edge_index: int) -> list[Segment]:
		"""
		Return the segments lying on the given edge.

		:param edge_index:
		"""

		return [segment for segment in self.segments if segment.edge_index == edge_index]

	def label_at(self, edge_index: int, t: float) -> BoundaryLabel:
		"""
		Return the label at parameter ``t`` of an edge.

		Points shared by a Neumann and a Dirichlet segment are labelled Dirichlet.

		:param edge_index:
		:param t:
		"""

		labels = {
				segment.label
				for segment in self.segments_on(edge_index)
				if segment.t_start - 1e-12 <= t <= segment.t_end + 1e-12
				}
		if labels == {BoundaryLabel.N}:
			return BoundaryLabel.N
		return BoundaryLabel.D


def _bisect(function: Callable[[float], float], lo: float, hi: float, tolerance: float) -> float:
	f_lo = function(lo)
	mid = (lo + hi) / 2
	for _ in range(BISECTION_STEPS):
		mid = (lo + hi) / 2
		f_mid = function(mid)
		if abs(f_mid) < tolerance:
			break
		if (f_mid > 0) == (f_lo > 0):
			lo, f_lo = mid, f_mid
		else:
			hi = mid
	return mid


def partition(field: MultiplierField, domain: PolygonDomain, samples_per_edge: int = 64) -> BoundaryPartition:
	"""
	Label the boundary of ``domain`` by the sign of ``m.ν``.

	Sign changes between samples are refined by bisection. Samples where ``m.ν`` vanishes
	(to tolerance) take the label of their neighbours, and edges where it vanishes everywhere
	are labelled Dirichlet.

	:param field:
	:param domain:
	:param samples_per_edge: Number of sampling intervals per edge, at least 16.
	"""

	if samples_per_edge < 16:
		raise AdmissibilityError(f"samples_per_edge must be at least 16, not {samples_per_edge}")

	ts = numpy.linspace(0, 1, samples_per_edge + 1)
	edge_values = []
	norm_inf = 0.0
	for edge in domain.edges:
		m_values = field.value(edge.point_at(ts))
		norm_inf = max(norm_inf, float(numpy.max(numpy.linalg.norm(m_values, axis=-1))))
		edge_values.append(m_values @ edge.normal)

	check_tolerance = PARTITION_TOLERANCE * norm_inf
	bisection_tolerance = BISECTION_TOLERANCE * norm_inf

	segments: list[Segment] = []
	interfaces: list[InterfacePoint] = []
	oscillating: list[int] = []
	degenerate: list[int] = []
	end_labels: list[tuple[BoundaryLabel, BoundaryLabel]] = []

	for edge, values in zip(domain.edges, edge_values):
		signs = numpy.where(values > check_tolerance, 1, numpy.where(values < -check_tolerance, -1, 0))
		nonzero = numpy.flatnonzero(signs)

		if nonzero.size == 0:
			degenerate.append(edge.index)
			segments.append(Segment(edge.index, 0.0, 1.0, BoundaryLabel.D))
			end_labels.append((BoundaryLabel.D, BoundaryLabel.D))
			continue

		def m_dot_nu(t: float, edge: Edge = edge) -> float:
			return float(field.value(edge.point_at(numpy.array(t))) @ edge.normal)

		roots = []
		for i, j in zip(nonzero[:-1], nonzero[1:]):
			if signs[i] != signs[j]:
				roots.append(_bisect(m_dot_nu, float(ts[i]), float(ts[j]), bisection_tolerance))

		if len(roots) > 1 and not field.constant_jacobian:
			warnings.warn(f"m.ν changes sign {len(roots)} times along edge {edge.index}", stacklevel=2)
			oscillating.append(edge.index)

		label = BoundaryLabel.N if signs[nonzero[0]] > 0 else BoundaryLabel.D
		first_label = label
		breaks = [0.0, *roots, 1.0]
		for start, end in zip(breaks[:-1], breaks[1:]):
			segments.append(Segment(edge.index, start, end, label))
			if end < 1.0:
				point = edge.point_at(numpy.array(end))
				tangent = edge.tangent if label is BoundaryLabel.N else -edge.tangent
				m = field.value(point)
				interfaces.append(
						InterfacePoint(
								point=point,
								kind=InterfaceKind.edge_interior,
								tangent=tangent,
								angle=math.pi,
								m_dot_tau=float(m @ tangent),
								m_dot_nu=float(m @ edge.normal),
								edge_index=edge.index,
								t=end,
								)
						)
				label = BoundaryLabel.D if label is BoundaryLabel.N else BoundaryLabel.N

		end_labels.append((first_label, label))

	for edge in domain.edges:
		previous = domain.edges[edge.index - 1]
		before, after = end_labels[previous.index][1], end_labels[edge.index][0]
		if before is after:
			continue

		tangent = edge.tangent if before is BoundaryLabel.N else -previous.tangent
		bisector = previous.normal + edge.normal
		norm = numpy.linalg.norm(bisector)
		m = field.value(edge.a)
		interfaces.append(
				InterfacePoint(
						point=edge.a.copy(),
						kind=InterfaceKind.corner,
						tangent=tangent,
						angle=float(domain.corner_angles[edge.index]),
						m_dot_tau=float(m @ tangent),
						m_dot_nu=float(m @ bisector / norm) if norm > 0 else 0.0,
						edge_index=edge.index,
						t=0.0,
						)
				)

	lengths = {BoundaryLabel.N: 0.0, BoundaryLabel.D: 0.0}
	for segment in segments:
		lengths[segment.label] += (segment.t_end - segment.t_start) * domain.edges[segment.edge_index].length

	logger.debug(
			"Partition: |∂Ω_N| = %g, |∂Ω_D| = %g, %d interface points",
			lengths[BoundaryLabel.N],
			lengths[BoundaryLabel.D],
			len(interfaces),
			)

	return BoundaryPartition(
			domain=domain,
			segments=segments,
			interface_points=interfaces,
			dirichlet_length=lengths[BoundaryLabel.D],
			neumann_length=lengths[BoundaryLabel.N],
			tolerance=check_tolerance,
			oscillating_edges=oscillating,
			degenerate_edges=degenerate,
			)


class RCheck(NamedTuple):
	"""
	Discrete proxies for the regularity condition on the partition.
	"""

	#: The Dirichlet part has positive length.
	dirichlet_measure_positive: bool

	#: The interface is a finite set of points.
	interface_finite: bool

	#: ``m.ν`` vanishes (to tolerance) at every interface point inside an edge.
	interfaces_on_zero_set: bool

	@property
	def satisfied(self) -> bool:
		return self.dirichlet_measure_positive and self.interface_finite and self.interfaces_on_zero_set


def check_R(p: BoundaryPartition) -> RCheck:
	"""
	Check the regularity condition on a partition.

	:param p:
	"""

	return RCheck(
			dirichlet_measure_positive=p.dirichlet_length > 0,
			interface_finite=not p.degenerate_edges,
			interfaces_on_zero_set=all(
					abs(point.m_dot_nu) <= p.tolerance
					for point in p.interface_points
					if point.kind is InterfaceKind.edge_interior
					),
			)


class S2Point(NamedTuple):
	"""
	The tangential sign check at a single interface point.
	"""

	interface: InterfacePoint

	#: Whether the boundary angle lies in ``[0, π]``.
	angle_valid: bool

	satisfied: bool


class S2Check(NamedTuple):
	"""
	The tangential sign condition over all interface points.
	"""

	satisfied: bool
	points: list[S2Point]

	@property
	def violations(self) -> list[S2Point]:
		"""
		The interface points where the condition fails.
		"""

		return [point for point in self.points if not point.satisfied]


def check_S2(p: BoundaryPartition) -> S2Check:
	"""
	Check ``m.τ ≤ 0`` at flat interface points.

	Points at corners with an angle below ``π`` satisfy the condition outright.
	Angles outside ``[0, π]`` are flagged as failures.

	:param p:
	"""

	points = []
	for interface in p.interface_points:
		angle_valid = -ANGLE_TOLERANCE <= interface.angle <= math.pi + ANGLE_TOLERANCE
		flat = abs(interface.angle - math.pi) <= ANGLE_TOLERANCE
		if not angle_valid:
			satisfied = False
		elif flat:
			satisfied = interface.m_dot_tau <= p.tolerance
		else:
			satisfied = True
		points.append(S2Point(interface, angle_valid, satisfied))

	return S2Check(all(point.satisfied for point in points), points)


def _rotate(vector: numpy.ndarray, angle: float) -> numpy.ndarray:
	c, s = math.cos(angle), math.sin(angle)
	return numpy.array([c * vector[0] - s * vector[1], s * vector[0] + c * vector[1]])


def belt_classify(
		edge: Sequence[numpy.ndarray],
		theta: float,
		x0: Sequence[float],
		) -> BeltTag:
	"""
	Classify an edge against the rotated multiplier with ``θ1 = θ2 = theta`` centred at ``x0``.

	The interface on the edge, if any, lies where ``x.ν_θ = x0.ν_θ``, with ``ν_θ`` the normal rotated by ``−θ``.

	:param edge: The start point, end point and outward normal of the edge. An :class:`~.Edge` may be passed.
	:param theta: An angle in ``(0, π/2)``.
	:param x0:

	:raises AdmissibilityError: If the edge is degenerate or the angle is out of range.
	"""

	a, b, normal = (numpy.asarray(v, dtype=float) for v in edge[:3])
	if numpy.allclose(a, b, rtol=0, atol=1e-14):
		raise AdmissibilityError("Degenerate edge", witness=a)
	if not 0 < theta < math.pi / 2:
		raise AdmissibilityError(f"theta must lie in (0, π/2), not {theta}")

	centre = numpy.asarray(x0, dtype=float)
	normal_theta = _rotate(normal, -theta)
	pa, pb, p0 = float(a @ normal_theta), float(b @ normal_theta), float(centre @ normal_theta)
	margin = 1e-12 * max(1.0, abs(pa), abs(pb))
	if not min(pa, pb) + margin < p0 < max(pa, pb) - margin:
		return BeltTag.no_interface

	interface = a + (p0 - pa) / (pb - pa) * (b - a)
	tangent = (b - a) / numpy.linalg.norm(b - a)

	# m.ν grows along the edge when pb > pa, so the Neumann part then lies beyond the interface
	if pb > pa:
		tangent = -tangent

	if (interface - centre) @ _rotate(tangent, -theta) > 0:
		return BeltTag.B_plus
	return BeltTag.B_minus


def case_classify(theta1: float, theta2: float) -> CaseTag:
	"""
	Sort a pair of rotation angles ``0 < θ1 ≤ θ2 < π/2`` into one of the three cases.

	:param theta1:
	:param theta2:

	:raises AdmissibilityError: If the angles are unsorted or out of range.
	"""

	if not 0 < theta1 <= theta2 < math.pi / 2:
		raise AdmissibilityError(f"Expected 0 < theta1 <= theta2 < π/2, got ({theta1}, {theta2})")

	if theta2 < math.pi / 4:
		return CaseTag.C1
	if theta1 < math.pi / 4:
		return CaseTag.C2
	return CaseTag.C3


class BoundaryQuadrature(NamedTuple):
	"""
	Trapezoid weight tables for the arc length ``dσ`` and the weighted measure ``dσ_m = m.ν dσ``.
	"""

	#: Quadrature points over the whole boundary.
	points: numpy.ndarray

	#: Arc length weights for :attr:`points`.
	weights: numpy.ndarray

	#: The label of the segment each point belongs to.
	labels: list[BoundaryLabel]

	edge_indices: numpy.ndarray

	#: Quadrature points on the Neumann part.
	sigma_m_points: numpy.ndarray

	#: ``m.ν``-scaled weights for :attr:`sigma_m_points`.
	sigma_m_weights: numpy.ndarray

	def integrate(self, values: numpy.ndarray) -> float:
		"""
		Integrate values given at :attr:`points` against ``dσ``.

		:param values:
		"""

		return float(numpy.sum(self.weights * values))


def boundary_quadrature(p: BoundaryPartition, field: MultiplierField, samples: int = 33) -> BoundaryQuadrature:
	"""
	Build trapezoid tables over every segment of a partition.

	:param p:
	:param field:
	:param samples: Number of points per segment, at least 2.
	"""

	if samples < 2:
		raise AdmissibilityError(f"samples must be at least 2, not {samples}")

	points, weights, labels, edge_indices = [], [], [], []
	sigma_m_points, sigma_m_weights = [], []
	unit = numpy.full(samples, 1.0)
	unit[0] = unit[-1] = 0.5

	for segment in p.segments:
		edge = p.domain.edges[segment.edge_index]
		ts = numpy.linspace(segment.t_start, segment.t_end, samples)
		seg_points = edge.point_at(ts)
		seg_weights = unit * (segment.t_end - segment.t_start) * edge.length / (samples - 1)

		points.append(seg_points)
		weights.append(seg_weights)
		labels.extend([segment.label] * samples)
		edge_indices.append(numpy.full(samples, segment.edge_index))

		if segment.label is BoundaryLabel.N:
			sigma_m_points.append(seg_points)
			sigma_m_weights.append(seg_weights * (field.value(seg_points) @ edge.normal))

	return BoundaryQuadrature(
			points=numpy.concatenate(points),
			weights=numpy.concatenate(weights),
			labels=labels,
			edge_indices=numpy.concatenate(edge_indices),
			sigma_m_points=numpy.concatenate(sigma_m_points) if sigma_m_points else numpy.empty((0, 2)),
			sigma_m_weights=numpy.concatenate(sigma_m_weights) if sigma_m_weights else numpy.empty(0),
			)


class DivergenceCheck(NamedTuple):
	"""
	The two sides of the divergence theorem for ``m``.
	"""

	boundary_flux: float
	volume_integral: float

	@property
	def gap(self) -> float:
		return abs(self.boundary_flux - self.volume_integral)


def _triangle_centroids(p0: numpy.ndarray, p1: numpy.ndarray, p2: numpy.ndarray, level: int) -> numpy.ndarray:
	i, j = numpy.meshgrid(numpy.arange(level), numpy.arange(level), indexing="ij")
	up = (i + j) <= level - 1
	down = (i + j) <= level - 2
	coeffs = numpy.concatenate([
			numpy.stack([i[up] + 1 / 3, j[up] + 1 / 3], axis=-1),
			numpy.stack([i[down] + 2 / 3, j[down] + 2 / 3], axis=-1),
			]) / level
	return p0 + coeffs[:, :1] * (p1 - p0) + coeffs[:, 1:] * (p2 - p0)


def fan_quadrature(
		domain: PolygonDomain,
		h: Optional[float] = None,
		level: Optional[int] = None,
		) -> tuple[numpy.ndarray, numpy.ndarray]:
	"""
	Centroid rule points and weights on a uniformly refined triangle fan from the first vertex.

	The weights are signed, so the rule also covers non-convex polygons when the integrand
	is defined outside the domain. It is exact for affine integrands and second order for smooth ones.

	:param domain:
	:param h: The longest side of a sub-triangle.
	:param level: The number of divisions of every fan triangle side. Overrides ``h``.
	"""

	spacing = math.nan if h is None else float(h)
	if level is None and not spacing > 0:
		raise AdmissibilityError(f"h must be positive, not {h}")

	origin = domain.vertices[0]
	points, weights = [], []
	for edge in domain.edges[1:-1]:
		if level is None:
			longest = max(edge.length, float(numpy.linalg.norm(edge.a - origin)), float(numpy.linalg.norm(edge.b - origin)))
			divisions = max(1, math.ceil(longest / spacing - 1e-9))
		else:
			divisions = level

		centroids = _triangle_centroids(origin, edge.a, edge.b, divisions)
		points.append(centroids)
		weights.append(numpy.full(len(centroids), _cross(edge.a - origin, edge.b - origin) / (2 * divisions**2)))

	return numpy.concatenate(points), numpy.concatenate(weights)


def divergence_check(field: MultiplierField, domain: PolygonDomain, samples: int = 64) -> DivergenceCheck:
	"""
	Compare ``∫_∂Ω m.ν dσ`` with ``∫_Ω div m dx``.

	The volume integral is exact for fields with a constant Jacobian; otherwise it uses the
	centroid rule on a uniform refinement of a (signed) triangle fan.

	:param field:
	:param domain:
	:param samples: Trapezoid intervals per edge, and refinement level of the fan.
	"""

	ts = numpy.linspace(0, 1, samples + 1)
	unit = numpy.full(samples + 1, 1.0 / samples)
	unit[0] = unit[-1] = 0.5 / samples

	flux = 0.0
	for edge in domain.edges:
		flux += float(numpy.sum(unit * edge.length * (field.value(edge.point_at(ts)) @ edge.normal)))

	if field.constant_jacobian:
		volume = float(divergence(field, domain.vertices[0])) * domain.signed_area
	else:
		points, weights = fan_quadrature(domain, level=samples)
		volume = float(numpy.sum(weights * divergence(field, points)))

	return DivergenceCheck(flux, volume)


def segment_rows(p: BoundaryPartition) -> list[tuple[int, float, float, str]]:
	"""
	Rows ``edge_index, t_start, t_end, label`` describing the segments of a partition.

	:param p:
	"""

	return [(s.edge_index, s.t_start, s.t_end, s.label.value) for s in p.segments]


def interface_rows(p: BoundaryPartition) -> list[tuple[float, float, str, float, float]]:
	"""
	Rows ``x, y, type, angle, m_dot_tau`` describing the interface points of a partition.

	:param p:
	"""

	return [(float(i.point[0]), float(i.point[1]), i.kind.value, i.angle, i.m_dot_tau) for i in p.interface_points]
