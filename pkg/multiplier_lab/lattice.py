#!/usr/bin/env python3
#
#  lattice.py
"""
The uniform node lattice on the unit square shared by the wave and control solvers.
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
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

# 3rd party
import numpy
import scipy.sparse
import scipy.sparse.linalg

# this package
from multiplier_lab.enums import BoundaryLabel, NodeKind
from multiplier_lab.errors import AdmissibilityError, GridMismatchError
from multiplier_lab.fields import MultiplierField
from multiplier_lab.geometry import BoundaryPartition, unit_square

__all__ = [
		"BoundaryPosition",
		"DirichletSolver",
		"Lattice",
		"SnappedBoundary",
		"lattice_for_spacing",
		"mode",
		"snap_partition",
		"two_level_energy"
		]

logger = logging.getLogger(__name__)


class BoundaryPosition(NamedTuple):
	"""
	A boundary node seen from one of the edges it lies on.

	Corner nodes appear once for each of their two edges.
	"""

	#: Flat index of the node.
	node: int

	#: The edge of the unit square (0 bottom, 1 right, 2 top, 3 left).
	edge: int

	#: Parameter of the node along :attr:`edge`.
	t: float

	#: The outward unit normal of :attr:`edge`.
	normal: numpy.ndarray

	#: The arc length attributed to the node on this edge.
	ds: float

	#: The node one step inwards along the normal.
	inward: int

	#: The node two steps inwards along the normal.
	inward2: int


@dataclass(frozen=True)
class Lattice:
	"""
	The ``(N+1)×(N+1)`` node lattice on ``[0, 1]²`` with spacing ``h = 1/N``.

	Nodal vectors are flat, with node ``(i, j)`` at position ``i·(N+1) + j`` and coordinates ``(i·h, j·h)``.
	"""

	#: The number of cells along each side.
	cells: int

	def __post_init__(self) -> None:
		if self.cells < 4:
			raise AdmissibilityError(f"The lattice needs at least 4 cells per side, not {self.cells}")

	@property
	def h(self) -> float:
		return 1.0 / self.cells

	@property
	def shape(self) -> tuple[int, int]:
		return (self.cells + 1, self.cells + 1)

	@property
	def size(self) -> int:
		return (self.cells + 1)**2

	def index(self, i: int, j: int) -> int:
		"""
		Return the flat index of node ``(i, j)``.

		:param i:
		:param j:
		"""

		return i * (self.cells + 1) + j

	def unravel(self, k: int) -> tuple[int, int]:
		"""
		Return the ``(i, j)`` position of flat index ``k``.

		:param k:
		"""

		i, j = divmod(int(k), self.cells + 1)
		return i, j

	def grid(self, values: numpy.ndarray) -> numpy.ndarray:
		"""
		Reshape a nodal vector to ``(N+1, N+1)``, indexed ``[i, j]``.

		:param values:
		"""

		return numpy.asarray(values).reshape(self.shape)

	@cached_property
	def points(self) -> numpy.ndarray:
		"""
		Node coordinates, shape ``(size, 2)``.
		"""

		axis = numpy.linspace(0, 1, self.cells + 1)
		x, y = numpy.meshgrid(axis, axis, indexing="ij")
		return numpy.stack([x.ravel(), y.ravel()], axis=-1)

	@cached_property
	def boundary_mask(self) -> numpy.ndarray:
		mask = numpy.ones(self.shape, dtype=bool)
		mask[1:-1, 1:-1] = False
		return mask.ravel()

	@cached_property
	def mass(self) -> numpy.ndarray:
		"""
		Lumped mass weights: ``h²`` inside, halved on edges and quartered at corners.
		"""

		weights = numpy.full(self.shape, self.h**2)
		weights[0, :] /= 2
		weights[-1, :] /= 2
		weights[:, 0] /= 2
		weights[:, -1] /= 2
		return weights.ravel()

	@cached_property
	def stiffness(self) -> scipy.sparse.csr_matrix:
		"""
		The stiffness matrix ``K`` with ``uᵀKu`` the discrete Dirichlet integral of ``u``.

		Links along the boundary carry half weight.
		"""

		n = self.cells + 1
		idx = numpy.arange(self.size).reshape(self.shape)

		horizontal_weight = numpy.ones((n - 1, n))
		horizontal_weight[:, [0, -1]] = 0.5
		vertical_weight = numpy.ones((n, n - 1))
		vertical_weight[[0, -1], :] = 0.5

		a = numpy.concatenate([idx[:-1, :].ravel(), idx[:, :-1].ravel()])
		b = numpy.concatenate([idx[1:, :].ravel(), idx[:, 1:].ravel()])
		w = numpy.concatenate([horizontal_weight.ravel(), vertical_weight.ravel()])

		rows = numpy.concatenate([a, b, a, b])
		cols = numpy.concatenate([a, b, b, a])
		data = numpy.concatenate([w, w, -w, -w])
		return scipy.sparse.coo_matrix((data, (rows, cols)), shape=(self.size, self.size)).tocsr()

	@cached_property
	def boundary_positions(self) -> list[BoundaryPosition]:
		"""
		Every (node, edge) pair on the boundary, edge by edge in increasing ``t``.
		"""

		n = self.cells
		positions = []

		def ds(step: int) -> float:
			return self.h / 2 if step in (0, n) else self.h

		for step in range(n + 1):
			positions.append(
					BoundaryPosition(
							self.index(step, 0),
							0,
							step / n,
							numpy.array([0.0, -1.0]),
							ds(step),
							self.index(step, 1),
							self.index(step, 2)
							)
					)
		for step in range(n + 1):
			positions.append(
					BoundaryPosition(
							self.index(n, step),
							1,
							step / n,
							numpy.array([1.0, 0.0]),
							ds(step),
							self.index(n - 1, step),
							self.index(n - 2, step)
							)
					)
		for step in range(n + 1):
			i = n - step
			positions.append(
					BoundaryPosition(
							self.index(i, n),
							2,
							step / n,
							numpy.array([0.0, 1.0]),
							ds(step),
							self.index(i, n - 1),
							self.index(i, n - 2)
							)
					)
		for step in range(n + 1):
			j = n - step
			positions.append(
					BoundaryPosition(
							self.index(0, j),
							3,
							step / n,
							numpy.array([-1.0, 0.0]),
							ds(step),
							self.index(1, j),
							self.index(2, j)
							)
					)

		return positions

	def l2_norm(self, u: numpy.ndarray) -> float:
		"""
		The lumped ``L²`` norm of a nodal vector.

		:param u:
		"""

		return math.sqrt(float(numpy.sum(self.mass * u**2)))

	def h1_seminorm(self, u: numpy.ndarray) -> float:
		"""
		The discrete ``H¹`` seminorm ``sqrt(uᵀKu)``.

		:param u:
		"""

		return math.sqrt(max(float(u @ (self.stiffness @ u)), 0.0))


def lattice_for_spacing(h: float) -> Lattice:
	"""
	Return the lattice with spacing ``h``, which must divide the unit interval.

	:param h:

	:raises GridMismatchError: If ``1/h`` is not an integer.
	"""

	cells = round(1 / h)
	if cells <= 0 or not math.isclose(cells * h, 1.0, rel_tol=0, abs_tol=1e-9):
		raise GridMismatchError(f"The spacing {h} does not divide the unit interval")
	return Lattice(cells)


def mode(lattice: Lattice, kx: int, ky: int) -> numpy.ndarray:
	"""
	The Dirichlet eigenfunction ``sin(kx·πx)·sin(ky·πy)`` sampled on the lattice.

	:param lattice:
	:param kx:
	:param ky:
	"""

	if kx < 1 or ky < 1:
		raise AdmissibilityError(f"Mode numbers must be positive, not ({kx}, {ky})")

	x, y = lattice.points[:, 0], lattice.points[:, 1]
	values = numpy.sin(kx * math.pi * x) * numpy.sin(ky * math.pi * y)
	values[lattice.boundary_mask] = 0.0
	return values


def two_level_energy(lattice: Lattice, u: numpy.ndarray, u_prev: numpy.ndarray, dt: float) -> float:
	"""
	The energy of the leapfrog scheme between two consecutive time levels.

	:param lattice:
	:param u: The later level.
	:param u_prev: The earlier level.
	:param dt: The time step.
	"""

	velocity = (u - u_prev) / dt
	kinetic = 0.5 * float(numpy.sum(lattice.mass * velocity**2))
	potential = 0.5 * float(u @ (lattice.stiffness @ u_prev))
	return kinetic + potential


@dataclass
class SnappedBoundary:
	"""
	A boundary partition transferred to the lattice nodes.
	"""

	lattice: Lattice = field(repr=False)

	#: The kind of each node.
	kinds: numpy.ndarray = field(repr=False)

	#: Boundary positions whose node is Neumann.
	neumann_positions: list[BoundaryPosition] = field(repr=False)

	#: ``m.ν`` at each of :attr:`neumann_positions`.
	m_dot_nu: numpy.ndarray = field(repr=False)

	#: Per node, ``Σ ds·max(m.ν, 0)`` over the node's Neumann positions.
	beta: numpy.ndarray = field(repr=False)

	@property
	def dirichlet(self) -> numpy.ndarray:
		return self.kinds == NodeKind.dirichlet.value

	@property
	def neumann(self) -> numpy.ndarray:
		return self.kinds == NodeKind.neumann.value

	@property
	def free(self) -> numpy.ndarray:
		"""
		Mask of the nodes not pinned to zero.
		"""

		return ~self.dirichlet

	@classmethod
	def all_dirichlet(cls, lattice: Lattice) -> "SnappedBoundary":
		"""
		Pin every boundary node.

		:param lattice:
		"""

		kinds = numpy.full(lattice.size, NodeKind.interior.value, dtype=object)
		kinds[lattice.boundary_mask] = NodeKind.dirichlet.value
		return cls(lattice, kinds, [], numpy.empty(0), numpy.zeros(lattice.size))


def snap_partition(lattice: Lattice, partition: BoundaryPartition, field: MultiplierField) -> SnappedBoundary:
	"""
	Label the boundary nodes of a lattice from a partition of the unit square.

	A node is Neumann when every edge it lies on labels it Neumann. Nodes on an interface point are Dirichlet.

	:param lattice:
	:param partition: A partition of :func:`~.unit_square`.
	:param field: The multiplier the partition was made from.

	:raises GridMismatchError: If the partition is not of the unit square.
	"""

	square = unit_square()
	if partition.domain.vertices.shape != square.vertices.shape or not numpy.allclose(
			partition.domain.vertices, square.vertices
			):
		raise GridMismatchError("Only partitions of the unit square can be snapped to the lattice")

	kinds = numpy.full(lattice.size, NodeKind.interior.value, dtype=object)
	kinds[lattice.boundary_mask] = NodeKind.neumann.value
	for position in lattice.boundary_positions:
		if partition.label_at(position.edge, position.t) is BoundaryLabel.D:
			kinds[position.node] = NodeKind.dirichlet.value

	neumann_positions = [
			position for position in lattice.boundary_positions
			if kinds[position.node] == NodeKind.neumann.value
			]

	if neumann_positions:
		nodes = numpy.array([position.node for position in neumann_positions])
		normals = numpy.array([position.normal for position in neumann_positions])
		m_dot_nu = numpy.einsum("ij,ij->i", field.value(lattice.points[nodes]), normals)
		ds = numpy.array([position.ds for position in neumann_positions])
	else:
		nodes = numpy.empty(0, dtype=int)
		m_dot_nu = numpy.empty(0)
		ds = numpy.empty(0)

	beta = numpy.zeros(lattice.size)
	numpy.add.at(beta, nodes, ds * numpy.maximum(m_dot_nu, 0.0))

	logger.debug(
			"Snapped partition: %d Neumann nodes, %d Dirichlet nodes",
			int(numpy.count_nonzero(kinds == NodeKind.neumann.value)),
			int(numpy.count_nonzero(kinds == NodeKind.dirichlet.value)),
			)

	return SnappedBoundary(lattice, kinds, neumann_positions, m_dot_nu, beta)


class DirichletSolver:
	"""
	Factorised stiffness matrix restricted to a set of free nodes.

	:param lattice:
	:param free: Mask of free nodes. Defaults to the interior nodes.
	"""

	def __init__(self, lattice: Lattice, free: Optional[numpy.ndarray] = None):
		self.lattice = lattice

		#: Mask of the free nodes.
		self.free = ~lattice.boundary_mask if free is None else numpy.asarray(free, dtype=bool)

		if not numpy.any(self.free):
			raise AdmissibilityError("There are no free nodes to solve for")

		stiffness = lattice.stiffness[self.free][:, self.free]
		self._lu = scipy.sparse.linalg.splu(scipy.sparse.csc_matrix(stiffness))

	def solve(self, rhs: numpy.ndarray) -> numpy.ndarray:
		"""
		Solve ``K_ff x = rhs`` for a vector given on the free nodes.

		:param rhs:
		"""

		return self._lu.solve(numpy.asarray(rhs, dtype=float))

	def riesz(self, u: numpy.ndarray) -> numpy.ndarray:
		"""
		Return the nodal vector ``x`` with ``K x = M u`` on the free nodes and ``x = 0`` elsewhere.

		:param u: A nodal vector.
		"""

		result = numpy.zeros(self.lattice.size)
		result[self.free] = self.solve(self.lattice.mass[self.free] * u[self.free])
		return result

	def h_minus_one_norm(self, u: numpy.ndarray) -> float:
		"""
		The dual norm of ``u`` against the discrete ``H¹₀`` norm on the free nodes.

		:param u: A nodal vector.
		"""

		functional = self.lattice.mass[self.free] * u[self.free]
		return math.sqrt(max(float(functional @ self.solve(functional)), 0.0))
