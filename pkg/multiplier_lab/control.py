#!/usr/bin/env python3
#
#  control.py
"""
The adjoint wave problem, the observability inequality, and boundary control by the Hilbert Uniqueness Method.
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
from collections.abc import Sequence
from typing import NamedTuple, Optional

# 3rd party
import numpy
import scipy.sparse

# this package
from multiplier_lab.enums import Verdict
from multiplier_lab.errors import AdmissibilityError, GridMismatchError, NumericalError
from multiplier_lab.fields import Box, MultiplierField, cone_check, sup_norm
from multiplier_lab.lattice import DirichletSolver, Lattice, SnappedBoundary, two_level_energy
from multiplier_lab.utils import trapezoid_weights
from multiplier_lab.wavesim import CFL_FACTOR

__all__ = [
		"AdjointResult",
		"BoundaryControl",
		"ControlTime",
		"FinalNorms",
		"HUMOperator",
		"HUMResult",
		"ObservabilityReport",
		"adjoint_simulate",
		"control_rows",
		"control_time",
		"hum_apply",
		"hum_solve",
		"observability_quotient",
		"pairing",
		"verify_control"
		]

logger = logging.getLogger(__name__)

#: Relative slack allowed on the observability bound.
OBSERVABILITY_SLACK = 0.05

#: Recorded in every report produced from lattice data.
LOW_FREQUENCY_NOTE = "discrete constants are meaningful for low-frequency data (modes with kx, ky <= 4) only"

#: Successive preconditioned residuals whose pairing exceeds this fraction of ``⟨z, r⟩``
#: have lost conjugacy, and conjugate gradients restart from the true residual.
ORTHOGONALITY_TOLERANCE = 0.5


def _time_grid(lattice: Lattice, T: float, dt: Optional[float]) -> tuple[int, float]:
	if not T > 0:
		raise AdmissibilityError(f"The final time must be positive, not {T}")

	requested = CFL_FACTOR * lattice.h if dt is None else float(dt)
	if not 0 < requested <= CFL_FACTOR * lattice.h * (1 + 1e-12):
		raise AdmissibilityError(f"dt = {requested} violates dt <= {CFL_FACTOR}·h with h = {lattice.h}")

	steps = max(1, math.ceil(T / requested - 1e-9))
	return steps, T / steps


def _check_finite(lattice: Lattice, values: numpy.ndarray, t: float) -> None:
	if not numpy.all(numpy.isfinite(values)):
		node = int(numpy.flatnonzero(~numpy.isfinite(values))[0])
		position = lattice.unravel(node)
		raise NumericalError(f"Non-finite value at node {position} at t = {t}", time=t, index=position)


class ControlTime(NamedTuple):
	"""
	The control time threshold ``T0 = 2‖m‖∞/c(m)``.
	"""

	norm_inf: float
	c_m: float

	#: Infinite when the cone condition fails.
	T0: float

	#: Whether ``c(m) > 0``.
	admissible: bool


def control_time(field: MultiplierField, box: Optional[Box] = None, resolution: float = 1 / 16) -> ControlTime:
	"""
	Compute the control time threshold of a multiplier.

	:param field:
	:param box: Defaults to the field's box, then the unit square.
	:param resolution:
	"""

	cone = cone_check(field, box, resolution)
	norm = sup_norm(field, box, resolution).value
	if cone.c_m <= 0:
		return ControlTime(norm, cone.c_m, math.inf, False)
	return ControlTime(norm, cone.c_m, 2 * norm / cone.c_m, True)


class AdjointResult(NamedTuple):
	"""
	The output of :func:`adjoint_simulate`.
	"""

	dt: float

	#: The time levels ``k·dt``.
	times: numpy.ndarray

	#: ``½‖φ1‖² + ½‖∇φ0‖²``.
	energy0: float

	#: The energy between consecutive levels, one entry per step.
	energies: numpy.ndarray

	#: ``max |E − E0| / E0``.
	drift: float

	#: Outward normal derivatives, shape ``(levels, positions)``, at the Neumann positions.
	normal_derivatives: numpy.ndarray

	#: ``∫∫ |∂_ν φ|² dσ dt`` over the Neumann part.
	flux: float

	#: ``(t, φ)`` pairs kept every ``checkpoint_stride`` steps.
	checkpoints: list[tuple[float, numpy.ndarray]]


def adjoint_simulate(
		phi0: numpy.ndarray,
		phi1: numpy.ndarray,
		T: float,
		lattice: Lattice,
		boundary: Optional[SnappedBoundary] = None,
		dt: Optional[float] = None,
		checkpoint_stride: Optional[int] = None,
		) -> AdjointResult:
	"""
	Solve the wave equation with all boundary nodes clamped, recording the normal derivative on the Neumann part.

	Normal derivatives use the one-sided second order stencil ``(3φ_b − 4φ_1 + φ_2)/(2h)``.

	:param phi0: Initial displacement, zero on the boundary.
	:param phi1: Initial velocity, zero on the boundary.
	:param T:
	:param lattice:
	:param boundary: Supplies the Neumann positions. Without it no derivatives are recorded.
	:param dt: Defaults to ``0.4·h``.
	:param checkpoint_stride:
	"""

	steps, dt = _time_grid(lattice, T, dt)
	phi0 = numpy.asarray(phi0, dtype=float).ravel()
	phi1 = numpy.asarray(phi1, dtype=float).ravel()
	for name, values in (("phi0", phi0), ("phi1", phi1)):
		if values.shape != (lattice.size, ):
			raise GridMismatchError(f"{name} has {values.size} values; the lattice has {lattice.size} nodes")
		if numpy.max(numpy.abs(values[lattice.boundary_mask])) > 1e-12:
			raise AdmissibilityError(f"{name} must vanish on the boundary")

	interior = ~lattice.boundary_mask
	stiffness = lattice.stiffness
	mass = lattice.mass

	def acceleration(phi: numpy.ndarray) -> numpy.ndarray:
		result = -(stiffness @ phi) / mass
		result[~interior] = 0.0
		return result

	positions = [] if boundary is None else boundary.neumann_positions
	inward = numpy.array([pos.inward for pos in positions], dtype=int)
	inward2 = numpy.array([pos.inward2 for pos in positions], dtype=int)
	ds = numpy.array([pos.ds for pos in positions])

	def normal_derivative(phi: numpy.ndarray) -> numpy.ndarray:
		return (-4 * phi[inward] + phi[inward2]) / (2 * lattice.h)

	energy0 = 0.5 * float(numpy.sum(mass * phi1**2)) + 0.5 * float(phi0 @ (stiffness @ phi0))

	previous = phi0.copy()
	current = phi0 + dt * phi1 + 0.5 * dt**2 * acceleration(phi0)
	current[~interior] = 0.0

	derivatives = [normal_derivative(previous), normal_derivative(current)]
	energies = [two_level_energy(lattice, current, previous, dt)]
	checkpoints = []
	if checkpoint_stride:
		checkpoints.append((0.0, previous.copy()))
		if checkpoint_stride == 1:
			checkpoints.append((dt, current.copy()))

	for k in range(1, steps):
		following = 2 * current - previous + dt**2 * acceleration(current)
		_check_finite(lattice, following, (k + 1) * dt)
		previous, current = current, following
		derivatives.append(normal_derivative(current))
		energies.append(two_level_energy(lattice, current, previous, dt))
		if checkpoint_stride and ((k + 1) % checkpoint_stride == 0 or k + 1 == steps):
			checkpoints.append(((k + 1) * dt, current.copy()))

	times = numpy.arange(steps + 1) * dt
	normal_derivatives = numpy.array(derivatives).reshape(steps + 1, len(positions))
	flux = float(trapezoid_weights(times) @ (normal_derivatives**2 @ ds)) if positions else 0.0

	energy_array = numpy.array(energies)
	drift = float(numpy.max(numpy.abs(energy_array - energy0)) / energy0) if energy0 > 0 else 0.0
	logger.info("Adjoint solve: %d steps, E0 = %g, drift %.3g, flux %g", steps, energy0, drift, flux)

	return AdjointResult(dt, times, energy0, energy_array, drift, normal_derivatives, flux, checkpoints)


class ObservabilityReport(NamedTuple):
	"""
	Both sides of the observability inequality for one set of adjoint data.
	"""

	E0: float

	#: ``∫∫ |∂_ν φ|² dσ dt`` over the Neumann part.
	flux: float

	#: ``E0 / flux``.
	quotient: float

	#: ``sup |m.ν| / (2(c(m)T − 2‖m‖∞))``, infinite for ``T ≤ T0``.
	bound: float

	T: float
	T0: float
	norm_inf: float
	c_m: float
	sup_m_dot_nu: float
	conservation_drift: float
	verdict: Verdict
	note: str = LOW_FREQUENCY_NOTE


def observability_quotient(
		phi0: numpy.ndarray,
		phi1: numpy.ndarray,
		T: float,
		field: MultiplierField,
		boundary: SnappedBoundary,
		dt: Optional[float] = None,
		box: Optional[Box] = None,
		) -> ObservabilityReport:
	"""
	Compare the initial adjoint energy with the observed boundary flux.

	The verdict is ``verified`` when the quotient is within 5% of the bound and ``inapplicable`` when ``T ≤ T0``.

	:param phi0:
	:param phi1:
	:param T:
	:param field:
	:param boundary: The partition of ``field`` snapped to the lattice.
	:param dt:
	:param box: Where ``‖m‖∞`` and ``c(m)`` are sampled. Defaults to the field's box, then the unit square.
	"""

	threshold = control_time(field, box)
	result = adjoint_simulate(phi0, phi1, T, boundary.lattice, boundary, dt)
	sup_m_dot_nu = float(numpy.max(numpy.abs(boundary.m_dot_nu))) if boundary.m_dot_nu.size else 0.0

	if result.flux > 0:
		quotient = result.energy0 / result.flux
	else:
		quotient = 0.0 if result.energy0 == 0 else math.inf

	if T <= threshold.T0:
		bound = math.inf
		verdict = Verdict.inapplicable
	else:
		bound = sup_m_dot_nu / (2 * (threshold.c_m * T - 2 * threshold.norm_inf))
		verdict = Verdict.verified if quotient <= bound * (1 + OBSERVABILITY_SLACK) else Verdict.not_verified

	return ObservabilityReport(
			E0=result.energy0,
			flux=result.flux,
			quotient=quotient,
			bound=bound,
			T=T,
			T0=threshold.T0,
			norm_inf=threshold.norm_inf,
			c_m=threshold.c_m,
			sup_m_dot_nu=sup_m_dot_nu,
			conservation_drift=result.drift,
			verdict=verdict,
			)


def pairing(
		e: tuple[numpy.ndarray, numpy.ndarray],
		xi: tuple[numpy.ndarray, numpy.ndarray],
		lattice: Lattice,
		) -> float:
	"""
	The duality pairing ``Σ w·e0·ξ0 + Σ w·e1·ξ1`` with the lumped mass weights ``w``.

	:param e:
	:param xi:
	:param lattice:
	"""

	return float(numpy.sum(lattice.mass * (e[0] * xi[0] + e[1] * xi[1])))


class BoundaryControl(NamedTuple):
	"""
	Dirichlet data on the Neumann nodes, sampled at every time level.
	"""

	times: numpy.ndarray

	#: Flat indices of the controlled nodes.
	nodes: numpy.ndarray

	#: Shape ``(len(times), len(nodes))``.
	values: numpy.ndarray


class FinalNorms(NamedTuple):
	"""
	The size of a state before and after a controlled run.
	"""

	initial_l2: float
	initial_hminus1: float
	final_l2: float
	final_hminus1: float

	@property
	def initial(self) -> float:
		return math.hypot(self.initial_l2, self.initial_hminus1)

	@property
	def final(self) -> float:
		return math.hypot(self.final_l2, self.final_hminus1)

	@property
	def reduction(self) -> float:
		"""
		``final / initial``, or zero when the initial state is zero.
		"""

		return self.final / self.initial if self.initial > 0 else 0.0


class HUMOperator:
	"""
	The operator ``Λ`` mapping adjoint data to the initial state a control drives to rest.

	The control is the variational normal flux ``(K_BI·φ)/ds`` of the adjoint solution. The backward
	problem runs the same leapfrog in reversed time with that control imposed on the Neumann nodes,
	which makes ``Λ`` exactly symmetric in :func:`pairing`.

	:param boundary:
	:param T:
	:param dt: Defaults to ``0.4·h``.
	"""

	def __init__(self, boundary: SnappedBoundary, T: float, dt: Optional[float] = None):
		self.lattice = lattice = boundary.lattice
		self.boundary = boundary
		self.T = float(T)
		self.steps, self.dt = _time_grid(lattice, T, dt)
		self.times = numpy.arange(self.steps + 1) * self.dt

		self.interior = numpy.flatnonzero(~lattice.boundary_mask)
		self.nodes = numpy.flatnonzero(boundary.neumann)

		arc = numpy.zeros(lattice.size)
		for position in lattice.boundary_positions:
			arc[position.node] += position.ds
		self.ds = arc[self.nodes]

		stiffness = scipy.sparse.csr_matrix(lattice.stiffness)
		self._k_ii = stiffness[self.interior][:, self.interior]
		self._k_in = stiffness[self.interior][:, self.nodes]
		self._k_ni = self._k_in.T.tocsr()
		self._mass = lattice.mass[self.interior]

	def _restrict(self, values: numpy.ndarray) -> numpy.ndarray:
		values = numpy.asarray(values, dtype=float).ravel()
		if values.shape != (self.lattice.size, ):
			raise GridMismatchError(f"Expected {self.lattice.size} node values, got {values.size}")
		return values[self.interior]

	def _extend(self, values: numpy.ndarray) -> numpy.ndarray:
		full = numpy.zeros(self.lattice.size)
		full[self.interior] = values
		return full

	def _a(self, values: numpy.ndarray) -> numpy.ndarray:
		return (self._k_ii @ values) / self._mass

	def _p(self, control: numpy.ndarray) -> numpy.ndarray:
		return (self._k_in @ control) / self._mass

	def adjoint_flux(self, e0: numpy.ndarray, e1: numpy.ndarray) -> numpy.ndarray:
		"""
		Solve the adjoint problem from ``(e0, e1)`` and return its flux on the Neumann nodes at every level.

		:param e0:
		:param e1:
		"""

		dt = self.dt
		previous = self._restrict(e0)
		current = previous + dt * self._restrict(e1) - 0.5 * dt**2 * self._a(previous)
		fluxes = numpy.empty((self.steps + 1, self.nodes.size))
		fluxes[0] = (self._k_ni @ previous) / self.ds
		fluxes[1] = (self._k_ni @ current) / self.ds

		for k in range(1, self.steps):
			previous, current = current, 2 * current - previous - dt**2 * self._a(current)
			fluxes[k + 1] = (self._k_ni @ current) / self.ds

		if not numpy.all(numpy.isfinite(fluxes)):
			raise NumericalError("Non-finite adjoint flux", time=self.T)
		return fluxes

	def backward(self, control: numpy.ndarray) -> tuple[numpy.ndarray, numpy.ndarray]:
		"""
		Solve from rest at ``T`` back to ``0`` with the given boundary control and return ``(u′(0), −u(0))``.

		:param control: Shape ``(steps + 1, nodes)``.
		"""

		dt = self.dt
		reversed_control = control[::-1]
		previous = numpy.zeros(self.interior.size)
		current = -0.5 * dt**2 * self._p(reversed_control[0])

		for k in range(1, self.steps):
			previous, current = current, (
					2 * current - previous - dt**2 * (self._a(current) + self._p(reversed_control[k]))
					)

		xi1 = -current
		xi0 = (previous - current) / dt + 0.5 * dt * (self._a(current) + self._p(reversed_control[-1]))
		return self._extend(xi0), self._extend(xi1)

	def forward(
			self,
			u0: numpy.ndarray,
			u1: numpy.ndarray,
			control: numpy.ndarray,
			) -> tuple[numpy.ndarray, numpy.ndarray]:
		"""
		Solve from ``(u0, u1)`` with the given boundary control and return ``(u(T), u′(T))``.

		:param u0:
		:param u1:
		:param control: Shape ``(steps + 1, nodes)``.
		"""

		dt = self.dt
		previous = self._restrict(u0)
		current = previous + dt * self._restrict(u1) - 0.5 * dt**2 * (self._a(previous) + self._p(control[0]))

		for k in range(1, self.steps):
			previous, current = current, 2 * current - previous - dt**2 * (self._a(current) + self._p(control[k]))

		velocity = (current - previous) / dt - 0.5 * dt * (self._a(current) + self._p(control[-1]))
		if not (numpy.all(numpy.isfinite(current)) and numpy.all(numpy.isfinite(velocity))):
			raise NumericalError("Non-finite state in the controlled solve", time=self.T)
		return self._extend(current), self._extend(velocity)

	def apply(self, e0: numpy.ndarray, e1: numpy.ndarray) -> tuple[numpy.ndarray, numpy.ndarray]:
		"""
		Return ``Λ(e0, e1)``.

		:param e0:
		:param e1:
		"""

		return self.backward(self.adjoint_flux(e0, e1))

	def control(self, values: numpy.ndarray) -> BoundaryControl:
		"""
		Wrap flux values on this operator's time grid as a :class:`~.BoundaryControl`.

		:param values:
		"""

		return BoundaryControl(self.times.copy(), self.nodes.copy(), values)

	def check_control(self, control: BoundaryControl) -> None:
		"""
		Check that a control lives on this operator's time grid and nodes.

		:param control:

		:raises GridMismatchError:
		"""

		values = numpy.asarray(control.values)
		if (
				control.times.shape != self.times.shape or not numpy.allclose(control.times, self.times, rtol=0, atol=1e-9)
				or not numpy.array_equal(control.nodes, self.nodes)
				or values.shape != (self.steps + 1, self.nodes.size)
				):
			raise GridMismatchError("The control does not match the solver's time grid and boundary nodes")


def hum_apply(
		e0: numpy.ndarray,
		e1: numpy.ndarray,
		T: float,
		boundary: SnappedBoundary,
		dt: Optional[float] = None,
		) -> tuple[numpy.ndarray, numpy.ndarray]:
	"""
	Apply the HUM operator once.

	:param e0: Initial adjoint displacement.
	:param e1: Initial adjoint velocity.
	:param T:
	:param boundary: The partition snapped to the lattice.
	:param dt:

	:returns: ``(ξ0, ξ1) = (u′(0), −u(0))`` for the state driven to rest at ``T``.
	"""

	return HUMOperator(boundary, T, dt).apply(e0, e1)


def _final_norms(
		operator: HUMOperator,
		solver: DirichletSolver,
		u0: numpy.ndarray,
		u1: numpy.ndarray,
		control: BoundaryControl,
		) -> FinalNorms:
	operator.check_control(control)
	final_u, final_velocity = operator.forward(u0, u1, numpy.asarray(control.values, dtype=float))
	lattice = operator.lattice
	return FinalNorms(
			initial_l2=lattice.l2_norm(u0),
			initial_hminus1=solver.h_minus_one_norm(u1),
			final_l2=lattice.l2_norm(final_u),
			final_hminus1=solver.h_minus_one_norm(final_velocity),
			)


def verify_control(
		u0: numpy.ndarray,
		u1: numpy.ndarray,
		v: BoundaryControl,
		T: float,
		boundary: SnappedBoundary,
		dt: Optional[float] = None,
		) -> FinalNorms:
	"""
	Run the controlled wave equation and measure the final state in the ``L²``/``H⁻¹`` pair.

	:param u0:
	:param u1:
	:param v: Dirichlet data on the Neumann nodes.
	:param T:
	:param boundary:
	:param dt:

	:raises GridMismatchError: If ``v`` is not sampled on the solver's time grid and nodes.
	"""

	operator = HUMOperator(boundary, T, dt)
	return _final_norms(operator, DirichletSolver(boundary.lattice), u0, u1, v)


class HUMResult(NamedTuple):
	"""
	The output of :func:`hum_solve`.
	"""

	control: BoundaryControl
	cg_iterations: int

	#: The relative residual of the returned iterate, in the dual norm.
	cg_residual: float

	#: The smallest relative residual reached by each iteration. Never increases.
	residual_history: list[float]

	#: How many times conjugate gradients restarted after losing conjugacy.
	restarts: int
	norms: FinalNorms
	T: float
	T0: float
	note: str = LOW_FREQUENCY_NOTE

	@property
	def reduction(self) -> float:
		return self.norms.reduction


def hum_solve(
		u0: numpy.ndarray,
		u1: numpy.ndarray,
		T: float,
		field: MultiplierField,
		boundary: SnappedBoundary,
		tol: float = 1e-6,
		max_iter: int = 200,
		dt: Optional[float] = None,
		box: Optional[Box] = None,
		) -> HUMResult:
	"""
	Find the control driving ``(u0, u1)`` to rest at time ``T``.

	Solves ``Λe = (u1, −u0)`` by conjugate gradients, preconditioned with the Riesz map of ``H¹₀ × L²``,
	and verifies the resulting control with a forward run.
	The iterate with the smallest residual is returned.

	:param u0:
	:param u1:
	:param T: Must exceed the control time threshold of ``field``.
	:param field:
	:param boundary: The partition of ``field`` snapped to the lattice.
	:param tol: Relative residual tolerance.
	:param max_iter:
	:param dt:
	:param box: Where the control time threshold is sampled.

	:raises AdmissibilityError: If ``T`` does not exceed the threshold.
	:raises NumericalError: If conjugate gradients break down.
	"""

	threshold = control_time(field, box)
	if not T > threshold.T0:
		raise AdmissibilityError(f"T = {T} does not exceed the control time T0 = {threshold.T0}")

	lattice = boundary.lattice
	operator = HUMOperator(boundary, T, dt)
	solver = DirichletSolver(lattice)
	u0 = numpy.asarray(u0, dtype=float).ravel()
	u1 = numpy.asarray(u1, dtype=float).ravel()
	interior = ~lattice.boundary_mask

	def riesz(r: tuple[numpy.ndarray, numpy.ndarray]) -> tuple[numpy.ndarray, numpy.ndarray]:
		z1 = numpy.where(interior, r[1], 0.0)
		return solver.riesz(r[0]), z1

	def dot(a: tuple[numpy.ndarray, numpy.ndarray], b: tuple[numpy.ndarray, numpy.ndarray]) -> float:
		return pairing(a, b, lattice)

	rhs = (numpy.where(interior, u1, 0.0), numpy.where(interior, -u0, 0.0))
	rhs_norm = math.sqrt(max(dot(riesz(rhs), rhs), 0.0))

	e = (numpy.zeros(lattice.size), numpy.zeros(lattice.size))
	history: list[float] = []
	restarts = 0
	iterations = 0
	residual = 0.0

	if rhs_norm > 0:
		r = rhs
		z = riesz(r)
		p = z
		rz = dot(z, r)
		residual = 1.0
		best = e

		for iterations in range(1, max_iter + 1):
			q = operator.apply(*p)
			curvature = dot(p, q)
			if curvature <= 0:
				raise NumericalError(
						f"Conjugate gradients broke down at iteration {iterations} (pairing {curvature:.3g})",
						index=iterations,
						)

			alpha = rz / curvature
			e = (e[0] + alpha * p[0], e[1] + alpha * p[1])
			previous = r
			r = (r[0] - alpha * q[0], r[1] - alpha * q[1])
			z = riesz(r)
			rz_next = dot(z, r)

			current = math.sqrt(max(rz_next, 0.0)) / rhs_norm
			if current < residual:
				residual = current
				best = e
			history.append(residual)
			logger.debug("CG iteration %d: relative residual %.3e", iterations, current)
			if residual <= tol:
				break

			if abs(dot(z, previous)) > ORTHOGONALITY_TOLERANCE * rz:
				restarts += 1
				warnings.warn(f"CG lost conjugacy at iteration {iterations}; restarting", stacklevel=2)
				applied = operator.apply(*e)
				r = (rhs[0] - applied[0], rhs[1] - applied[1])
				z = riesz(r)
				p = z
				rz = dot(z, r)
				continue

			beta = rz_next / rz
			p = (z[0] + beta * p[0], z[1] + beta * p[1])
			rz = rz_next
		else:
			logger.warning("CG stopped after %d iterations at relative residual %.3e", max_iter, residual)

		control = operator.control(operator.adjoint_flux(*best))
	else:
		control = operator.control(numpy.zeros((operator.steps + 1, operator.nodes.size)))

	norms = _final_norms(operator, solver, u0, u1, control)
	logger.info(
			"HUM: %d iterations, residual %.3e, reduction %.3e",
			iterations,
			residual,
			norms.reduction,
			)

	return HUMResult(control, iterations, residual, history, restarts, norms, T, threshold.T0)


def control_rows(control: BoundaryControl, boundary: SnappedBoundary) -> list[tuple[float, int, float, float]]:
	"""
	Rows ``t, edge_index, s, value`` describing a control, one per time level and node.

	Corner nodes are reported against the first edge they lie on.

	:param control:
	:param boundary:
	"""

	located: dict[int, tuple[int, float]] = {}
	for position in boundary.neumann_positions:
		located.setdefault(position.node, (position.edge, position.t))

	rows = []
	for t, values in zip(control.times, control.values):
		for node, value in zip(control.nodes, values):
			edge, s = located.get(int(node), (-1, math.nan))
			rows.append((float(t), edge, s, float(value)))
	return rows
