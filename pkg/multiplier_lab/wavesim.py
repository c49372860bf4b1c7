#!/usr/bin/env python3
#
#  wavesim.py
"""
Leapfrog simulation of the wave equation with Dirichlet clamping and nonlinear boundary feedback.
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
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional

# 3rd party
import numpy
from domdf_python_tools.typing import PathLike

# this package
from multiplier_lab.enums import FeedbackKind
from multiplier_lab.errors import AdmissibilityError, NumericalError
from multiplier_lab.lattice import Lattice, SnappedBoundary, mode, two_level_energy
from multiplier_lab.utils import read_csv_columns, write_csv

__all__ = [
		"EnergyTrace",
		"FeedbackLaw",
		"FeedbackReport",
		"FeedbackViolation",
		"SimulationResult",
		"WaveSolver",
		"WaveState",
		"dissipation_check",
		"first_mode",
		"make_custom_feedback",
		"make_feedback",
		"simulate",
		"step",
		"validate_feedback"
		]

logger = logging.getLogger(__name__)

#: The largest admissible ratio ``dt / h``.
CFL_FACTOR = 0.4

#: Maximum bisection iterations for the boundary closure.
CLOSURE_ITERATIONS = 30

#: Residual tolerance of the boundary closure, relative to ``1 + |c₂|``.
CLOSURE_TOLERANCE = 1e-12

ScalarLaw = Callable[[numpy.ndarray], numpy.ndarray]
PositionLaw = Callable[[numpy.ndarray, numpy.ndarray], numpy.ndarray]


@dataclass(frozen=True)
class FeedbackLaw:
	"""
	A boundary feedback law ``g`` with its growth constants.

	Laws given as ``g(x, s)`` replace the whole boundary flux ``(m.ν)·g(s)``.
	"""

	kind: FeedbackKind

	#: Lower growth constant.
	k_minus: float

	#: Upper growth constant.
	k_plus: float

	#: Growth exponent near zero.
	p: float

	#: The law ``g(s)``, vectorised over ``s``.
	function: Optional[ScalarLaw] = field(default=None, repr=False)

	#: The law ``g(x, s)``, vectorised over matching leading dimensions of ``x`` and ``s``.
	position_function: Optional[PositionLaw] = field(default=None, repr=False)

	#: The two-sided bound constant for :attr:`position_function`.
	c: Optional[float] = None

	#: Parameters which reproduce the law through :func:`make_feedback`.
	params: dict[str, Any] = field(default_factory=dict)

	@property
	def depends_on_position(self) -> bool:
		return self.position_function is not None

	def __call__(self, s: Any, x: Optional[numpy.ndarray] = None) -> numpy.ndarray:
		s = numpy.asarray(s, dtype=float)
		if self.position_function is not None:
			if x is None:
				raise TypeError("This feedback law needs boundary positions")
			return numpy.asarray(self.position_function(numpy.asarray(x, dtype=float), s), dtype=float)

		assert self.function is not None
		return numpy.asarray(self.function(s), dtype=float)

	def to_spec(self) -> dict[str, Any]:
		"""
		Return a JSON-compatible description of the law.
		"""

		return {"kind": self.kind.value, **self.params}


def _power_law(p: float) -> ScalarLaw:

	def function(s: numpy.ndarray) -> numpy.ndarray:
		magnitude = numpy.abs(s)
		return numpy.where(magnitude <= 1, numpy.sign(s) * magnitude**p, s)

	return function


def make_feedback(spec: Mapping[str, Any]) -> FeedbackLaw:
	"""
	Construct a feedback law from its description.

	``{"kind": "linear", "alpha": α}`` gives ``g(s) = αs``; ``{"kind": "power", "p": p}`` gives
	``g(s) = sign(s)|s|^p`` on ``[-1, 1]`` continued linearly; ``{"kind": "zero"}`` gives no damping.
	Custom laws take callables under ``g`` or ``g_xs`` and are passed on to :func:`make_custom_feedback`.

	:param spec:

	:raises AdmissibilityError: If ``α ≤ 0`` or ``p < 1``.
	"""

	kind = FeedbackKind.from_name(str(spec.get("kind", '')))

	if kind is FeedbackKind.zero:
		return FeedbackLaw(kind, 0.0, 0.0, 1.0, function=numpy.zeros_like)

	if kind is FeedbackKind.linear:
		alpha = float(spec.get("alpha", 1.0))
		if not alpha > 0:
			raise AdmissibilityError(f"The linear feedback coefficient must be positive, not {alpha}")
		return FeedbackLaw(kind, alpha, alpha, 1.0, function=lambda s: alpha * s, params={"alpha": alpha})

	if kind is FeedbackKind.power:
		p = float(spec.get("p", 1.0))
		if not p >= 1:
			raise AdmissibilityError(f"The feedback exponent must be at least 1, not {p}")
		return FeedbackLaw(kind, 1.0, 1.0, p, function=_power_law(p), params={'p': p})

	return make_custom_feedback(
			spec.get('g'),
			position_function=spec.get("g_xs"),
			k_minus=float(spec.get("k_minus", 0.0)),
			k_plus=float(spec.get("k_plus", math.inf)),
			p=float(spec.get('p', 1.0)),
			c=spec.get('c'),
			)


def make_custom_feedback(
		function: Optional[ScalarLaw] = None,
		*,
		position_function: Optional[PositionLaw] = None,
		k_minus: float = 0.0,
		k_plus: float = math.inf,
		p: float = 1.0,
		c: Optional[float] = None,
		) -> FeedbackLaw:
	"""
	Wrap a user supplied law ``g(s)`` or ``g(x, s)`` with its declared constants.

	The constants are not checked against the law; use :func:`validate_feedback` for that.

	:param function: The law ``g(s)``.
	:param position_function: The law ``g(x, s)``.
	:param k_minus:
	:param k_plus:
	:param p:
	:param c: The constant of the two-sided bounds for ``g(x, s)``, greater than 1.
	"""

	if (function is None) == (position_function is None):
		raise AdmissibilityError("Give exactly one of g(s) and g(x, s)")
	if not 0 <= k_minus <= k_plus:
		raise AdmissibilityError(f"Expected 0 <= k_minus <= k_plus, got ({k_minus}, {k_plus})")
	if not p >= 1:
		raise AdmissibilityError(f"The feedback exponent must be at least 1, not {p}")
	if position_function is not None and (c is None or not c > 1):
		raise AdmissibilityError(f"A position dependent law needs a bound constant c > 1, not {c}")

	return FeedbackLaw(
			FeedbackKind.custom,
			float(k_minus),
			float(k_plus),
			float(p),
			function=function,
			position_function=position_function,
			c=None if c is None else float(c),
			)


class FeedbackViolation(NamedTuple):
	"""
	The smallest sample, in magnitude, at which a growth or monotonicity condition fails.
	"""

	#: One of ``monotone``, ``upper``, ``lower``, ``position_lower`` and ``position_upper``.
	condition: str

	s: float

	#: The value of ``g`` (or the decrease, for ``monotone``) at the witness.
	value: float

	bound: float

	#: The number of failing samples.
	count: int

	#: The boundary point, for position dependent laws.
	point: Optional[numpy.ndarray] = None


class FeedbackReport(NamedTuple):
	"""
	The result of :func:`validate_feedback`.
	"""

	k_minus: float
	k_plus: float
	p: float
	violations: list[FeedbackViolation]

	@property
	def satisfied(self) -> bool:
		return not self.violations

	def failed(self, condition: str) -> bool:
		"""
		Returns whether the given condition has a violation.

		:param condition:
		"""

		return any(v.condition == condition for v in self.violations)


def _first_failure(
		condition: str,
		failing: numpy.ndarray,
		s: numpy.ndarray,
		values: numpy.ndarray,
		bounds: numpy.ndarray,
		points: Optional[numpy.ndarray] = None,
		) -> list[FeedbackViolation]:
	count = int(numpy.count_nonzero(failing))
	if not count:
		return []

	candidates = numpy.flatnonzero(failing.ravel())
	flat = int(candidates[numpy.argmin(numpy.abs(s.ravel()[candidates]))])
	point = None
	if points is not None:
		point = points.reshape(-1, points.shape[-1])[flat]

	return [
			FeedbackViolation(
					condition,
					float(s.ravel()[flat]),
					float(values.ravel()[flat]),
					float(bounds.ravel()[flat]),
					count,
					point,
					)
			]


def validate_feedback(
		g: FeedbackLaw,
		samples: int = 91,
		boundary: Optional[tuple[numpy.ndarray, numpy.ndarray]] = None,
		) -> FeedbackReport:
	"""
	Check monotonicity and the growth bounds of a feedback law on ``s ∈ ±[1e-6, 1e3]``.

	For laws ``g(x, s)`` the two-sided bounds with constant ``c`` are checked at the given
	boundary points where ``m.ν > 0``.

	:param g:
	:param samples: The number of logarithmically spaced magnitudes.
	:param boundary: Boundary points, shape ``(P, 2)``, and ``m.ν`` there, shape ``(P,)``.
	"""

	magnitudes = numpy.logspace(-6, 3, samples)
	s = numpy.concatenate([-magnitudes[::-1], [0.0], magnitudes])
	violations: list[FeedbackViolation] = []

	if g.function is not None:
		values = g(s)
		decrease = -numpy.diff(values)
		scale = numpy.maximum(1.0, numpy.abs(values[1:]))
		violations += _first_failure("monotone", decrease > 1e-12 * scale, s[1:], decrease, numpy.zeros_like(decrease))

		upper = g.k_plus * numpy.abs(s)
		violations += _first_failure("upper", numpy.abs(values) > upper * (1 + 1e-12) + 1e-300, s, values, upper)

		lower = g.k_minus * numpy.minimum(numpy.abs(s), numpy.abs(s)**g.p)
		violations += _first_failure("lower", numpy.abs(values) < lower * (1 - 1e-12), s, values, lower)

	if g.position_function is not None and boundary is not None:
		points, m_dot_nu = (numpy.asarray(a, dtype=float) for a in boundary)
		active = m_dot_nu > 0
		points, m_dot_nu = points[active], m_dot_nu[active]
		if points.size:
			assert g.c is not None
			nonzero = s[s != 0]
			grid_s = numpy.broadcast_to(nonzero, (len(points), nonzero.size))
			grid_x = numpy.broadcast_to(points[:, None, :], (len(points), nonzero.size, points.shape[-1]))
			grid_m = m_dot_nu[:, None]

			values = numpy.abs(g(grid_s, grid_x))
			magnitude = numpy.abs(grid_s)
			reference = numpy.where(
					magnitude <= 1,
					grid_m**(1 / g.p) * magnitude**(0.5 + 1 / g.p),
					grid_m * magnitude,
					)

			lower, upper = reference / g.c, reference * g.c
			violations += _first_failure(
					"position_lower", values < lower * (1 - 1e-12), grid_s, values, lower, grid_x
					)
			violations += _first_failure(
					"position_upper", values > upper * (1 + 1e-12), grid_s, values, upper, grid_x
					)

			decrease = -numpy.diff(g(grid_s, grid_x), axis=1)
			violations += _first_failure(
					"monotone",
					decrease > 1e-12 * numpy.maximum(1.0, values[:, 1:]),
					grid_s[:, 1:],
					decrease,
					numpy.zeros_like(decrease),
					grid_x[:, 1:],
					)

	for violation in violations:
		logger.debug("Feedback condition %r fails at s = %g", violation.condition, violation.s)

	return FeedbackReport(g.k_minus, g.k_plus, g.p, violations)


@dataclass
class WaveState:
	"""
	Two consecutive time levels of the leapfrog scheme.
	"""

	lattice: Lattice = field(repr=False)

	#: The current level.
	u: numpy.ndarray = field(repr=False)

	#: The previous level.
	u_prev: numpy.ndarray = field(repr=False)

	#: The time of :attr:`u`.
	t: float

	dt: float

	#: ``Σ F(s)·s`` over the boundary for the step which produced :attr:`u`.
	dissipation_rate: float = 0.0

	@property
	def h(self) -> float:
		return self.lattice.h

	@property
	def velocity(self) -> numpy.ndarray:
		"""
		The backward difference ``(u - u_prev) / dt``.
		"""

		return (self.u - self.u_prev) / self.dt

	def energy(self) -> float:
		"""
		The discrete energy between the two levels.
		"""

		return two_level_energy(self.lattice, self.u, self.u_prev, self.dt)


class WaveSolver:
	"""
	The leapfrog scheme on a snapped boundary.

	Interior nodes are explicit, Dirichlet nodes are pinned to zero and Neumann nodes solve
	the scalar equation ``s + c₁·g(s) = c₂`` for the centred velocity ``s`` at each step.

	:param boundary:
	:param feedback:
	:param dt: The time step. Defaults to ``0.4·h``.

	:raises AdmissibilityError: If ``dt`` exceeds ``0.4·h``.
	"""

	def __init__(self, boundary: SnappedBoundary, feedback: FeedbackLaw, dt: Optional[float] = None):
		self.lattice = boundary.lattice
		self.boundary = boundary
		self.feedback = feedback
		self.dt = CFL_FACTOR * self.lattice.h if dt is None else float(dt)

		if not 0 < self.dt <= CFL_FACTOR * self.lattice.h * (1 + 1e-12):
			raise AdmissibilityError(f"dt = {self.dt} violates dt <= {CFL_FACTOR}·h with h = {self.lattice.h}")

		self.neumann_nodes = numpy.flatnonzero(boundary.neumann)
		self.explicit = boundary.free & ~boundary.neumann

		if feedback.depends_on_position:
			arc = numpy.zeros(self.lattice.size)
			numpy.add.at(
					arc,
					numpy.array([pos.node for pos in boundary.neumann_positions], dtype=int),
					numpy.array([pos.ds for pos in boundary.neumann_positions]),
					)
			self.weights = arc[self.neumann_nodes]
		else:
			self.weights = boundary.beta[self.neumann_nodes]

		self._positions = self.lattice.points[self.neumann_nodes]
		self._mass = self.lattice.mass[self.neumann_nodes]

	def flux(self, s: numpy.ndarray) -> numpy.ndarray:
		"""
		The feedback force at the Neumann nodes for velocities ``s`` there.

		:param s:
		"""

		if self.feedback.depends_on_position:
			return self.weights * self.feedback(s, self._positions)
		return self.weights * self.feedback(s)

	def _solve_closure(self, c1: numpy.ndarray, c2: numpy.ndarray, t: float) -> numpy.ndarray:
		if self.feedback.kind is FeedbackKind.zero:
			return c2.copy()
		if self.feedback.kind is FeedbackKind.linear:
			return c2 / (1 + c1 * self.feedback.k_plus)

		def residual(s: numpy.ndarray) -> numpy.ndarray:
			return s + c1 * self.flux(s) / numpy.where(self.weights > 0, self.weights, 1.0) - c2

		lo = numpy.minimum(0.0, c2) - numpy.abs(c2)
		hi = numpy.maximum(0.0, c2) + numpy.abs(c2)
		f_lo, f_hi = residual(lo), residual(hi)
		tolerance = CLOSURE_TOLERANCE * (1 + numpy.abs(c2))

		bad = (f_lo > tolerance) | (f_hi < -tolerance)
		if numpy.any(bad):
			node = int(self.neumann_nodes[numpy.flatnonzero(bad)[0]])
			raise NumericalError(
					f"The boundary closure is not bracketed at node {self.lattice.unravel(node)}",
					time=t,
					index=self.lattice.unravel(node),
					)

		mid = (lo + hi) / 2
		for iteration in range(CLOSURE_ITERATIONS):
			mid = (lo + hi) / 2
			f_mid = residual(mid)
			if numpy.all(numpy.abs(f_mid) <= tolerance):
				logger.debug("Boundary closure converged after %d bisections", iteration + 1)
				return mid
			upper = f_mid > 0
			hi = numpy.where(upper, mid, hi)
			f_hi = numpy.where(upper, f_mid, f_hi)
			lo = numpy.where(upper, lo, mid)
			f_lo = numpy.where(upper, f_lo, f_mid)

		span = f_hi - f_lo
		safe = numpy.abs(span) > 0
		return numpy.where(safe, lo - f_lo * (hi - lo) / numpy.where(safe, span, 1.0), (lo + hi) / 2)

	def initial_state(self, u0: numpy.ndarray, u1: numpy.ndarray) -> WaveState:
		"""
		Build the starting levels from initial displacement and velocity.

		The level before ``t = 0`` comes from a second order Taylor expansion.

		:param u0:
		:param u1:

		:raises AdmissibilityError: If ``u0`` or ``u1`` does not vanish on the Dirichlet nodes.
		"""

		u0 = numpy.asarray(u0, dtype=float).ravel()
		u1 = numpy.asarray(u1, dtype=float).ravel()
		for name, values in (("u0", u0), ("u1", u1)):
			if values.shape != (self.lattice.size, ):
				raise AdmissibilityError(f"{name} has {values.size} values; the lattice has {self.lattice.size} nodes")
			pinned = numpy.abs(values[self.boundary.dirichlet])
			if pinned.size and pinned.max() > 1e-12:
				raise AdmissibilityError(f"{name} does not vanish on the Dirichlet nodes")

		acceleration = -(self.lattice.stiffness @ u0) / self.lattice.mass
		u_prev = u0 - self.dt * u1 + 0.5 * self.dt**2 * acceleration
		u_prev[self.boundary.dirichlet] = 0.0
		return WaveState(self.lattice, u0.copy(), u_prev, 0.0, self.dt)

	def step(self, state: WaveState) -> WaveState:
		"""
		Advance one time step.

		:param state:

		:raises NumericalError: If a non-finite value appears.
		"""

		dt = self.dt
		t_next = state.t + dt
		force = -(self.lattice.stiffness @ state.u)
		mass = self.lattice.mass

		u_next = numpy.zeros_like(state.u)
		explicit = self.explicit
		u_next[explicit] = (
				2 * state.u[explicit] - state.u_prev[explicit] + dt**2 * force[explicit] / mass[explicit]
				)

		dissipation = 0.0
		if self.neumann_nodes.size:
			nodes = self.neumann_nodes
			c1 = dt * self.weights / (2 * self._mass)
			c2 = (state.u[nodes] - state.u_prev[nodes]) / dt + dt * force[nodes] / (2 * self._mass)
			s = self._solve_closure(c1, c2, t_next)
			u_next[nodes] = state.u_prev[nodes] + 2 * dt * s
			dissipation = float(numpy.sum(self.flux(s) * s))

		if not numpy.all(numpy.isfinite(u_next)):
			node = int(numpy.flatnonzero(~numpy.isfinite(u_next))[0])
			position = self.lattice.unravel(node)
			raise NumericalError(f"Non-finite value at node {position} at t = {t_next}", time=t_next, index=position)

		return WaveState(self.lattice, u_next, state.u, t_next, dt, dissipation)


def step(
		state: WaveState,
		boundary: SnappedBoundary,
		g: FeedbackLaw,
		dt: Optional[float] = None,
		) -> WaveState:
	"""
	Advance ``state`` by one leapfrog step.

	:param state:
	:param boundary: The partition snapped to the lattice of ``state``.
	:param g:
	:param dt: Defaults to the time step of ``state``.
	"""

	return WaveSolver(boundary, g, state.dt if dt is None else dt).step(state)


def first_mode(lattice: Lattice, kx: int = 1, ky: int = 1) -> numpy.ndarray:
	"""
	The mode ``sin(kx·πx)·sin(ky·πy)``, which vanishes on the whole boundary.

	:param lattice:
	:param kx:
	:param ky:
	"""

	return mode(lattice, kx, ky)


@dataclass
class EnergyTrace:
	"""
	Energy and boundary dissipation rate sampled along a simulation.
	"""

	t: numpy.ndarray = field(repr=False)

	#: The discrete energy at each time.
	energy: numpy.ndarray = field(repr=False)

	#: The boundary dissipation rate ``∫ g(u′)u′ dσ_m`` at each time.
	dissipation: numpy.ndarray = field(repr=False)

	metadata: dict[str, Any] = field(default_factory=dict)

	def __post_init__(self) -> None:
		self.t = numpy.asarray(self.t, dtype=float)
		self.energy = numpy.asarray(self.energy, dtype=float)
		self.dissipation = numpy.asarray(self.dissipation, dtype=float)

		if not (self.t.shape == self.energy.shape == self.dissipation.shape):
			raise AdmissibilityError("Trace columns must have equal lengths")
		if numpy.any(numpy.diff(self.t) <= 0):
			raise AdmissibilityError("Trace times must be strictly increasing")
		if self.energy.size and self.energy.min() < -1e-12 * max(1.0, float(self.energy.max())):
			raise AdmissibilityError("Trace energies must be non-negative")

	def __len__(self) -> int:
		return int(self.t.size)

	@property
	def initial_energy(self) -> float:
		return float(self.energy[0]) if len(self) else 0.0

	def to_csv(self, filename: PathLike) -> None:
		"""
		Write the trace as CSV with columns ``t,E,dissipation_rate``.

		:param filename:
		"""

		write_csv(filename, ['t', 'E', "dissipation_rate"], zip(self.t, self.energy, self.dissipation))

	@classmethod
	def from_csv(cls, filename: PathLike, metadata: Optional[dict[str, Any]] = None) -> "EnergyTrace":
		"""
		Read a trace written by :meth:`to_csv`.

		A file without a ``dissipation_rate`` column gives a zero dissipation column.

		:param filename:
		:param metadata:
		"""

		columns = read_csv_columns(filename)
		t = columns['t']
		dissipation = columns.get("dissipation_rate", numpy.zeros_like(t))
		return cls(t, columns['E'], dissipation, dict(metadata or {}))


class SimulationResult(NamedTuple):
	"""
	The output of :func:`simulate`.
	"""

	trace: EnergyTrace

	#: The state at the final time.
	state: WaveState

	#: ``(t, u)`` pairs taken every ``snapshot_stride`` steps.
	snapshots: list[tuple[float, numpy.ndarray]]


def simulate(
		boundary: SnappedBoundary,
		g: FeedbackLaw,
		u0: numpy.ndarray,
		u1: numpy.ndarray,
		T: float,
		dt: Optional[float] = None,
		output_stride: int = 1,
		snapshot_stride: Optional[int] = None,
		metadata: Optional[Mapping[str, Any]] = None,
		) -> SimulationResult:
	"""
	Run the scheme from ``(u0, u1)`` up to time ``T``.

	The step is shrunk so that a whole number of steps reaches ``T``. Row ``k`` of the trace holds
	the energy between levels ``k-1`` and ``k`` and the dissipation rate of the step leaving level ``k``,
	so consecutive energies differ by exactly ``-dt`` times the summed rates.

	:param boundary:
	:param g:
	:param u0: Initial displacement, vanishing on Dirichlet nodes.
	:param u1: Initial velocity, vanishing on Dirichlet nodes.
	:param T: The final time.
	:param dt: Defaults to ``0.4·h``.
	:param output_stride: Record every this many steps. The final time is always recorded.
	:param snapshot_stride: Keep the displacement every this many steps.
	:param metadata: Extra entries for the trace metadata.

	:raises NumericalError: With the time of failure if the scheme breaks down.
	"""

	if not T > 0:
		raise AdmissibilityError(f"The final time must be positive, not {T}")
	if output_stride < 1:
		raise AdmissibilityError(f"output_stride must be at least 1, not {output_stride}")

	lattice = boundary.lattice
	requested = CFL_FACTOR * lattice.h if dt is None else float(dt)
	steps = max(1, math.ceil(T / requested - 1e-9))
	solver = WaveSolver(boundary, g, T / steps)

	state = solver.initial_state(u0, u1)
	times, energies, rates = [], [], []
	snapshots: list[tuple[float, numpy.ndarray]] = []

	for k in range(steps + 1):
		energy = state.energy()
		following = solver.step(state)
		if k % output_stride == 0 or k == steps:
			times.append(k * solver.dt)
			energies.append(energy)
			rates.append(following.dissipation_rate)
		if snapshot_stride and (k % snapshot_stride == 0 or k == steps):
			snapshots.append((k * solver.dt, state.u.copy()))
		if k < steps:
			state = following

	state.t = T
	logger.info(
			"Simulated %d steps of dt = %g to T = %g; E(0) = %g, E(T) = %g",
			steps,
			solver.dt,
			T,
			energies[0],
			energies[-1],
			)

	trace_metadata = {
			'h': lattice.h,
			"dt": solver.dt,
			"steps": steps,
			"output_stride": output_stride,
			"feedback": g.to_spec(),
			**dict(metadata or {}),
			}
	return SimulationResult(EnergyTrace(times, energies, rates, trace_metadata), state, snapshots)


def dissipation_check(trace: EnergyTrace) -> float:
	"""
	Compare the energy lost over each output interval with the time integral of the dissipation rate.

	:param trace:

	:returns: The largest ``(ΔE + dissipated) / E(0)`` over the intervals, or zero for a zero trace.
	"""

	if len(trace) < 2 or trace.initial_energy <= 0:
		return 0.0

	gaps = numpy.diff(trace.t)
	dissipated = gaps * (trace.dissipation[:-1] + trace.dissipation[1:]) / 2
	return float(numpy.max((numpy.diff(trace.energy) + dissipated) / trace.initial_energy))
