#!/usr/bin/env python3
#
#  decay.py
"""
Decay rate fits, the integral decay lemma, and the constants behind the stabilisation speed.
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
import scipy.integrate
import scipy.optimize
import scipy.sparse
import scipy.sparse.linalg

# this package
from multiplier_lab.enums import FitModel, Verdict
from multiplier_lab.errors import AdmissibilityError, NumericalError
from multiplier_lab.lattice import Lattice, SnappedBoundary
from multiplier_lab.wavesim import EnergyTrace

__all__ = [
		"ConstantsReport",
		"DecayFit",
		"KomornikReport",
		"SpeedReport",
		"conclusion_envelope",
		"estimate_constants",
		"fit_exponential",
		"fit_power",
		"komornik_alpha",
		"komornik_verify",
		"speed_bound",
		"theoretical_exponent"
		]

logger = logging.getLogger(__name__)

#: Fits stop at the first energy below this fraction of the initial energy.
ENERGY_FLOOR = 1e-14

#: The fewest samples a fit accepts.
MIN_FIT_SAMPLES = 10

#: Relative margin by which a power fit must beat the predicted exponent to count as consistent.
POWER_MARGIN = 0.3

#: Relative eigenvalue tolerance of the power iterations.
EIGEN_TOLERANCE = 1e-8

#: Iteration cap of the power iterations.
EIGEN_MAX_ITERATIONS = 10_000


class DecayFit(NamedTuple):
	"""
	A straight line fitted to an energy trace in log or log-log coordinates.
	"""

	model: FitModel

	#: The time window the fit used.
	window: tuple[float, float]

	#: The decay rate (exponential) or the exponent (power) of the fitted line.
	rate: float

	#: The largest absolute residual of the fit, in log coordinates.
	goodness: float

	verdict: Verdict

	#: The number of samples used.
	samples: int

	#: The predicted exponent, for power fits with a known feedback exponent.
	theoretical: Optional[float] = None

	def as_dict(self) -> dict[str, object]:
		"""
		Return the JSON fit report.
		"""

		return {
				"model": self.model.value,
				"window": list(self.window),
				"rate_or_exponent": self.rate,
				"goodness": self.goodness,
				"verdict": self.verdict.value,
				"samples": self.samples,
				"theoretical": self.theoretical,
				}


def theoretical_exponent(p: float) -> float:
	"""
	The predicted energy decay exponent ``−2/(p−1)`` for feedback growing like ``|s|^p`` near zero.

	:param p: The feedback exponent, greater than 1.
	"""

	if not p > 1:
		raise AdmissibilityError(f"The decay exponent is defined for p > 1, not {p}")
	return -2 / (p - 1)


def komornik_alpha(p: float) -> float:
	"""
	The exponent ``α = (p−1)/2`` of the integral lemma for feedback exponent ``p``.

	:param p:
	"""

	if not p >= 1:
		raise AdmissibilityError(f"The feedback exponent must be at least 1, not {p}")
	return (p - 1) / 2


def _window(trace: EnergyTrace, window: Optional[Sequence[float]], positive_time: bool) -> tuple[numpy.ndarray, numpy.ndarray]:
	t, energy = trace.t, trace.energy
	start, stop = (float(t[0]), float(t[-1])) if window is None else (float(window[0]), float(window[1]))
	if positive_time and start <= 0:
		start = float(numpy.min(t[t > 0])) if numpy.any(t > 0) else math.inf

	selected = (t >= start) & (t <= stop)
	t, energy = t[selected], energy[selected]

	floor = ENERGY_FLOOR * trace.initial_energy
	below = numpy.flatnonzero(energy <= floor)
	if below.size:
		t, energy = t[:below[0]], energy[:below[0]]

	if t.size < MIN_FIT_SAMPLES:
		raise AdmissibilityError(
				f"The fit window holds {t.size} usable samples; at least {MIN_FIT_SAMPLES} are needed"
				)

	return t, energy


def fit_exponential(trace: EnergyTrace, window: Optional[Sequence[float]] = None) -> DecayFit:
	"""
	Fit ``log E`` against ``t``.

	The fit is consistent with exponential decay when ``E(0)·exp(1 − rate·t)`` bounds the trace on the window.

	:param trace:
	:param window: ``(t1, t2)``. Defaults to the whole trace.

	:raises AdmissibilityError: If fewer than ten positive samples lie in the window.
	"""

	t, energy = _window(trace, window, positive_time=False)
	slope, intercept = numpy.polyfit(t, numpy.log(energy), 1)
	goodness = float(numpy.max(numpy.abs(numpy.log(energy) - (slope * t + intercept))))
	rate = float(-slope)

	if rate <= 1e-12:
		verdict = Verdict.not_decaying
	else:
		envelope = trace.initial_energy * numpy.exp(1 - rate * t)
		verdict = Verdict.consistent if numpy.all(energy <= envelope * (1 + 1e-12)) else Verdict.inconsistent

	logger.debug("Exponential fit on [%g, %g]: rate %g", t[0], t[-1], rate)
	return DecayFit(FitModel.exponential, (float(t[0]), float(t[-1])), rate, goodness, verdict, int(t.size))


def fit_power(trace: EnergyTrace, window: Optional[Sequence[float]] = None, p: Optional[float] = None) -> DecayFit:
	"""
	Fit ``log E`` against ``log t``.

	With a feedback exponent ``p`` the fitted exponent is compared with :func:`theoretical_exponent`.

	:param trace:
	:param window: ``(t1, t2)`` with ``t1 > 0``. Defaults to the positive times of the trace.
	:param p:

	:raises AdmissibilityError: If fewer than ten positive samples lie in the window.
	"""

	if window is not None and window[0] <= 0:
		raise AdmissibilityError("A power fit needs a window starting after t = 0")

	t, energy = _window(trace, window, positive_time=True)
	slope, intercept = numpy.polyfit(numpy.log(t), numpy.log(energy), 1)
	goodness = float(numpy.max(numpy.abs(numpy.log(energy) - (slope * numpy.log(t) + intercept))))
	exponent = float(slope)
	theoretical = None if p is None else theoretical_exponent(p)

	if exponent >= -1e-12:
		verdict = Verdict.not_decaying
	elif theoretical is None or exponent <= theoretical * (1 - POWER_MARGIN):
		verdict = Verdict.consistent
	else:
		verdict = Verdict.inconsistent

	return DecayFit(
			FitModel.power,
			(float(t[0]), float(t[-1])),
			exponent,
			goodness,
			verdict,
			int(t.size),
			theoretical,
			)


def conclusion_envelope(E0: float, T: float, alpha: float, t: numpy.ndarray) -> numpy.ndarray:
	"""
	The bound the integral lemma concludes for ``t ≥ T``.

	``E0·exp(1 − t/T)`` for ``α = 0``, otherwise ``E0·((T + αT)/(T + αt))^{1/α}``.

	:param E0:
	:param T:
	:param alpha:
	:param t:
	"""

	t = numpy.asarray(t, dtype=float)
	if T <= 0:
		return numpy.zeros_like(t)
	if alpha == 0:
		return E0 * numpy.exp(1 - t / T)
	return E0 * ((T + alpha * T) / (T + alpha * t))**(1 / alpha)


class KomornikReport(NamedTuple):
	"""
	The result of :func:`komornik_verify`.
	"""

	#: The smallest constant with ``∫_t^∞ E^{α+1} ≤ C·E(t)`` on the grid.
	C_best: float

	#: ``C_best·E(0)^α``.
	T: float

	alpha: float

	#: The time at which the supremum is attained.
	t_sup: float

	#: Whether a tail estimate beyond the last sample was added.
	tail_corrected: bool

	#: Whether the concluded bound holds on ``t ≥ T``.
	conclusion_holds: bool

	#: The largest ratio of the trace to the concluded bound on ``t ≥ T``.
	worst_ratio: float


def komornik_verify(
		t: numpy.ndarray,
		E: numpy.ndarray,
		alpha: float,
		slack: float = 0.02,
		) -> KomornikReport:
	"""
	Find the best constant in the integral hypothesis of the decay lemma and test its conclusion.

	The tail beyond the last sample is estimated from an exponential fitted to the last tenth of the trace.

	:param t: Increasing sample times.
	:param E: A non-negative, non-increasing energy.
	:param alpha: The exponent ``α ≥ 0``.
	:param slack: Relative slack allowed on the concluded bound.

	:raises AdmissibilityError: If ``E`` increases or ``alpha`` is negative.
	"""

	t = numpy.asarray(t, dtype=float)
	E = numpy.asarray(E, dtype=float)
	if alpha < 0:
		raise AdmissibilityError(f"alpha must be non-negative, not {alpha}")
	if t.shape != E.shape or t.size < 2:
		raise AdmissibilityError("Need at least two samples of matching times and energies")

	E0 = float(E[0])
	increase = numpy.diff(E)
	bad = numpy.flatnonzero(increase > 1e-12 * max(E0, 0.0))
	if bad.size:
		raise AdmissibilityError(
				f"The energy increases at t = {t[bad[0] + 1]}", witness=numpy.array([t[bad[0] + 1], E[bad[0] + 1]])
				)

	if E0 <= 0:
		return KomornikReport(0.0, 0.0, alpha, float(t[0]), False, True, 0.0)

	power = numpy.maximum(E, 0.0)**(alpha + 1)
	cumulative = scipy.integrate.cumulative_trapezoid(power, t, initial=0)
	tail = cumulative[-1] - cumulative

	tail_corrected = False
	if E[-1] > 0:
		count = max(2, t.size // 10)
		slope, _ = numpy.polyfit(t[-count:], numpy.log(numpy.maximum(E[-count:], 1e-300)), 1)
		rate = -float(slope)
		if rate <= 0:
			raise AdmissibilityError("The energy does not decay at the end of the trace; the tail is not integrable")
		tail = tail + E[-1]**(alpha + 1) / ((alpha + 1) * rate)
		tail_corrected = True
		warnings.warn(f"Tail beyond t = {t[-1]} estimated with decay rate {rate:.4g}", stacklevel=2)

	positive = E > 0
	ratios = numpy.where(positive, tail / numpy.where(positive, E, 1.0), 0.0)
	index = int(numpy.argmax(ratios))
	C_best = float(ratios[index])
	T = C_best * E0**alpha

	after = t >= T
	envelope = conclusion_envelope(E0, T, alpha, t[after])
	if numpy.any(after) and T > 0:
		worst = float(numpy.max(E[after] / envelope))
	else:
		worst = 0.0

	logger.info("Integral lemma: C = %g, T = %g, worst ratio %g", C_best, T, worst)
	return KomornikReport(C_best, T, alpha, float(t[index]), tail_corrected, worst <= 1 + slack, worst)


class ConstantsReport(NamedTuple):
	"""
	The Poincaré and trace constants of a lattice and boundary.
	"""

	#: The Poincaré constant ``C_P`` with ``‖u‖² ≤ C_P‖∇u‖²`` on functions vanishing on the Dirichlet part.
	C_P: float

	#: The squared norm of the trace map from ``H¹`` to the boundary.
	C_Tr: float

	h: float
	iterations_P: int
	iterations_Tr: int


def _power_iterate(
		apply: Callable[[numpy.ndarray], numpy.ndarray],
		rayleigh: Callable[[numpy.ndarray], float],
		start: numpy.ndarray,
		name: str,
		) -> tuple[float, int]:
	x = start / numpy.linalg.norm(start)
	previous = math.inf
	for iteration in range(1, EIGEN_MAX_ITERATIONS + 1):
		x = apply(x)
		x /= numpy.linalg.norm(x)
		value = rayleigh(x)
		logger.debug("%s iteration %d: %.12g", name, iteration, value)
		if abs(value - previous) <= EIGEN_TOLERANCE * abs(value):
			return value, iteration
		previous = value

	raise NumericalError(f"{name} did not converge in {EIGEN_MAX_ITERATIONS} iterations", index=EIGEN_MAX_ITERATIONS)


def estimate_constants(lattice: Lattice, boundary: SnappedBoundary) -> ConstantsReport:
	"""
	Estimate the Poincaré constant of the Dirichlet part and the trace constant of the lattice.

	``C_P`` is the reciprocal of the smallest eigenvalue of the stiffness matrix with Dirichlet rows removed,
	found by inverse iteration. ``C_Tr`` is the largest ratio of the boundary integral of ``u²`` to
	the full ``H¹`` norm, found by power iteration. It does not depend on the partition.

	:param lattice:
	:param boundary:

	:raises AdmissibilityError: If there are no Dirichlet nodes.
	:raises NumericalError: If an iteration does not converge.
	"""

	if not numpy.any(boundary.dirichlet):
		raise AdmissibilityError("The Poincaré constant needs a nonempty Dirichlet part")

	free = boundary.free
	stiffness = lattice.stiffness
	mass = lattice.mass
	free_stiffness = scipy.sparse.csc_matrix(stiffness[free][:, free])
	free_mass = mass[free]
	lu = scipy.sparse.linalg.splu(free_stiffness)

	mu, iterations_P = _power_iterate(
			lambda x: lu.solve(free_mass * x),
			lambda x: float(x @ (free_stiffness @ x)) / float(numpy.sum(free_mass * x**2)),
			numpy.ones(int(numpy.count_nonzero(free))),
			"Poincaré inverse iteration",
			)

	arc = numpy.zeros(lattice.size)
	for position in lattice.boundary_positions:
		arc[position.node] += position.ds

	full = scipy.sparse.csc_matrix(stiffness + scipy.sparse.diags(mass))
	full_lu = scipy.sparse.linalg.splu(full)
	trace_constant, iterations_Tr = _power_iterate(
			lambda x: full_lu.solve(arc * x),
			lambda x: float(numpy.sum(arc * x**2)) / float(x @ (full @ x)),
			numpy.ones(lattice.size),
			"Trace power iteration",
			)

	logger.info("Estimated C_P = %g and C_Tr = %g at h = %g", 1 / mu, trace_constant, lattice.h)
	return ConstantsReport(1 / mu, trace_constant, lattice.h, iterations_P, iterations_Tr)


class SpeedReport(NamedTuple):
	"""
	The stabilisation speed ``θ(λ)`` on a grid and its maximiser.
	"""

	lambdas: numpy.ndarray
	theta: numpy.ndarray

	#: The maximising ``λ``, refined between grid points.
	lambda_star: float

	theta_star: float

	#: The bracket ``(lower, upper)`` as originally stated, with the lower end capped at ``upper``.
	bracket: tuple[float, float]

	#: The bracket with a lower end valid for every cubic coefficient.
	corrected_bracket: tuple[float, float]

	in_bracket: bool
	in_corrected_bracket: bool

	def rows(self) -> list[tuple[float, float]]:
		"""
		Rows ``lambda, theta`` for CSV output.
		"""

		return list(zip(self.lambdas.tolist(), self.theta.tolist()))


def speed_bound(
		c_m: float,
		a0: float,
		k_minus: float,
		k_plus: float,
		C_P: float,
		C_Tr: float,
		lambdas: Optional[Sequence[float]] = None,
		) -> SpeedReport:
	"""
	Evaluate ``θ(λ) = c(m)/(k−/λ + k+λ + Kλ²)`` with ``K = k+·a0²(1 + C_P)·C_Tr/4``.

	:param c_m: The cone constant of the multiplier.
	:param a0: The zeroth-order weight of the multiplier, from :func:`~multiplier_lab.fields.cone_check`.
	:param k_minus:
	:param k_plus:
	:param C_P:
	:param C_Tr:
	:param lambdas: An increasing positive grid. Defaults to 601 points from ``1e-3`` to ``1e3``.
	"""

	if not (c_m > 0 and k_minus > 0 and k_plus > 0 and a0 >= 0 and C_P >= 0 and C_Tr >= 0):
		raise AdmissibilityError("speed_bound needs c_m, k_minus, k_plus > 0 and a0, C_P, C_Tr >= 0")

	grid = numpy.logspace(-3, 3, 601) if lambdas is None else numpy.asarray(lambdas, dtype=float)
	if numpy.any(grid <= 0) or numpy.any(numpy.diff(grid) <= 0):
		raise AdmissibilityError("The λ grid must be positive and increasing")

	cubic = k_plus * a0**2 * (1 + C_P) * C_Tr / 4

	def denominator(lam: numpy.ndarray) -> numpy.ndarray:
		return k_minus / lam + k_plus * lam + cubic * lam**2

	def slope(lam: float) -> float:
		return -k_minus / lam**2 + k_plus + 2 * cubic * lam

	theta = c_m / denominator(grid)

	upper = math.sqrt(k_minus / k_plus)
	if slope(upper) <= 0:
		lambda_star = upper
	else:
		lower_probe = upper
		while slope(lower_probe) >= 0:
			lower_probe /= 2
		lambda_star = float(scipy.optimize.brentq(slope, lower_probe, upper, xtol=1e-14, rtol=1e-14))
	theta_star = float(c_m / denominator(numpy.array(lambda_star)))

	if cubic > 0:
		stated_lower = min((k_minus / (4 * cubic))**(1 / 3), k_plus / (2 * cubic))
		corrected_lower = min(stated_lower, math.sqrt(k_minus / (2 * k_plus)))
	else:
		stated_lower = math.inf
		corrected_lower = math.sqrt(k_minus / (2 * k_plus))

	# the stated lower end is unbounded without the cubic term, and can pass the upper end with it
	stated_lower = min(stated_lower, upper)
	corrected_lower = min(corrected_lower, upper)

	def inside(lo: float, hi: float) -> bool:
		return lo * (1 - 1e-9) <= lambda_star <= hi * (1 + 1e-9)

	return SpeedReport(
			lambdas=grid,
			theta=theta,
			lambda_star=lambda_star,
			theta_star=theta_star,
			bracket=(stated_lower, upper),
			corrected_bracket=(corrected_lower, upper),
			in_bracket=inside(stated_lower, upper),
			in_corrected_bracket=inside(corrected_lower, upper),
			)
