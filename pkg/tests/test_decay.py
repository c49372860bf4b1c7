# stdlib
import math

# 3rd party
import numpy
import pytest

# this package
from multiplier_lab.decay import (
		conclusion_envelope,
		estimate_constants,
		fit_exponential,
		fit_power,
		komornik_alpha,
		komornik_verify,
		speed_bound,
		theoretical_exponent
		)
from multiplier_lab.enums import FitModel, Verdict
from multiplier_lab.errors import AdmissibilityError
from multiplier_lab.fields import make_affine
from multiplier_lab.geometry import partition, unit_square
from multiplier_lab.lattice import Lattice, SnappedBoundary, mode, snap_partition
from multiplier_lab.wavesim import EnergyTrace, make_feedback, simulate


def make_trace(t, energy) -> EnergyTrace:
	t = numpy.asarray(t, dtype=float)
	return EnergyTrace(t, energy, numpy.zeros_like(t))


@pytest.mark.parametrize("p, expected", [(3, -1.0), (2, -2.0), (5, -0.5)])
def test_theoretical_exponent(p: float, expected: float):
	assert theoretical_exponent(p) == expected


def test_theoretical_exponent_rejects():
	with pytest.raises(AdmissibilityError, match="p > 1"):
		theoretical_exponent(1)


@pytest.mark.parametrize("p, expected", [(1, 0.0), (3, 1.0), (2, 0.5)])
def test_komornik_alpha(p: float, expected: float):
	assert komornik_alpha(p) == expected


def test_komornik_alpha_rejects():
	with pytest.raises(AdmissibilityError, match="at least 1"):
		komornik_alpha(0.5)


class TestFitExponential:

	def test_exact(self):
		t = numpy.linspace(0, 5, 51)
		fit = fit_exponential(make_trace(t, 3 * numpy.exp(-2 * t)))
		assert fit.model is FitModel.exponential
		assert fit.rate == pytest.approx(2.0)
		assert fit.goodness == pytest.approx(0, abs=1e-10)
		assert fit.verdict is Verdict.consistent
		assert fit.samples == 51
		assert fit.window == (0.0, 5.0)

	def test_window(self):
		t = numpy.linspace(0, 5, 51)
		fit = fit_exponential(make_trace(t, numpy.exp(-t)), window=(0.95, 3.05))
		assert fit.samples == 21
		assert fit.window == pytest.approx((1.0, 3.0))

	def test_not_decaying(self):
		t = numpy.linspace(0, 1, 20)
		assert fit_exponential(make_trace(t, numpy.ones_like(t))).verdict is Verdict.not_decaying

	def test_inconsistent(self):
		# log E = -t² is concave, so the fitted line overtakes it early on
		t = numpy.linspace(0, 3, 31)
		assert fit_exponential(make_trace(t, numpy.exp(-t**2))).verdict is Verdict.inconsistent

	def test_energy_floor(self):
		t = numpy.linspace(0, 1, 30)
		energy = numpy.exp(-t)
		energy[20:] = 0
		fit = fit_exponential(make_trace(t, energy))
		assert fit.samples == 20
		assert fit.rate == pytest.approx(1.0)

	def test_too_few_samples(self):
		t = numpy.linspace(0, 1, 9)
		with pytest.raises(AdmissibilityError, match="at least 10"):
			fit_exponential(make_trace(t, numpy.exp(-t)))

	def test_as_dict(self):
		t = numpy.linspace(0, 5, 51)
		report = fit_exponential(make_trace(t, numpy.exp(-t))).as_dict()
		assert report["model"] == "exponential"
		assert report["verdict"] == "consistent"
		assert report["rate_or_exponent"] == pytest.approx(1.0)
		assert report["theoretical"] is None


class TestFitPower:

	@pytest.fixture()
	def trace(self) -> EnergyTrace:
		t = numpy.concatenate([[0.0], numpy.logspace(0, 2, 30)])
		energy = numpy.concatenate([[1.0], 1 / t[1:]])
		return make_trace(t, energy)

	def test_exponent(self, trace: EnergyTrace):
		fit = fit_power(trace)
		assert fit.model is FitModel.power
		assert fit.rate == pytest.approx(-1.0)
		assert fit.samples == 30
		assert fit.window[0] == 1.0
		assert fit.theoretical is None
		assert fit.verdict is Verdict.consistent

	@pytest.mark.parametrize(
			"p, verdict",
			[
					pytest.param(3, Verdict.consistent, id="predicted_rate"),
					pytest.param(5, Verdict.consistent, id="faster_than_predicted"),
					pytest.param(2, Verdict.inconsistent, id="slower_than_predicted"),
					]
			)
	def test_against_prediction(self, trace: EnergyTrace, p: float, verdict: Verdict):
		fit = fit_power(trace, p=p)
		assert fit.theoretical == theoretical_exponent(p)
		assert fit.verdict is verdict

	def test_window_from_zero(self, trace: EnergyTrace):
		with pytest.raises(AdmissibilityError, match="after t = 0"):
			fit_power(trace, window=(0.0, 10.0))


def test_conclusion_envelope():
	t = numpy.array([2.0, 4.0])
	numpy.testing.assert_allclose(conclusion_envelope(3.0, 2.0, 0.0, t), [3.0, 3.0 * math.exp(-1)])
	numpy.testing.assert_allclose(conclusion_envelope(3.0, 2.0, 1.0, t), [3.0, 2.0])
	numpy.testing.assert_array_equal(conclusion_envelope(3.0, 0.0, 1.0, t), 0)


class TestKomornik:

	@pytest.mark.parametrize("C", [0.5, 1.0, 3.0])
	def test_exponential(self, C: float):
		t = numpy.linspace(0, 20 * C, 4001)
		with pytest.warns(UserWarning, match="Tail beyond"):
			report = komornik_verify(t, numpy.exp(-t / C), alpha=0)

		assert report.C_best == pytest.approx(C, rel=1e-3)
		assert report.T == pytest.approx(C, rel=1e-3)
		assert report.tail_corrected
		assert report.conclusion_holds
		assert report.worst_ratio <= 1

	def test_power_decay(self):
		t = numpy.expm1(numpy.linspace(0, math.log(1001), 4001))
		with pytest.warns(UserWarning, match="Tail beyond"):
			report = komornik_verify(t, 2 * (1 + t)**-2, alpha=1)

		# ∫_t^∞ E² = 4(1+t)^-3/3 against E = 2(1+t)^-2, largest at t = 0
		assert report.C_best == pytest.approx(2 / 3, rel=1e-4)
		assert report.T == pytest.approx(4 / 3, rel=1e-4)
		assert report.t_sup == 0
		assert report.conclusion_holds

	def test_energy_reaching_zero(self):
		t = numpy.linspace(0, 2, 201)
		report = komornik_verify(t, numpy.maximum(1 - t, 0), alpha=0)
		assert not report.tail_corrected
		assert report.C_best == pytest.approx(0.5)
		assert report.t_sup == 0
		assert report.conclusion_holds

	def test_zero_energy(self):
		report = komornik_verify([0, 1], [0, 0], alpha=1)
		assert report.C_best == 0
		assert report.conclusion_holds

	def test_rejects_increase(self):
		with pytest.raises(AdmissibilityError, match="increases at t = 2") as exc_info:
			komornik_verify([0, 1, 2], [1.0, 0.5, 0.6], alpha=0)
		numpy.testing.assert_allclose(exc_info.value.witness, [2.0, 0.6])

	def test_rejects(self):
		with pytest.raises(AdmissibilityError, match="non-negative"):
			komornik_verify([0, 1], [1, 0.5], alpha=-1)
		with pytest.raises(AdmissibilityError, match="at least two samples"):
			komornik_verify([0], [1], alpha=0)
		with pytest.raises(AdmissibilityError, match="does not decay"):
			komornik_verify([0, 1, 2, 3], [1.0, 0.5, 0.5, 0.5], alpha=0)


class TestConstants:

	def test_dirichlet_square(self, lattice: Lattice):
		report = estimate_constants(lattice, SnappedBoundary.all_dirichlet(lattice))
		assert report.C_P == pytest.approx(1 / (2 * math.pi**2), rel=2e-2)
		assert report.C_Tr > 0
		assert report.h == lattice.h
		assert report.iterations_P >= 1

	@pytest.mark.slow()
	def test_fine_lattice(self):
		lattice = Lattice(64)
		report = estimate_constants(lattice, SnappedBoundary.all_dirichlet(lattice))
		assert report.C_P == pytest.approx(1 / (2 * math.pi**2), rel=2e-2)

	def test_mixed_boundary(self, lattice: Lattice, radial_boundary: SnappedBoundary):
		dirichlet = estimate_constants(lattice, SnappedBoundary.all_dirichlet(lattice))
		mixed = estimate_constants(lattice, radial_boundary)

		# fewer pinned nodes give a larger Poincaré constant
		assert mixed.C_P > dirichlet.C_P
		assert mixed.C_Tr == pytest.approx(dirichlet.C_Tr, rel=1e-6)

	def test_needs_dirichlet_part(self, lattice: Lattice, square):
		field = make_affine(numpy.eye(2), x0=[0.5, 0.5])
		boundary = snap_partition(lattice, partition(field, square), field)
		with pytest.raises(AdmissibilityError, match="nonempty Dirichlet part"):
			estimate_constants(lattice, boundary)


class TestSpeedBound:

	@pytest.mark.parametrize(
			"k_minus, k_plus, lambda_star",
			[(1.0, 1.0, 1.0), (4.0, 1.0, 2.0), (1.0, 4.0, 0.5)],
			)
	def test_without_cubic_term(self, k_minus: float, k_plus: float, lambda_star: float):
		report = speed_bound(1.0, 0.0, k_minus, k_plus, 0.5, 1.0)
		assert report.lambda_star == pytest.approx(lambda_star)
		assert report.theta_star == pytest.approx(1 / (2 * math.sqrt(k_minus * k_plus)))
		assert report.in_corrected_bracket
		assert report.bracket == pytest.approx((lambda_star, lambda_star))
		assert report.in_bracket
		assert report.theta.max() <= report.theta_star * (1 + 1e-12)
		assert len(report.rows()) == 601

	def test_with_cubic_term(self):
		# K = k+·a0²(1 + C_P)·C_Tr/4 = 2
		report = speed_bound(1.0, 2.0, 1.0, 1.0, 1.0, 1.0)
		lam = report.lambda_star
		assert 4 * lam**3 + lam**2 - 1 == pytest.approx(0, abs=1e-10)
		assert lam == pytest.approx(0.5567, abs=1e-3)
		assert report.bracket == pytest.approx((0.25, 1.0))
		assert report.in_bracket
		assert report.in_corrected_bracket
		assert report.theta.max() <= report.theta_star * (1 + 1e-12)

	def test_small_cubic_term(self):
		# K = 0.01 puts the stated lower end above the maximiser
		report = speed_bound(1.0, 0.2, 1.0, 1.0, 0.0, 1.0)
		assert report.bracket == pytest.approx((1.0, 1.0))
		assert report.bracket[0] > report.lambda_star
		assert not report.in_bracket
		assert report.corrected_bracket[0] == pytest.approx(math.sqrt(0.5))
		assert report.in_corrected_bracket

	def test_custom_grid(self):
		report = speed_bound(2.0, 0.0, 1.0, 1.0, 0.0, 0.0, lambdas=[0.5, 1.0, 2.0])
		numpy.testing.assert_allclose(report.theta, [0.8, 1.0, 0.8])
		assert report.rows() == [(0.5, 0.8), (1.0, 1.0), (2.0, 0.8)]

	@pytest.mark.parametrize(
			"kwargs",
			[
					pytest.param({"c_m": 0.0}, id="c_m"),
					pytest.param({"k_minus": 0.0}, id="k_minus"),
					pytest.param({"a0": -1.0}, id="a0"),
					pytest.param({"C_Tr": -1.0}, id="C_Tr"),
					]
			)
	def test_rejects_constants(self, kwargs):
		arguments = {"c_m": 1.0, "a0": 0.0, "k_minus": 1.0, "k_plus": 1.0, "C_P": 0.0, "C_Tr": 0.0, **kwargs}
		with pytest.raises(AdmissibilityError, match="speed_bound needs"):
			speed_bound(**arguments)

	@pytest.mark.parametrize("lambdas", [[1.0, 0.5], [0.0, 1.0], [-1.0, 1.0]])
	def test_rejects_grid(self, lambdas):
		with pytest.raises(AdmissibilityError, match="positive and increasing"):
			speed_bound(1.0, 0.0, 1.0, 1.0, 0.0, 0.0, lambdas=lambdas)

	def test_random_parameters(self):
		rng = numpy.random.default_rng(0)
		misses = 0

		for _ in range(20):
			report = speed_bound(
					c_m=rng.uniform(0.5, 2.0),
					a0=rng.uniform(0.0, 2.0),
					k_minus=rng.uniform(0.2, 5.0),
					k_plus=rng.uniform(0.2, 5.0),
					C_P=rng.uniform(0.01, 1.0),
					C_Tr=rng.uniform(0.1, 3.0),
					)
			assert report.in_corrected_bracket
			assert report.lambda_star <= report.bracket[1] * (1 + 1e-9)
			assert report.theta.max() <= report.theta_star * (1 + 1e-12)

			if not report.in_bracket:
				# the stated bracket only ever fails at its lower end
				assert report.lambda_star < report.bracket[0]
				misses += 1

		assert misses < 20


def radial_boundary_on(lattice: Lattice) -> SnappedBoundary:
	field = make_affine(numpy.eye(2), x0=[-1.0, -1.0])
	return snap_partition(lattice, partition(field, unit_square()), field)


@pytest.mark.slow()
def test_constants_across_meshes():
	reports = [estimate_constants(Lattice(n), SnappedBoundary.all_dirichlet(Lattice(n))) for n in (16, 32, 64)]
	mixed = [estimate_constants(Lattice(n), radial_boundary_on(Lattice(n))) for n in (16, 32, 64)]

	for report in reports:
		assert report.C_P == pytest.approx(1 / (2 * math.pi**2), rel=2e-2)
		assert report.C_Tr == pytest.approx(reports[-1].C_Tr, rel=0.1)

	# Dirichlet on the left and bottom edges, Neumann on the others
	for report in mixed:
		assert report.C_P == pytest.approx(2 / math.pi**2, rel=3e-2)

	assert [report.h for report in reports] == [1 / 16, 1 / 32, 1 / 64]


@pytest.mark.slow()
def test_komornik_on_linear_feedback():
	lattice = Lattice(32)
	result = simulate(
			radial_boundary_on(lattice),
			make_feedback({"kind": "linear", "alpha": 1.0}),
			mode(lattice, 1, 1),
			numpy.zeros(lattice.size),
			20.0,
			)
	trace = result.trace
	report = komornik_verify(trace.t, trace.energy, alpha=komornik_alpha(1))

	assert trace.energy[-1] < trace.energy[0]
	assert 0 < report.C_best < 20
	assert report.T == pytest.approx(report.C_best)
	assert report.conclusion_holds


@pytest.mark.slow()
def test_cubic_feedback_decay_exponent():
	lattice = Lattice(64)
	result = simulate(
			radial_boundary_on(lattice),
			make_feedback({"kind": "power", 'p': 3}),
			mode(lattice, 1, 1),
			numpy.zeros(lattice.size),
			400.0,
			output_stride=10,
			)

	for start in (40.0, 100.0, 200.0):
		fit = fit_power(result.trace, window=(start, 400.0), p=3)
		assert -1.3 <= fit.rate <= -0.7
		assert fit.theoretical == -1.0
