# stdlib
import math

# 3rd party
import numpy
import pytest
from domdf_python_tools.paths import PathPlus

# this package
from multiplier_lab.enums import FeedbackKind
from multiplier_lab.errors import AdmissibilityError, NumericalError
from multiplier_lab.lattice import Lattice, SnappedBoundary, mode
from multiplier_lab.wavesim import (
		CFL_FACTOR,
		EnergyTrace,
		WaveSolver,
		dissipation_check,
		first_mode,
		make_custom_feedback,
		make_feedback,
		simulate,
		step,
		validate_feedback
		)


class TestFeedback:

	def test_linear(self):
		g = make_feedback({"kind": "linear", "alpha": 2.5})
		assert g.kind is FeedbackKind.linear
		assert (g.k_minus, g.k_plus, g.p) == (2.5, 2.5, 1.0)
		numpy.testing.assert_allclose(g([-1.0, 0.0, 2.0]), [-2.5, 0.0, 5.0])
		assert g.to_spec() == {"kind": "linear", "alpha": 2.5}

	def test_power(self):
		g = make_feedback({"kind": "power", 'p': 2})
		numpy.testing.assert_allclose(g([-2.0, -0.5, 0.0, 0.5, 3.0]), [-2.0, -0.25, 0.0, 0.25, 3.0])
		assert g.p == 2.0

	def test_zero(self):
		g = make_feedback({"kind": "zero"})
		numpy.testing.assert_array_equal(g([1.0, -3.0]), 0.0)
		assert g.to_spec() == {"kind": "zero"}

	@pytest.mark.parametrize(
			"spec, match",
			[
					pytest.param({"kind": "linear", "alpha": 0}, "must be positive", id="alpha_zero"),
					pytest.param({"kind": "linear", "alpha": -1}, "must be positive", id="alpha_negative"),
					pytest.param({"kind": "power", 'p': 0.5}, "at least 1", id="p_small"),
					pytest.param({"kind": "cubic"}, "not a valid FeedbackKind", id="unknown"),
					]
			)
	def test_rejects(self, spec, match: str):
		with pytest.raises(ValueError, match=match):
			make_feedback(spec)

	def test_custom(self):
		g = make_feedback({"kind": "custom", 'g': numpy.tanh, "k_minus": 0.5, "k_plus": 1.0})
		assert g.kind is FeedbackKind.custom
		assert not g.depends_on_position
		assert g(0.0) == 0

	def test_custom_rejects(self):
		with pytest.raises(AdmissibilityError, match="exactly one"):
			make_custom_feedback()
		with pytest.raises(AdmissibilityError, match="exactly one"):
			make_custom_feedback(numpy.tanh, position_function=lambda x, s: s)
		with pytest.raises(AdmissibilityError, match="k_minus <= k_plus"):
			make_custom_feedback(numpy.tanh, k_minus=2, k_plus=1)
		with pytest.raises(AdmissibilityError, match="c > 1"):
			make_custom_feedback(position_function=lambda x, s: s, c=1.0)

	def test_position_law_needs_points(self):
		g = make_custom_feedback(position_function=lambda x, s: s, c=2.0)
		assert g.depends_on_position
		with pytest.raises(TypeError, match="needs boundary positions"):
			g(1.0)


class TestValidateFeedback:

	@pytest.mark.parametrize(
			"spec",
			[{"kind": "linear", "alpha": 1.0}, {"kind": "power", 'p': 3}, {"kind": "power", 'p': 1}],
			)
	def test_builtin_laws(self, spec):
		report = validate_feedback(make_feedback(spec))
		assert report.satisfied
		assert report.violations == []

	def test_wrong_upper_constant(self):
		report = validate_feedback(make_custom_feedback(lambda s: 2 * s, k_minus=1, k_plus=1))
		assert not report.satisfied
		assert report.failed("upper")
		assert not report.failed("lower")
		assert not report.failed("monotone")

	def test_decreasing_law(self):
		report = validate_feedback(make_custom_feedback(lambda s: -s, k_minus=0, k_plus=1))
		assert report.failed("monotone")

	def test_saturating_law_has_no_linear_lower_bound(self):
		report = validate_feedback(make_custom_feedback(numpy.tanh, k_minus=0.5, k_plus=1))
		assert report.failed("lower")
		violation = next(v for v in report.violations if v.condition == "lower")
		assert abs(violation.s) > 1
		assert violation.count > 0

	def test_position_law(self):
		points = numpy.array([[1.0, 0.25], [1.0, 0.75]])
		m_dot_nu = numpy.array([1.0, 1.0])

		def good(x, s):
			magnitude = numpy.abs(s)
			return numpy.where(magnitude <= 1, numpy.sign(s) * magnitude**1.5, s)

		report = validate_feedback(make_custom_feedback(position_function=good, c=2.0), boundary=(points, m_dot_nu))
		assert report.satisfied

		report = validate_feedback(
				make_custom_feedback(position_function=lambda x, s: s, c=2.0), boundary=(points, m_dot_nu)
				)
		assert report.failed("position_upper")
		violation = next(v for v in report.violations if v.condition == "position_upper")
		assert violation.point is not None
		assert violation.point[0] == 1.0

	def test_position_law_skips_inactive_boundary(self):
		points = numpy.array([[0.0, 0.5]])
		report = validate_feedback(
				make_custom_feedback(position_function=lambda x, s: s, c=2.0),
				boundary=(points, numpy.array([-1.0])),
				)
		assert report.satisfied


class TestWaveSolver:

	def test_default_time_step(self, radial_boundary: SnappedBoundary):
		solver = WaveSolver(radial_boundary, make_feedback({"kind": "linear"}))
		assert solver.dt == pytest.approx(CFL_FACTOR / 16)

	def test_cfl_violation(self, radial_boundary: SnappedBoundary):
		with pytest.raises(AdmissibilityError, match="violates"):
			WaveSolver(radial_boundary, make_feedback({"kind": "linear"}), dt=0.5 / 16)

	def test_initial_state_rejects_dirichlet_values(self, lattice: Lattice, radial_boundary: SnappedBoundary):
		solver = WaveSolver(radial_boundary, make_feedback({"kind": "linear"}))
		u0 = numpy.ones(lattice.size)
		with pytest.raises(AdmissibilityError, match="u0 does not vanish"):
			solver.initial_state(u0, numpy.zeros(lattice.size))
		with pytest.raises(AdmissibilityError, match="lattice has"):
			solver.initial_state(numpy.zeros(10), numpy.zeros(lattice.size))

	def test_initial_energy(self, lattice: Lattice):
		solver = WaveSolver(SnappedBoundary.all_dirichlet(lattice), make_feedback({"kind": "zero"}))
		state = solver.initial_state(first_mode(lattice), numpy.zeros(lattice.size))
		assert state.t == 0
		assert state.energy() == pytest.approx(math.pi**2 / 4, rel=2e-2)

	def test_step_matches_solver(self, lattice: Lattice, radial_boundary: SnappedBoundary):
		g = make_feedback({"kind": "power", 'p': 2})
		solver = WaveSolver(radial_boundary, g)
		state = solver.initial_state(mode(lattice, 1, 1), numpy.zeros(lattice.size))
		for _ in range(5):
			state = solver.step(state)

		expected = solver.step(state)
		actual = step(state, radial_boundary, g)
		numpy.testing.assert_allclose(actual.u, expected.u)
		assert actual.t == pytest.approx(expected.t)

	def test_dirichlet_nodes_stay_pinned(self, lattice: Lattice, radial_boundary: SnappedBoundary):
		solver = WaveSolver(radial_boundary, make_feedback({"kind": "linear"}))
		state = solver.initial_state(mode(lattice, 2, 1), numpy.zeros(lattice.size))
		for _ in range(20):
			state = solver.step(state)
		assert numpy.all(state.u[radial_boundary.dirichlet] == 0)
		assert numpy.any(state.u[radial_boundary.neumann] != 0)

	def test_non_finite(self, lattice: Lattice, radial_boundary: SnappedBoundary):
		solver = WaveSolver(radial_boundary, make_feedback({"kind": "linear"}))
		u0 = numpy.zeros(lattice.size)
		u0[lattice.index(8, 8)] = numpy.nan
		state = solver.initial_state(u0, numpy.zeros(lattice.size))

		with pytest.raises(NumericalError, match="Non-finite") as exc_info:
			solver.step(state)

		assert exc_info.value.time == pytest.approx(solver.dt)
		assert isinstance(exc_info.value.index, tuple)


class TestSimulate:

	def run(self, boundary: SnappedBoundary, spec, T: float = 1.0, **kwargs):
		lattice = boundary.lattice
		return simulate(
				boundary,
				make_feedback(spec),
				mode(lattice, 1, 1),
				numpy.zeros(lattice.size),
				T,
				**kwargs,
				)

	def test_undamped_dirichlet_conserves(self, lattice: Lattice):
		result = self.run(SnappedBoundary.all_dirichlet(lattice), {"kind": "zero"}, T=2.0)
		energy = result.trace.energy
		numpy.testing.assert_allclose(energy, energy[0], rtol=1e-11)
		numpy.testing.assert_array_equal(result.trace.dissipation, 0)

	def test_undamped_neumann_conserves(self, radial_boundary: SnappedBoundary):
		result = self.run(radial_boundary, {"kind": "zero"}, T=2.0)
		energy = result.trace.energy
		numpy.testing.assert_allclose(energy, energy[0], rtol=1e-11)

	@pytest.mark.parametrize(
			"spec",
			[
					pytest.param({"kind": "linear", "alpha": 1.0}, id="linear"),
					pytest.param({"kind": "linear", "alpha": 0.2}, id="weak_linear"),
					pytest.param({"kind": "power", 'p': 3}, id="cubic"),
					]
			)
	def test_energy_identity(self, radial_boundary: SnappedBoundary, spec):
		result = self.run(radial_boundary, spec, T=2.0)
		trace = result.trace
		dt = trace.metadata["dt"]

		# Consecutive energies differ by dt times the dissipation rate of the step between them
		numpy.testing.assert_allclose(
				numpy.diff(trace.energy), -dt * trace.dissipation[:-1], rtol=0, atol=1e-10 * trace.initial_energy
				)
		assert numpy.all(numpy.diff(trace.energy) <= 1e-12 * trace.initial_energy)
		assert numpy.all(trace.dissipation >= 0)
		assert trace.energy[-1] < 0.999 * trace.initial_energy
		assert dissipation_check(trace) < 1e-2

	def test_strides(self, radial_boundary: SnappedBoundary):
		result = self.run(radial_boundary, {"kind": "linear"}, T=1.0, output_stride=7, snapshot_stride=10)
		trace = result.trace
		assert trace.metadata["steps"] == 40
		assert len(trace) == 7
		assert trace.t[-1] == pytest.approx(1.0)
		assert [t for t, _ in result.snapshots] == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
		assert result.state.t == 1.0
		numpy.testing.assert_array_equal(result.snapshots[-1][1], result.state.u)

	def test_time_step_divides_final_time(self, radial_boundary: SnappedBoundary):
		result = self.run(radial_boundary, {"kind": "linear"}, T=0.33)
		dt = result.trace.metadata["dt"]
		assert dt <= CFL_FACTOR / 16
		assert result.trace.metadata["steps"] * dt == pytest.approx(0.33)

	def test_metadata(self, radial_boundary: SnappedBoundary):
		result = self.run(radial_boundary, {"kind": "linear", "alpha": 2.0}, T=0.1, metadata={"seed": 7})
		metadata = result.trace.metadata
		assert metadata['h'] == 1 / 16
		assert metadata["feedback"] == {"kind": "linear", "alpha": 2.0}
		assert metadata["seed"] == 7

	def test_rejects(self, radial_boundary: SnappedBoundary):
		with pytest.raises(AdmissibilityError, match="final time must be positive"):
			self.run(radial_boundary, {"kind": "linear"}, T=0)
		with pytest.raises(AdmissibilityError, match="output_stride"):
			self.run(radial_boundary, {"kind": "linear"}, output_stride=0)


class TestEnergyTrace:

	def test_validation(self):
		with pytest.raises(AdmissibilityError, match="equal lengths"):
			EnergyTrace([0, 1], [1.0], [0, 0])
		with pytest.raises(AdmissibilityError, match="strictly increasing"):
			EnergyTrace([0, 1, 1], [1, 1, 1], [0, 0, 0])
		with pytest.raises(AdmissibilityError, match="non-negative"):
			EnergyTrace([0, 1], [1.0, -0.5], [0, 0])

	def test_csv(self, tmp_path):
		trace = EnergyTrace([0.0, 0.5, 1.0], [2.0, 1.5, 1.25], [1.0, 0.5, 0.25])
		trace.to_csv(tmp_path / "trace.csv")
		assert (tmp_path / "trace.csv").read_text().splitlines()[0] == "t,E,dissipation_rate"

		loaded = EnergyTrace.from_csv(tmp_path / "trace.csv", {'h': 0.1})
		numpy.testing.assert_array_equal(loaded.energy, trace.energy)
		numpy.testing.assert_array_equal(loaded.dissipation, trace.dissipation)
		assert loaded.metadata == {'h': 0.1}
		assert loaded.initial_energy == 2.0

	def test_csv_without_dissipation(self, tmp_path):
		filename = PathPlus(tmp_path / "energy.csv")
		filename.write_lines(["t,E", "0,1", "1,0.5"])
		trace = EnergyTrace.from_csv(filename)
		numpy.testing.assert_array_equal(trace.dissipation, [0, 0])
		assert len(trace) == 2

	def test_dissipation_check(self):
		assert dissipation_check(EnergyTrace([0.0], [1.0], [0.0])) == 0
		assert dissipation_check(EnergyTrace([0, 1], [0.0, 0.0], [0, 0])) == 0

		# The energy rises with no dissipation
		assert dissipation_check(EnergyTrace([0, 1], [1.0, 1.1], [0, 0])) == pytest.approx(0.1)
