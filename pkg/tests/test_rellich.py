# stdlib
import math

# 3rd party
import numpy
import pytest

# this package
from multiplier_lab.errors import AdmissibilityError
from multiplier_lab.fields import MultiplierField, make_affine
from multiplier_lab.geometry import PolygonDomain, polygon_from_vertices
from multiplier_lab.rellich import (
		ShamirReport,
		SmoothFunction,
		inequality_check,
		rellich_residual,
		richardson,
		shamir_defect
		)


def test_constant_function(square: PolygonDomain, rotated_field: MultiplierField):
	report = rellich_residual(SmoothFunction.constant(3.0), rotated_field, square, 1 / 16)
	assert report.lhs == 0
	assert report.volume_term == 0
	assert report.boundary_term == 0
	assert report.defect == 0
	assert report.h == 1 / 16


@pytest.mark.parametrize("direction", [(1.0, 0.0), (0.3, -2.0)])
def test_plane_is_exact(square: PolygonDomain, identity_field: MultiplierField, direction):
	report = rellich_residual(SmoothFunction.plane(direction), identity_field, square, 1 / 16)
	assert report.lhs == 0
	assert report.volume_term == pytest.approx(0, abs=1e-12)
	assert report.defect == pytest.approx(0, abs=1e-12)


def test_sine_product_derivatives():
	u = SmoothFunction.sine_product(2, 1)
	x = numpy.array([[0.1, 0.3], [0.7, 0.2]])
	numpy.testing.assert_allclose(u.laplacian(x), -5 * math.pi**2 * u.value(x))
	assert u.gradient(x).shape == (2, 2)


def test_random_trigonometric(rng: numpy.random.Generator):
	u = SmoothFunction.random_trigonometric(rng, terms=4)
	assert u.value(numpy.zeros((3, 2))).shape == (3, )
	assert u.gradient(numpy.zeros((3, 2))).shape == (3, 2)

	again = SmoothFunction.random_trigonometric(numpy.random.default_rng(1234), terms=4)
	x = numpy.array([[0.2, 0.9]])
	numpy.testing.assert_allclose(again.value(x), u.value(x))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_second_order_convergence(square: PolygonDomain, rotated_field: MultiplierField, seed: int):
	u = SmoothFunction.random_trigonometric(numpy.random.default_rng(seed))
	coarse = rellich_residual(u, rotated_field, square, 1 / 32)
	fine = rellich_residual(u, rotated_field, square, 1 / 64)

	scale = abs(coarse.lhs) + abs(coarse.volume_term) + abs(coarse.boundary_term)
	if abs(coarse.defect) > 1e-12 * scale:
		assert math.log2(abs(coarse.defect) / max(abs(fine.defect), 1e-300)) >= 1.8
	assert abs(fine.defect) <= 1e-2 * scale


def test_on_a_rectangle(identity_field: MultiplierField):
	domain = polygon_from_vertices([[0, 0], [2, 0], [2, 1], [0, 1]])
	report = rellich_residual(SmoothFunction.sine_product(1, 1), identity_field, domain, 1 / 32)
	assert abs(report.defect) < 1e-2 * abs(report.lhs)


PENTAGON = [[0.0, 0.0], [1.0, 0.0], [1.2, 0.6], [0.5, 1.1], [-0.2, 0.6]]
L_SHAPE = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]


@pytest.mark.parametrize("vertices", [PENTAGON, L_SHAPE, [[0, 0], [1, 0], [0, 1]]])
def test_plane_is_exact_on_polygons(identity_field: MultiplierField, vertices):
	domain = polygon_from_vertices(vertices)
	report = rellich_residual(SmoothFunction.plane((0.7, -0.4)), identity_field, domain, 1 / 32)
	assert report.lhs == 0
	assert report.volume_term == pytest.approx(0, abs=1e-12)
	assert report.defect == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("seed", [0, 1])
def test_pentagon_convergence(rotated_field: MultiplierField, seed: int):
	domain = polygon_from_vertices(PENTAGON)
	u = SmoothFunction.random_trigonometric(numpy.random.default_rng(seed))
	coarse = rellich_residual(u, rotated_field, domain, 1 / 32)
	fine = rellich_residual(u, rotated_field, domain, 1 / 64)

	scale = abs(fine.lhs) + abs(fine.volume_term) + abs(fine.boundary_term)
	assert abs(fine.defect) <= 1e-2 * scale
	assert abs(fine.defect) <= abs(coarse.defect) / 3


@pytest.mark.parametrize("h", [0.1, 0.0, -1 / 32])
def test_rejects_spacing(square: PolygonDomain, identity_field: MultiplierField, h: float):
	with pytest.raises(AdmissibilityError, match="must lie in"):
		rellich_residual(SmoothFunction.constant(), identity_field, square, h)


def test_rejects_wrong_gradient(square: PolygonDomain, identity_field: MultiplierField):
	true = SmoothFunction.sine_product(1, 1)
	wrong = SmoothFunction(true.value, lambda x: 2 * true.gradient(x), true.laplacian)

	with pytest.raises(AdmissibilityError, match="supplied gradient disagrees") as exc_info:
		rellich_residual(wrong, identity_field, square, 1 / 16)

	assert exc_info.value.witness is not None
	assert exc_info.value.witness.shape == (2, )


def test_rejects_wrong_laplacian(square: PolygonDomain, identity_field: MultiplierField):
	true = SmoothFunction.sine_product(1, 1)
	wrong = SmoothFunction(true.value, true.gradient, lambda x: numpy.zeros(x.shape[:-1]))

	with pytest.raises(AdmissibilityError, match="supplied Laplacian disagrees"):
		rellich_residual(wrong, identity_field, square, 1 / 16)


class TestRichardson:

	def test_removes_quadratic_error(self):
		spacings = [0.1, 0.05, 0.025]
		table = richardson([1 + h**2 for h in spacings], spacings, [2])
		assert table[0] == pytest.approx([1.01, 1.0025, 1.000625])
		assert table[-1] == pytest.approx([1.0, 1.0])

	def test_two_orders(self):
		spacings = [0.4, 0.2, 0.1]
		table = richardson([3 + 2 * h - h**2 for h in spacings], spacings, [1, 2])
		assert len(table) == 3
		assert table[-1][-1] == pytest.approx(3.0)

	def test_single_value(self):
		assert richardson([5.0], [0.1], [2]) == [[5.0]]

	def test_rejects(self):
		with pytest.raises(AdmissibilityError, match="needs a spacing"):
			richardson([1.0, 2.0], [0.1], [2])
		with pytest.raises(AdmissibilityError, match="decrease geometrically"):
			richardson([1.0, 2.0, 3.0], [0.1, 0.05, 0.01], [2])
		with pytest.raises(AdmissibilityError, match="decrease geometrically"):
			richardson([1.0, 2.0], [0.05, 0.1], [2])


class TestShamir:

	def test_singular_function(self):
		u = SmoothFunction.shamir()
		x = numpy.array([[0.25, 0.0], [-0.25, 0.0], [0.0, 1.0]])
		numpy.testing.assert_allclose(u.value(x), [0.0, 0.5, math.sqrt(0.5)], atol=1e-15)

		# Zero normal derivative on the negative axis
		assert u.gradient(x)[1, 1] == pytest.approx(0, abs=1e-15)

	@pytest.mark.parametrize(
			"x0, sign",
			[
					pytest.param([-1.0, 0.0], 1, id="tangent_towards_dirichlet"),
					pytest.param([1.0, 0.0], -1, id="tangent_towards_neumann"),
					pytest.param([-0.5, 0.3], 1, id="oblique"),
					]
			)
	def test_defect(self, x0, sign: int):
		field = make_affine(numpy.eye(2), x0=x0)
		report = shamir_defect(field)

		assert report.predicted == pytest.approx(-math.pi / 4 * x0[0])
		assert report.converged
		assert report.relative_gap < 0.05
		assert math.copysign(1, report.extrapolated) == sign
		assert len(report.table) == 9
		assert inequality_check(report) is (sign < 0)

	def test_inequality_check_tolerance(self):
		report = ShamirReport(5e-4, 0.0, 0.0, True, [])
		assert inequality_check(report)
		assert not inequality_check(report, tolerance=1e-4)
