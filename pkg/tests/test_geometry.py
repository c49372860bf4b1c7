# stdlib
import math

# 3rd party
import numpy
import pytest

# this package
from multiplier_lab.enums import BeltTag, BoundaryLabel, CaseTag, InterfaceKind
from multiplier_lab.errors import AdmissibilityError
from multiplier_lab.fields import MultiplierField, make_affine, make_custom, make_perturbed, make_rotated, sine_shear
from multiplier_lab.geometry import (
		PolygonDomain,
		belt_classify,
		boundary_quadrature,
		case_classify,
		check_R,
		check_S2,
		divergence_check,
		fan_quadrature,
		interface_rows,
		partition,
		polygon_from_vertices,
		segment_rows
		)

PENTAGON = [[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [1.0, 2.0], [-0.5, 1.0]]


def test_unit_square(square: PolygonDomain):
	assert square.signed_area == pytest.approx(1.0)
	assert square.perimeter == pytest.approx(4.0)
	numpy.testing.assert_allclose(square.centroid, [0.5, 0.5])
	numpy.testing.assert_allclose(square.corner_angles, math.pi / 2)
	assert square.is_rectangle()
	numpy.testing.assert_allclose(square.edges[0].normal, [0, -1], atol=1e-15)
	numpy.testing.assert_allclose(square.edges[1].normal, [1, 0], atol=1e-15)


def test_outward_normals():
	domain = polygon_from_vertices(PENTAGON)
	assert not domain.is_rectangle()
	for edge in domain.edges:
		midpoint = edge.point_at(0.5)
		assert edge.normal @ (domain.centroid - midpoint) < 0

	assert sum(math.pi - angle for angle in domain.corner_angles) == pytest.approx(2 * math.pi)


@pytest.mark.parametrize(
		"vertices, message",
		[
				pytest.param([[0, 0], [0, 1], [1, 1], [1, 0]], "counter-clockwise", id="clockwise"),
				pytest.param([[0, 0], [1, 1], [1, 0], [0, 1]], "not simple", id="bowtie"),
				pytest.param([[0, 0], [1, 0], [1, 0], [0, 1]], "degenerate", id="repeated"),
				pytest.param([[0, 0], [1, 0]], "at least three", id="too-few"),
				]
		)
def test_polygon_rejects(vertices, message: str):
	with pytest.raises(AdmissibilityError, match=message):
		polygon_from_vertices(vertices)


def test_partition_radial(square: PolygonDomain, radial_field: MultiplierField):
	p = partition(radial_field, square)

	assert [p.segments_on(i)[0].label for i in range(4)] == [
			BoundaryLabel.D,
			BoundaryLabel.N,
			BoundaryLabel.N,
			BoundaryLabel.D,
			]
	assert p.dirichlet_length == pytest.approx(2.0)
	assert p.neumann_length == pytest.approx(2.0)

	corners = sorted(tuple(point.point) for point in p.interface_points)
	assert corners == [(0.0, 1.0), (1.0, 0.0)]
	for point in p.interface_points:
		assert point.kind is InterfaceKind.corner
		assert point.angle == pytest.approx(math.pi / 2)

	assert check_R(p).satisfied
	assert check_S2(p).satisfied


def test_partition_centred(square: PolygonDomain):
	p = partition(make_affine(numpy.eye(2), x0=[0.5, 0.5]), square)
	assert p.dirichlet_length == 0
	assert p.neumann_length == pytest.approx(4.0)
	assert not p.interface_points

	report = check_R(p)
	assert not report.dirichlet_measure_positive
	assert report.interface_finite
	assert not report.satisfied


def test_partition_distant_centre(square: PolygonDomain):
	p = partition(make_affine(numpy.eye(2), x0=[5.0, 5.0]), square)
	assert {segment.label for segment in p.segments_on(0)} == {BoundaryLabel.N}
	assert {segment.label for segment in p.segments_on(1)} == {BoundaryLabel.D}
	assert check_R(p).satisfied


def test_partition_s2_violation(square: PolygonDomain):
	field = make_rotated(math.pi / 4, math.pi / 4, [0.25, 0.25])
	p = partition(field, square)

	flat = [point for point in p.interface_points if point.kind is InterfaceKind.edge_interior]
	assert len(flat) == 1
	numpy.testing.assert_allclose(flat[0].point, [0.5, 0.0], atol=1e-12)
	numpy.testing.assert_allclose(field.value(flat[0].point), [0.5, 0.0], atol=1e-12)
	numpy.testing.assert_allclose(flat[0].tangent, [1.0, 0.0])
	assert flat[0].angle == math.pi
	assert flat[0].m_dot_tau == pytest.approx(0.5)
	assert abs(flat[0].m_dot_nu) <= p.tolerance

	assert [(s.t_start, s.label) for s in p.segments_on(0)] == [(0.0, BoundaryLabel.N), (0.5, BoundaryLabel.D)]

	s2 = check_S2(p)
	assert not s2.satisfied
	assert len(s2.violations) == 1
	numpy.testing.assert_allclose(s2.violations[0].interface.point, [0.5, 0.0], atol=1e-12)

	assert check_R(p).satisfied


def test_partition_s2_reflected(square: PolygonDomain):
	field = make_rotated(math.pi / 4, math.pi / 4, [0.75, -0.25])
	p = partition(field, square)

	flat = [point for point in p.interface_points if point.kind is InterfaceKind.edge_interior]
	assert len(flat) == 1
	numpy.testing.assert_allclose(flat[0].point, [0.5, 0.0], atol=1e-12)
	assert flat[0].m_dot_tau == pytest.approx(-0.5)
	assert check_S2(p).satisfied


def test_partition_oscillating(square: PolygonDomain):

	def value(x: numpy.ndarray) -> numpy.ndarray:
		return numpy.stack([numpy.cos(3 * math.pi * x[..., 1]), numpy.zeros(x.shape[:-1])], axis=-1)

	def jacobian(x: numpy.ndarray) -> numpy.ndarray:
		out = numpy.zeros(x.shape + (2, ))
		out[..., 0, 1] = -3 * math.pi * numpy.sin(3 * math.pi * x[..., 1])
		return out

	field = make_custom(value, jacobian)
	with pytest.warns(UserWarning, match="changes sign 3 times"):
		p = partition(field, square)

	assert p.oscillating_edges == [1, 3]
	assert p.degenerate_edges == [0, 2]
	assert len(p.segments_on(1)) == 4
	assert not check_R(p).interface_finite

	roots = sorted(point.point[1] for point in p.interface_points if point.edge_index == 1)
	numpy.testing.assert_allclose(roots, [1 / 6, 1 / 2, 5 / 6], atol=1e-10)


def test_partition_stability(square: PolygonDomain):
	field = make_rotated(math.pi / 5, math.pi / 3, [0.3, 0.2])
	coarse = partition(field, square, samples_per_edge=16)
	fine = partition(field, square, samples_per_edge=32)

	assert len(coarse.interface_points) == len(fine.interface_points)
	for a, b in zip(coarse.interface_points, fine.interface_points):
		numpy.testing.assert_allclose(a.point, b.point, atol=1e-10)


def test_partition_rejects_few_samples(square: PolygonDomain, radial_field: MultiplierField):
	with pytest.raises(AdmissibilityError, match="at least 16"):
		partition(radial_field, square, samples_per_edge=8)


@pytest.mark.parametrize(
		"x0, expected",
		[
				pytest.param([0.25, 0.25], BeltTag.B_plus, id="violating"),
				pytest.param([5.0, 5.0], BeltTag.no_interface, id="outside"),
				pytest.param([0.75, -0.25], BeltTag.B_minus, id="satisfying"),
				]
		)
def test_belt_classify(square: PolygonDomain, x0, expected: BeltTag):
	assert belt_classify(square.edges[0], math.pi / 4, x0) is expected

	bottom = (numpy.array([0.0, 0.0]), numpy.array([1.0, 0.0]), numpy.array([0.0, -1.0]))
	assert belt_classify(bottom, math.pi / 4, x0) is expected


def test_belt_classify_rejects():
	point = numpy.array([0.5, 0.5])
	with pytest.raises(AdmissibilityError, match="Degenerate edge"):
		belt_classify((point, point, numpy.array([0.0, 1.0])), math.pi / 4, [0, 0])

	with pytest.raises(AdmissibilityError, match="theta must lie"):
		belt_classify((numpy.zeros(2), numpy.ones(2), numpy.array([1.0, -1.0]) / math.sqrt(2)), math.pi / 2, [0, 0])


def test_belts_agree_with_s2(square: PolygonDomain):
	theta = math.pi / 4

	for x in numpy.linspace(-0.83, 1.77, 20):
		for y in numpy.linspace(-0.91, 1.69, 20):
			x0 = [float(x), float(y)]
			s2 = check_S2(partition(make_rotated(theta, theta, x0), square))

			for edge in square.edges:
				tag = belt_classify(edge, theta, x0)
				on_edge = [
						point for point in s2.points
						if point.interface.kind is InterfaceKind.edge_interior
						and point.interface.edge_index == edge.index
						]

				if tag is BeltTag.no_interface:
					assert not on_edge, (x0, edge.index)
				else:
					assert len(on_edge) == 1, (x0, edge.index)
					assert on_edge[0].satisfied is (tag is BeltTag.B_minus), (x0, edge.index)


@pytest.mark.parametrize(
		"theta1, theta2, expected",
		[
				(math.pi / 6, math.pi / 5, CaseTag.C1),
				(math.pi / 6, math.pi / 3, CaseTag.C2),
				(math.pi / 4, math.pi / 4, CaseTag.C3),
				(0.1, math.pi / 4, CaseTag.C2),
				(1.2, 1.5, CaseTag.C3),
				]
		)
def test_case_classify(theta1: float, theta2: float, expected: CaseTag):
	assert case_classify(theta1, theta2) is expected


@pytest.mark.parametrize("theta1, theta2", [(math.pi / 3, math.pi / 6), (0.0, 0.5), (0.5, math.pi / 2)])
def test_case_classify_rejects(theta1: float, theta2: float):
	with pytest.raises(AdmissibilityError, match="Expected 0 < theta1 <= theta2"):
		case_classify(theta1, theta2)


def test_boundary_quadrature(square: PolygonDomain, radial_field: MultiplierField):
	p = partition(radial_field, square)
	table = boundary_quadrature(p, radial_field)

	assert table.weights.sum() == pytest.approx(4.0, rel=1e-12)
	assert table.integrate(numpy.ones(len(table.weights))) == pytest.approx(4.0, rel=1e-12)

	# only the right and top edges carry the weighted measure, with m.ν = 2 on both
	assert numpy.all((table.sigma_m_points[:, 0] == 1) | (table.sigma_m_points[:, 1] == 1))
	assert table.sigma_m_weights.sum() == pytest.approx(4.0, rel=1e-12)


def test_boundary_quadrature_divergence(square: PolygonDomain):
	field = make_affine(numpy.eye(2), x0=[0.5, 0.5])
	table = boundary_quadrature(partition(field, square), field)
	assert table.sigma_m_weights.sum() == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize(
		"field",
		[
				pytest.param(make_affine(numpy.eye(2), x0=[-1.0, -1.0]), id="radial"),
				pytest.param(make_rotated(math.pi / 6, math.pi / 3, [0.2, 0.7]), id="rotated"),
				pytest.param(make_affine([[3.0, 1.0], [1.0, 2.0]], [[0.0, 2.0], [-2.0, 0.0]]), id="affine"),
				]
		)
@pytest.mark.parametrize("vertices", [[[0, 0], [1, 0], [1, 1], [0, 1]], PENTAGON], ids=["square", "pentagon"])
def test_divergence_check(field: MultiplierField, vertices):
	check = divergence_check(field, polygon_from_vertices(vertices))
	assert check.gap <= 1e-8


def test_divergence_check_quadrature():
	field = make_perturbed(1.0, F=sine_shear(0.4))
	check = divergence_check(field, polygon_from_vertices(PENTAGON))
	assert check.volume_integral == pytest.approx(2 * polygon_from_vertices(PENTAGON).signed_area, rel=1e-12)
	assert check.gap <= 1e-3


@pytest.mark.parametrize(
		"vertices",
		[PENTAGON, [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]],
		ids=["pentagon", "l_shape"],
		)
def test_fan_quadrature(vertices):
	domain = polygon_from_vertices(vertices)
	points, weights = fan_quadrature(domain, 0.1)

	assert weights.sum() == pytest.approx(domain.signed_area, rel=1e-10)
	numpy.testing.assert_allclose(weights @ points, domain.signed_area * domain.centroid, rtol=1e-10, atol=1e-12)

	coarse, _ = fan_quadrature(domain, level=2)
	assert len(coarse) == 4 * (len(vertices) - 2)


def test_fan_quadrature_rejects_spacing(square: PolygonDomain):
	with pytest.raises(AdmissibilityError, match="h must be positive"):
		fan_quadrature(square)


def test_dump_rows(square: PolygonDomain):
	p = partition(make_rotated(math.pi / 4, math.pi / 4, [0.25, 0.25]), square)

	rows = segment_rows(p)
	assert rows[0] == (0, 0.0, 0.5, 'N')
	assert rows[1] == (0, 0.5, 1.0, 'D')
	assert {row[3] for row in rows} == {'N', 'D'}

	interfaces = interface_rows(p)
	assert len(interfaces) == 2
	flat = next(row for row in interfaces if row[2] == "edge-interior")
	assert flat[:2] == pytest.approx((0.5, 0.0))
	assert flat[3] == math.pi
	assert flat[4] == pytest.approx(0.5)
