# stdlib
import math

# 3rd party
import numpy
import pytest

# this package
from multiplier_lab.fields import MultiplierField, make_affine, make_rotated
from multiplier_lab.geometry import PolygonDomain, partition, unit_square
from multiplier_lab.lattice import Lattice, SnappedBoundary, snap_partition


@pytest.fixture()
def identity_field() -> MultiplierField:
	return make_affine(numpy.eye(2))


@pytest.fixture()
def rotated_field() -> MultiplierField:
	return make_rotated(math.pi / 6, math.pi / 3)


@pytest.fixture()
def square() -> PolygonDomain:
	return unit_square()


@pytest.fixture()
def radial_field() -> MultiplierField:
	# Neumann on the right and top edges of the unit square
	return make_affine(numpy.eye(2), x0=[-1.0, -1.0])


@pytest.fixture()
def lattice() -> Lattice:
	return Lattice(16)


@pytest.fixture()
def radial_boundary(lattice: Lattice, radial_field: MultiplierField, square: PolygonDomain) -> SnappedBoundary:
	return snap_partition(lattice, partition(radial_field, square), radial_field)


@pytest.fixture()
def rng() -> numpy.random.Generator:
	return numpy.random.default_rng(1234)
