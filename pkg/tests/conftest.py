import numpy as np
import pytest

from fluxfem.geometry import GradingPolicy, SectorDomain, initial_mesh, refine_graded, refine_uniform
from fluxfem.settings import load_settings


@pytest.fixture
def square_domain():
    """The unit square (0,1)^2, i.e. the sector with opening angle π/2."""
    return SectorDomain(np.pi / 2)


@pytest.fixture
def square_mesh(square_domain):
    """Two triangles sharing the diagonal from the origin to (1, 1)."""
    return initial_mesh(square_domain)


@pytest.fixture
def lshape_mesh():
    """Uniformly refined mesh of the 270 degree sector."""
    return refine_uniform(initial_mesh(SectorDomain(3 * np.pi / 2)), 2)


@pytest.fixture(params=[90.0, 120.0, 270.0])
def graded_mesh(request):
    domain = SectorDomain.from_degrees(request.param)
    return refine_graded(initial_mesh(domain), GradingPolicy(h_target=2.0**-2))


@pytest.fixture
def settings():
    return load_settings()
