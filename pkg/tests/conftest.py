"""Pytest configuration and fixtures."""
import pytest
from click.testing import CliRunner

from halpern_rates import create_runtime
from halpern_rates.models import ConvexBall, Curvature, GeodesicPull, ModelPoint, ModuliSchedule, Rotation
from halpern_rates.services import MapService

POLE = (0.0, 0.0, 1.0)


@pytest.fixture(autouse=True)
def runtime(tmp_path):
    """Testing runtime pushed as the current one."""
    runtime = create_runtime("testing", OUTPUT_DIR=str(tmp_path / "out"))
    with runtime.context():
        yield runtime


@pytest.fixture
def runner():
    """Create test CLI runner."""
    return CliRunner()


@pytest.fixture
def unit_sphere():
    return Curvature(1.0)


@pytest.fixture
def sample_ball(unit_sphere):
    """Ball of radius 0.05 around the pole, so M = 0.1."""
    return ConvexBall(ModelPoint(POLE), 0.05, unit_sphere)


@pytest.fixture
def sample_pull(sample_ball):
    """Pull halfway towards a point 0.04 from the center."""
    anchor = MapService.offset_point(sample_ball, [0.0, 0.04])
    return GeodesicPull(sample_ball, anchor, 0.5)


@pytest.fixture
def sample_rotation(sample_ball):
    """Rotation by 0.3 rad about the ball center."""
    return Rotation(sample_ball, 0.3)


@pytest.fixture
def harmonic():
    """lambda_n = 1/(n+1) with its standard moduli."""
    return ModuliSchedule.harmonic()


@pytest.fixture
def start_point(sample_ball):
    return MapService.offset_point(sample_ball, [0.03])


@pytest.fixture
def sample_config_file(tmp_path):
    """Flat experiment configuration for kappa = 1, M = 0.1."""
    path = tmp_path / "experiment.conf"
    path.write_text(
        "# pull map on the unit sphere\n"
        "space.kappa = 1\n"
        "space.dim = 2\n"
        "ball.radius = 0.05\n"
        "map.kind = pull\n"
        "map.factor = 0.5\n"
        "map.anchor.offset = [0.0, 0.04]\n"
        "schedule.kind = harmonic\n"
        "eps = [0.2]\n"
        "g.kind = constant\n"
        "g.c = 1\n"
        "seed = 7\n"
        "horizon = 20000\n",
        encoding="utf-8",
    )
    return path
