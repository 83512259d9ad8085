import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cryo_transport import so3
from cryo_transport.imaging import pairwise_alignment, project_all, three_blob_phantom

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@st.composite
def frames(draw):
    q = np.array(draw(st.lists(st.floats(-1, 1), min_size=4, max_size=4)))
    n = np.linalg.norm(q)
    if n < 0.1:
        q = np.array([1.0, 0.0, 0.0, 0.0])
        n = 1.0
    return so3.Frame(so3.quaternion_to_matrix(q / n))


@st.composite
def unit_complex(draw):
    theta = draw(st.floats(0, 2 * np.pi))
    return complex(np.cos(theta), np.sin(theta))


@st.composite
def rotations(draw):
    return draw(frames()).matrix


@pytest.fixture(scope="session")
def clean_alignment():
    """200 clean 64x64 projections of the reference phantom, all pairs aligned (72 angles)."""
    rng = np.random.default_rng(7)
    fr = so3.sample_haar_frames(rng, 200)
    images = project_all(three_blob_phantom(), fr, 64, 1.0)
    dist, rot = pairwise_alignment(images, 72)
    return fr, images, dist, rot
