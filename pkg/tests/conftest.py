import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vptz.panorama import SyntheticPathSpec, generate_synthetic_scenario  # noqa: E402

# the "easy" scenario: saturated red disc on a grey checkerboard, moderate speed
EASY_SPEC = SyntheticPathSpec(
    omega_deg_s=20.0, radius_deg=5.0, duration_s=10.0, fps=16.0, pano_width=1024, name="easy", tags=("CB",)
)
# fast scenario at the upper speed bound used by the oracle acceptance run
FAST_SPEC = SyntheticPathSpec(
    omega_deg_s=60.0, heading_deg=20.0, radius_deg=5.0, duration_s=10.0, fps=16.0, pano_width=1024,
    background="noise", seed=3, name="fast", tags=("FM",),
)


@pytest.fixture(scope="session")
def easy_scenario(tmp_path_factory):
    out = tmp_path_factory.mktemp("easy")
    generate_synthetic_scenario(EASY_SPEC, out)
    return out


@pytest.fixture(scope="session")
def fast_scenario(tmp_path_factory):
    out = tmp_path_factory.mktemp("fast")
    generate_synthetic_scenario(FAST_SPEC, out)
    return out


@pytest.fixture(scope="session")
def short_scenario(tmp_path_factory):
    out = tmp_path_factory.mktemp("short")
    spec = SyntheticPathSpec(omega_deg_s=15.0, duration_s=2.0, fps=16.0, pano_width=512, name="short", tags=("LR",))
    generate_synthetic_scenario(spec, out)
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
