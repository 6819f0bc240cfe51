import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # oracle_* helper modules

from hgimpact.demo import write_demo_bundle
from hgimpact.ingest import ingest
from hgimpact.scenario import parse_scenario_file, run

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def demo_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("demo")
    write_demo_bundle(out, seed=42)
    return out


@pytest.fixture(scope="session")
def demo_bundle(demo_dir):
    return ingest(demo_dir / "bundle")


@pytest.fixture(scope="session")
def all_measures_record(demo_dir, demo_bundle):
    scenario = parse_scenario_file(demo_dir / "scenarios" / "all_measures.txt")
    return run(scenario, demo_bundle)


def load_golden(name: str) -> list[list[str]]:
    lines = (GOLDEN / name).read_text().splitlines()
    return [ln.split(",") for ln in lines[1:]]


def rel_err(got: float, want: float, floor: float = 1e-300) -> float:
    return abs(got - want) / max(abs(got), abs(want), floor)
