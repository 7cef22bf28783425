import sys
from pathlib import Path

import pytest

from ionfab.arch import example_architecture, load_architecture

REPO_ROOT = Path(__file__).resolve().parents[1]
EXAMPLE_JSON = REPO_ROOT / "docs" / "example.json"
SCHEMAS_DIR = REPO_ROOT / "schemas"
GOLDEN_DIR = Path(__file__).parent / "golden"
FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def example_spec():
    return load_architecture(EXAMPLE_JSON)


@pytest.fixture(scope="session")
def built_spec():
    return example_architecture()


def run_cli(args, cwd=None):
    """Run the CLI in module mode so tests don't depend on console_scripts."""
    import subprocess

    cmd = [sys.executable, "-m", "ionfab", *args]
    return subprocess.run(cmd, cwd=cwd, text=True, capture_output=True,
                          env=_cli_env())


def _cli_env():
    import os

    env = dict(os.environ)
    env["COLUMNS"] = "80"
    return env
