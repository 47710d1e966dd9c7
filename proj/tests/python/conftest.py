import os
import shutil

import pytest


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("IBRIDGE_CLI") or shutil.which("ibridge")
    if not path:
        pytest.skip("ibridge command-line tool not available")
    return path
