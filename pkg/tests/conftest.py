import os

import pytest


def pytest_collection_modifyitems(config, items):
    if os.environ.get("JETRES_RUN_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="slow check; set JETRES_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
