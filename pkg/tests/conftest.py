import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tirlab import _accel  # noqa: E402

BACKENDS = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    """Run the test once per kernel backend, restoring the default afterwards."""
    previous = _accel.backend()
    _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(previous)
