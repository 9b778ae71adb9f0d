import pytest

from triplekit import numeric as nm
from triplekit.numeric import EXACT, FLOAT


def E(n, p, q, backend=EXACT):
    """Matrix unit with one-based indices, matching the usual notation."""
    return nm.unit(n, p - 1, q - 1, backend)


@pytest.fixture(params=[EXACT, FLOAT])
def backend(request):
    return request.param
