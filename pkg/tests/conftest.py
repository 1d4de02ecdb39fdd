from __future__ import annotations

import pytest

from dp5count.cubics import canonical_spec
from dp5count.nfield import LABELS, make_field


@pytest.fixture(params=LABELS)
def field(request):
    return make_field(request.param)


@pytest.fixture(scope="session")
def spec():
    cache = {}

    def get(name, label="Q"):
        key = (name, label)
        if key not in cache:
            cache[key] = canonical_spec(name, label)
        return cache[key]

    return get
