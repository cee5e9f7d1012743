import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from maxplus.mdarray import NEG_CODE, MDArray

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def sizes(draw, max_d=3, max_entries=64, max_len=8):
    d = draw(st.integers(1, max_d))
    out = []
    budget = max_entries
    for _ in range(d):
        x = draw(st.integers(1, max(1, min(max_len, budget))))
        out.append(x)
        budget //= x
    return tuple(out)


@st.composite
def arrays(draw, size=None, lo=-20, hi=20, neg_inf=True):
    size = size if size is not None else draw(sizes())
    n = int(np.prod(size))
    vals = draw(st.lists(st.integers(lo, hi), min_size=n, max_size=n))
    data = np.array(vals, dtype=np.int64)
    if neg_inf:
        mask = draw(st.lists(st.booleans(), min_size=n, max_size=n))
        data = np.where(np.array(mask) & (np.arange(n) % 3 == 0), NEG_CODE, data)
    return MDArray(size, data.reshape(size, order="F"))


@st.composite
def array_pairs(draw, **kw):
    size = draw(sizes())
    return draw(arrays(size=size, **kw)), draw(arrays(size=size, **kw))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
