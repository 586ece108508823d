"""Shared hypothesis strategies."""
import numpy as np
from hypothesis import strategies as st

from ofdm_pa.waveform import PowerAllocation


@st.composite
def simplex_points(draw, min_n=2, max_n=32):
    n = draw(st.integers(min_n, max_n))
    w = draw(st.lists(st.floats(0.01, 10.0), min_size=n, max_size=n))
    w = np.asarray(w)
    return PowerAllocation(w * (n / w.sum()))


seeds = st.integers(0, 2**32 - 1)
