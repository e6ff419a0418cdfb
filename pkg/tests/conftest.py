import math

import numpy as np
import pytest
from hypothesis import assume, strategies as st

from lossybs import ScatteringMatrix, check_passivity

TWO_PI = 2.0 * math.pi

unit = st.floats(0.0, 1.0, allow_nan=False)
phase = st.floats(0.0, TWO_PI, exclude_max=True, allow_nan=False)


@st.composite
def any_matrices(draw):
    return ScatteringMatrix(draw(unit), draw(unit), draw(unit), draw(unit), draw(phase), draw(phase))


@st.composite
def passive_matrices(draw, shrink=st.floats(0.0, 1.0)):
    """Rescale a random matrix so its spectral norm equals a drawn value in [0, 1]."""
    amps = [draw(unit) for _ in range(4)]
    p1, p2 = draw(phase), draw(phase)
    target = draw(shrink)
    raw = ScatteringMatrix(*amps, p1, p2)
    sigma = np.linalg.norm(raw.matrix(), 2)
    if sigma > 0:
        amps = [min(a * target / sigma, 1.0) for a in amps]
    S = ScatteringMatrix(*amps, p1, p2)
    # a port loss at the rounding floor puts the cross inequality on a knife
    # edge (sqrt of eps); only those samples may be dropped here
    rep = check_passivity(S)
    if min(rep.per_port_loss_1, rep.per_port_loss_2) < 1e-12:
        assume(rep.passive)
    return S


@st.composite
def symmetric_passive(draw):
    """(t, r, alpha) with alpha inside the passive window."""
    t2 = draw(st.floats(0.0, 1.0))
    r2 = draw(st.floats(0.0, 1.0 - t2))
    t, r = math.sqrt(t2), math.sqrt(r2)
    loss = max(1.0 - t * t - r * r, 0.0)
    if t * r == 0:
        alpha = draw(phase)
    else:
        c = min(loss / (2.0 * t * r), 1.0)
        half = 2.0 * math.asin(c)  # half-width of the window around pi
        alpha = math.pi + draw(st.floats(-1.0, 1.0)) * half
    return t, r, alpha


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


LOSSLESS_BALANCED = ScatteringMatrix.symmetric(1 / math.sqrt(2), 1 / math.sqrt(2), math.pi)
QUARTER = 0.5  # t = r = tau = rho = 0.5
