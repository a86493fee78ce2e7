import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from spinz.generators import random_model

settings.register_profile("spinz", deadline=None, max_examples=40, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "spinz"))

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
  return os.path.join(FIXTURES, name)


@st.composite
def models(draw, kinds=("ising", "potts", "clock", "custom-difference", "custom-pairwise",
                        "custom-kbody"), max_vertices=6, max_edges=8, fields=None, qs=(2, 3, 4)):
  """Random small Hamiltonian built from a drawn seed (shrinks on the seed)."""
  seed = draw(st.integers(0, 2 ** 32 - 1))
  kind = draw(st.sampled_from(kinds))
  q = draw(st.sampled_from(qs))
  nv = draw(st.integers(2, max_vertices))
  ne = draw(st.integers(1, max_edges))
  f = draw(st.booleans()) if fields is None else fields
  return random_model(np.random.default_rng(seed), q, nv, ne, kind, f)


betas = st.floats(0.05, 2.0)


@pytest.fixture
def rng():
  return np.random.default_rng(12345)
