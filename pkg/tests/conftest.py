"""Shared fixtures for the gftransfer test suite."""

import numpy as np
import pytest

from gftransfer import graphs as gr


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def path_graph():
    """3-node path with unit weights."""
    w = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    return gr.build_graph(w)


@pytest.fixture
def er_graph(rng):
    return gr.gen_er(30, 0.3, 1.0, 3.0, rng)


@pytest.fixture
def er_basis(er_graph):
    return gr.spectral_decompose(er_graph)


def random_connected_graph(n, rng):
    """Small random weighted graph guaranteed connected (ring + extras)."""
    w = np.zeros((n, n))
    for i in range(n):
        j = (i + 1) % n
        w[i, j] = w[j, i] = rng.uniform(0.5, 2.0)
    iu, ju = np.triu_indices(n, k=2)
    extra = rng.random(iu.size) < 0.3
    vals = rng.uniform(0.5, 2.0, iu.size)
    w[iu[extra], ju[extra]] = vals[extra]
    w[ju[extra], iu[extra]] = vals[extra]
    return gr.build_graph(w)
