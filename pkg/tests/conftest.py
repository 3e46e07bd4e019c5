import itertools
import os

import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from collapsed_kcore import Graph, Instance, preprocess
from collapsed_kcore.datasets import load

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SEED = int(os.environ.get("COLLAPSE_CORE_SEED", "20241017"))


def clique(n):
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def from_nx(G):
    G = nx.convert_node_labels_to_integers(G)
    return Graph.from_edges(G.number_of_nodes(), G.edges())


def to_nx(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges())
    return G


def gnp(n, p, seed):
    return from_nx(nx.gnp_random_graph(n, p, seed=seed))


@st.composite
def graphs(draw, min_n=1, max_n=16):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [e for e, keep in zip(pairs, mask) if keep])


def random_instances(count, n_range, p_range, k_values, b_values, seed=SEED, min_core=1):
    """Preprocessed instances with a nonempty k-core at least ``min_core``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(*n_range))
        g = gnp(n, float(rng.uniform(*p_range)), int(rng.integers(2**31)))
        k = int(rng.choice(k_values))
        b = int(rng.choice(b_values))
        inst = preprocess(Instance(g, k, b))
        if inst.n >= max(min_core, b + 1):
            out.append(inst)
    return out


@pytest.fixture(scope="session")
def karate():
    return load("karate")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(SEED)
