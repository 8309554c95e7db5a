import pytest

from tourmine.clustering import featurize, kmeans
from tourmine.config import RunConfig
from tourmine.data import build_matrix, generate_dataset, synth_places

DEFAULTS = RunConfig()


@pytest.fixture(scope="session")
def default_catalog():
    return synth_places(DEFAULTS.synth_places, seed=DEFAULTS.seed)


@pytest.fixture(scope="session")
def default_matrix(default_catalog):
    visitors, events = generate_dataset(
        default_catalog, DEFAULTS.n_visitors, DEFAULTS.n_events, DEFAULTS.seed
    )
    matrix = build_matrix(default_catalog, visitors, events)
    matrix.warm_caches()
    return matrix


@pytest.fixture(scope="session")
def default_model(default_catalog):
    return kmeans(featurize(default_catalog), DEFAULTS.k, seed=DEFAULTS.seed)


@pytest.fixture(scope="session")
def small_catalog():
    return synth_places(40, seed=3)


@pytest.fixture(scope="session")
def small_dataset(small_catalog):
    visitors, events = generate_dataset(small_catalog, 200, 520, seed=3)
    return visitors, events, build_matrix(small_catalog, visitors, events)
