import pytest

from hpl import pipeline


@pytest.fixture(scope="session")
def bench():
    """The full synthetic benchmark (6x200, seed 42) shared across tests
    that need a trained model; also the subject of the acceptance suite."""
    return pipeline.run_benchmark(per_class=200, seed=42)
