import numpy as np
import pytest

from dqkit.corpus import Dataset, Sample, TaskSchema

NLI2 = TaskSchema("nli2", ("premise", "hypothesis"), frozenset({"entailment", "contradiction"}))


@pytest.fixture
def micro_corpus() -> Dataset:
    """Four NLI samples; 'not' appears in exactly the two contradictions."""
    return Dataset(NLI2, [
        Sample("s1", {"premise": "a man walks the dog", "hypothesis": "a man walks"},
               "entailment"),
        Sample("s2", {"premise": "a woman reads a book", "hypothesis": "a woman reads"},
               "entailment"),
        Sample("s3", {"premise": "the dog sleeps", "hypothesis": "the dog does not sleep"},
               "contradiction"),
        Sample("s4", {"premise": "a child plays", "hypothesis": "a child does not play"},
               "contradiction"),
    ])


@pytest.fixture
def blob():
    """Separable 2-class 2-D training set, 40 points, fixed seed."""
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(-2, 0.5, (20, 2)), rng.normal(2, 0.5, (20, 2))])
    y = ["neg"] * 20 + ["pos"] * 20
    return X, y
