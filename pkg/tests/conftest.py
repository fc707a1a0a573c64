from pathlib import Path

import pytest

from crowdocean.socialnet import TrainConfig, load_model, scg_train
from crowdocean.synth import training_set

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_weights():
    return load_model((FIXTURES / "mlp_fixture.json").read_bytes())


@pytest.fixture(scope="session")
def trained_model():
    """Classifier trained on the default seeded 16,000-sample synthetic set."""
    X, y = training_set(seed=0)
    weights, report = scg_train(X, y, TrainConfig(seed=0))
    return weights, report


@pytest.fixture(scope="session")
def model_file(tmp_path_factory, trained_model):
    from crowdocean.socialnet import save_model

    path = tmp_path_factory.mktemp("model") / "model.json"
    path.write_bytes(save_model(trained_model[0]))
    return path
