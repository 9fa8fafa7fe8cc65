import pytest

import scorelab as sl

# Canonical classifier fixture: 10 Gaussian blobs in 16 dimensions, one
# hidden-layer MLP. Seeds are fixed so every threshold in the suite was
# pinned against this exact model.
BLOB_SEED = 0
SPLIT_SEED = 1
INIT_SEED = 2
TRAIN_SEED = 3


@pytest.fixture(scope="session")
def blob_data():
    return sl.gaussian_blobs(seed=BLOB_SEED)


@pytest.fixture(scope="session")
def blob_split(blob_data):
    return blob_data.split(0.8, seed=SPLIT_SEED)


@pytest.fixture(scope="session")
def blob_classifier(blob_split):
    train_set, _ = blob_split
    model = sl.MLPClassifier.random(16, 64, 10, seed=INIT_SEED)
    trained, _ = sl.train(
        model, train_set, sl.TrainConfig(learning_rate=0.1, epochs=30, batch_size=64, seed=TRAIN_SEED)
    )
    return trained
