# -*- coding: utf 8 -*-
"""
Define a suite a tests for the synthetic dataset.
"""
import numpy as np
import pytest

from baforge.errors import ValidationError
from baforge.synthetic import Identity, DatasetSpec, Dataset, generate_dataset


def test_identity():
    """
    Test an identity renders the same pattern every time.
    """
    a = Identity(3, seed=1).render((16, 16, 3))
    b = Identity(3, seed=1).render((16, 16, 3))
    assert a.dtype == np.float32
    assert np.array_equal(a, b)
    assert not np.array_equal(a, Identity(4, seed=1).render((16, 16, 3)))
    assert Identity(0).render((8, 8, 1)).shape == (8, 8, 1)


def test_generate(dataset):
    """
    Test shape, range and labels.
    """
    assert len(dataset) == 24
    assert dataset.image_shape == (16, 16, 3)
    assert dataset.n_identities == 4
    assert dataset.images.min() >= 0 and dataset.images.max() <= 1
    assert np.array_equal(np.bincount(dataset.labels), [6, 6, 6, 6])


def test_deterministic():
    """
    Test the seed fixes the data, and identities do not depend on how many
    there are.
    """
    spec = DatasetSpec(n_identities=3, samples_per_identity=4, image_size=(8, 8, 3))
    a = generate_dataset(spec, seed=5)
    b = generate_dataset(spec, seed=5)
    c = generate_dataset(spec, seed=6)
    assert np.array_equal(a.images, b.images)
    assert not np.array_equal(a.images, c.images)

    bigger = generate_dataset(DatasetSpec(n_identities=5, samples_per_identity=4, image_size=(8, 8, 3)), seed=5)
    assert np.array_equal(bigger.of(2), a.of(2))


def test_without_variation():
    """
    Test samples equal the pattern when variation is off.
    """
    spec = DatasetSpec.without_variation(n_identities=2, samples_per_identity=3, image_size=(8, 8, 3))
    data = generate_dataset(spec, seed=0)
    pattern = Identity(1, seed=0).render((8, 8, 3))
    assert all(np.array_equal(image, pattern) for image in data.of(1))


def test_spec():
    """
    Test spec validation and dict round trip.
    """
    spec = DatasetSpec(n_identities=2, image_size=(8, 8, 3))
    assert DatasetSpec.from_dict(spec.to_dict()) == spec
    assert DatasetSpec.from_json('{"n_identities": 3}').n_identities == 3

    for bad in ({'n_identities': 0}, {'image_size': (8, 8, 2)}, {'max_shift': -1},
                {'brightness_jitter': (1.2, 0.9)}):
        with pytest.raises(ValidationError):
            DatasetSpec(**bad)
    with pytest.raises(ValidationError):
        DatasetSpec.from_dict({'n_people': 3})
    with pytest.raises(ValidationError):
        DatasetSpec.from_json('{"n_identities": }')


def test_split(dataset):
    """
    Test every identity is in both halves and nothing is lost.
    """
    train, test = dataset.split(0.25)
    assert len(train) + len(test) == len(dataset)
    assert np.array_equal(np.bincount(test.labels), [2, 2, 2, 2])
    assert np.array_equal(train.identities, test.identities)
    with pytest.raises(ValidationError):
        dataset.split(1.0)


def test_dataset_errors():
    """
    Test mismatched images and labels.
    """
    with pytest.raises(ValidationError):
        Dataset(np.zeros((3, 4, 4, 3)), [0, 1])


def test_identities_differ_more_than_samples():
    """
    Test samples of one identity are closer to each other than to other
    identities, on the default spec.
    """
    data = generate_dataset(DatasetSpec(), seed=0)
    rng = np.random.default_rng(0)
    firsts = np.stack([data.of(label)[0] for label in data.identities])

    within = np.mean([np.mean((data.of(label)[1:9] - firsts[label])**2) for label in data.identities])
    i, j = rng.integers(0, len(firsts), size=(2, 200))
    keep = i != j
    cross = np.mean((firsts[i[keep]] - firsts[j[keep]])**2)
    assert within < cross
