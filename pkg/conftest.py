"""
Pytest fixtures that are available to all test modules upon runtime.
"""
from pytest import fixture
import numpy as np

from baforge.extractor import build_extractor
from baforge.masks import reference_mask
from baforge.synthetic import DatasetSpec, generate_dataset
from baforge.training import train_extractor, calibrate_threshold

SMALL = (16, 16, 3)


@fixture()
def extractor():
    """ An untrained cnn-a on 16 x 16 images """
    return build_extractor('cnn-a', input_shape=SMALL, embedding_dim=16, seed=0)


@fixture()
def extractor64(extractor):
    """ The same extractor in double precision """
    return extractor.astype(np.float64)


@fixture()
def image():
    """ A random 16 x 16 image """
    return np.random.default_rng(1).uniform(0.1, 0.9, size=SMALL).astype(np.float32)


@fixture()
def dataset():
    """ A small synthetic dataset """
    spec = DatasetSpec(n_identities=4, samples_per_identity=6, image_size=SMALL, max_shift=1)
    return generate_dataset(spec, seed=0)


@fixture()
def patch_mask():
    """ The eyeglass mask at 16 x 16 """
    return reference_mask('eyeglass', SMALL)


@fixture(scope='session')
def trained():
    """ A briefly trained extractor, its data split and calibrated threshold """
    spec = DatasetSpec(n_identities=6, samples_per_identity=16, image_size=SMALL, max_shift=1)
    train, test = generate_dataset(spec, seed=3).split(0.25)
    model = train_extractor(train, arch='cnn-a', epochs=20, lr=1e-2, seed=0,
                            batch_size=16, embedding_dim=16, verbose=False)
    threshold = calibrate_threshold(model, test, target_far=0.05, n_impostor=500, n_genuine=500)
    return model, train, test, threshold
