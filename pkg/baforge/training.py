"""
Training the toy feature extractors and calibrating verification thresholds.

Extractors are trained as identity classifiers: a scaled linear head on the
unit-norm embedding, softmax cross-entropy, Adam. The head is thrown away
afterwards; verification compares embeddings by cosine similarity.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import logging
import warnings

import numpy as np
import pandas as pd
from tqdm import tqdm

from . import defaults
from .errors import CalibrationError, TrainingError, ValidationError
from .extractor import build_extractor
from .utils import substream

logger = logging.getLogger(__name__)


class Adam(object):
    """
    Adam updates for a list of parameter arrays, in place.
    """
    def __init__(self, params, lr=defaults.TRAINING['lr'], beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        c1 = 1 - self.beta1 ** self.t
        c2 = 1 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= (self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)).astype(p.dtype)


def softmax_cross_entropy(logits, labels):
    """
    Mean cross-entropy and its gradient with respect to the logits.

    Args:
        logits (ndarray): (N, K).
        labels (ndarray): (N,) integer classes.

    Returns:
        tuple. (loss, dlogits).
    """
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    n = len(labels)
    loss = -log_probs[np.arange(n), labels].mean()
    dlogits = np.exp(log_probs)
    dlogits[np.arange(n), labels] -= 1
    return float(loss), dlogits / n


def embed(extractor, images, batch_size=256):
    """
    Embed many images, a chunk at a time.
    """
    chunks = [extractor.forward(images[i:i + batch_size]) for i in range(0, len(images), batch_size)]
    return np.concatenate(chunks) if chunks else np.zeros((0, extractor.embedding_dim))


def accuracy(extractor, train, test):
    """
    Identification accuracy of the embedding: each test image is assigned
    the identity whose mean training embedding is most similar.

    Args:
        extractor (FeatureExtractor): The model.
        train (Dataset): Gives the identity centroids.
        test (Dataset): Scored.

    Returns:
        float.
    """
    e_train = embed(extractor, train.images)
    ids = train.identities
    centroids = np.stack([e_train[train.labels == i].mean(axis=0) for i in ids])
    centroids /= np.maximum(np.linalg.norm(centroids, axis=1, keepdims=True), 1e-12)
    e_test = embed(extractor, test.images)
    predicted = ids[np.argmax(e_test @ centroids.T, axis=1)]
    return float(np.mean(predicted == test.labels))


def train_extractor(dataset,
                    arch='cnn-a',
                    epochs=defaults.TRAINING['epochs'],
                    lr=defaults.TRAINING['lr'],
                    seed=0,
                    batch_size=defaults.TRAINING['batch_size'],
                    embedding_dim=defaults.EMBEDDING_DIM,
                    logit_scale=defaults.TRAINING['logit_scale'],
                    validation=None,
                    verbose=True):
    """
    Train an extractor to separate the identities of a dataset.

    Args:
        dataset (Dataset): Training images and labels.
        arch (str): Architecture name.
        epochs (int): Passes over the data. 0 returns the initialized model.
        lr (float): Adam learning rate.
        seed (int): Seeds the initialization and the batch order.
        batch_size (int): Images per update.
        embedding_dim (int): D.
        logit_scale (float): Multiplies the cosine logits of the head.
        validation (Dataset): If given, held-out accuracy is recorded per epoch.
        verbose (bool): Show a progress bar.

    Returns:
        FeatureExtractor. With a `history` DataFrame of per-epoch loss and
            accuracy, unless epochs is 0.
    """
    if len(dataset) == 0:
        raise ValidationError("Cannot train on an empty dataset.")
    extractor = build_extractor(arch, input_shape=dataset.image_shape,
                                embedding_dim=embedding_dim, seed=seed)
    if epochs <= 0:
        return extractor

    classes = dataset.identities
    y = np.searchsorted(classes, dataset.labels)
    rng = substream(seed, 'training')

    params = [p.copy() for p in extractor.params]
    head_w = rng.normal(0, 0.01, size=(embedding_dim, len(classes))).astype(extractor.dtype)
    head_b = np.zeros(len(classes), dtype=extractor.dtype)
    optimizer = Adam(params + [head_w, head_b], lr=lr)

    history = []
    for epoch in tqdm(range(epochs), disable=not verbose, desc='Training {}'.format(arch)):
        order = rng.permutation(len(dataset))
        losses, correct = [], 0
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            model = extractor.with_params(params)
            e, caches = model.forward_with_cache(dataset.images[idx])
            logits = logit_scale * e @ head_w + head_b
            loss, dlogits = softmax_cross_entropy(logits, y[idx])
            if not np.isfinite(loss):
                raise TrainingError("Training loss is {} in epoch {}.".format(loss, epoch), epoch=epoch)

            de = logit_scale * dlogits @ head_w.T
            _, grads = model.backward(de, caches)
            grads += [logit_scale * e.T @ dlogits, dlogits.sum(axis=0)]
            optimizer.step(grads)

            losses.append(loss * len(idx))
            correct += int(np.sum(np.argmax(logits, axis=1) == y[idx]))

        row = {'epoch': epoch, 'loss': sum(losses) / len(dataset), 'accuracy': correct / len(dataset)}
        if validation is not None:
            row['val_accuracy'] = accuracy(extractor.with_params(params), dataset, validation)
        history.append(row)
        logger.info("Epoch %d: loss %.4f, accuracy %.3f", epoch, row['loss'], row['accuracy'])

    trained = extractor.with_params(params)
    trained.history = pd.DataFrame(history).set_index('epoch')
    return trained


class VerificationThreshold(object):
    """
    A cosine-similarity threshold for face verification.

    Args:
        tau (float): Pairs with similarity >= tau are accepted.
        target_far (float): The false-accept rate it was calibrated for.
        far (float): Empirical false-accept rate on the impostor pairs.
        gar (float): Empirical genuine-accept rate on the genuine pairs.
        n_impostor (int): Number of impostor pairs.
        n_genuine (int): Number of genuine pairs.
    """
    def __init__(self, tau, target_far=defaults.CALIBRATION['target_far'],
                 far=None, gar=None, n_impostor=None, n_genuine=None):
        self.tau = float(tau)
        self.target_far = float(target_far)
        self.far = far
        self.gar = gar
        self.n_impostor = n_impostor
        self.n_genuine = n_genuine

    def __repr__(self):
        return 'VerificationThreshold(tau={:.4f}, target_far={}, far={}, gar={})'.format(
            self.tau, self.target_far, self.far, self.gar)

    def __float__(self):
        return self.tau

    def accepts(self, similarity):
        return similarity >= self.tau

    def to_dict(self):
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, params):
        return cls(**params)


def _pairs(labels, n, rng, genuine):
    """
    Sample index pairs of the same (genuine) or different identities.
    """
    i = rng.integers(0, len(labels), size=n)
    j = rng.integers(0, len(labels), size=n)
    for _ in range(1000):
        bad = (labels[i] != labels[j]) if genuine else (labels[i] == labels[j])
        if genuine:
            bad |= i == j
        if not bad.any():
            break
        j[bad] = rng.integers(0, len(labels), size=bad.sum())
        if genuine:
            # Redraw both ends so singleton identities cannot stall.
            i[bad] = rng.integers(0, len(labels), size=bad.sum())
    return i, j


def _similarities(e, i, j):
    a, b = e[i].astype(np.float64), e[j].astype(np.float64)
    return np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))


def threshold_from_scores(impostor, target_far):
    """
    The smallest observed impostor score whose acceptance rate is within
    target_far. Just above the largest score if none is.

    Args:
        impostor (ndarray): Impostor-pair similarities.
        target_far (float): In [0, 1].

    Returns:
        float.
    """
    scores = np.sort(np.asarray(impostor, dtype=np.float64))
    allowed = np.floor(target_far * len(scores))
    candidates = np.unique(scores)
    # Number of scores >= each candidate.
    accepted = len(scores) - np.searchsorted(scores, candidates, side='left')
    ok = np.flatnonzero(accepted <= allowed)
    if ok.size:
        return float(candidates[ok[0]])
    return float(np.nextafter(scores[-1], np.inf))


def calibrate_threshold(extractor, dataset,
                        target_far=defaults.CALIBRATION['target_far'],
                        n_impostor=defaults.CALIBRATION['n_impostor'],
                        n_genuine=defaults.CALIBRATION['n_genuine'],
                        seed=0):
    """
    Choose tau so that at most target_far of sampled impostor pairs pass.

    Args:
        extractor (FeatureExtractor): The model.
        dataset (Dataset): Images of at least two identities.
        target_far (float): Target false-accept rate, in [0, 1].
        n_impostor (int): Impostor pairs to sample.
        n_genuine (int): Genuine pairs to sample, to report the accept rate.
        seed (int): Seeds the pair sampling.

    Returns:
        VerificationThreshold.
    """
    if not 0 <= target_far <= 1:
        raise CalibrationError("target_far must be in [0, 1], got {}.".format(target_far))
    if dataset.n_identities < 2:
        raise CalibrationError("Calibration needs at least 2 identities, got {}.".format(dataset.n_identities))

    e = embed(extractor, dataset.images)
    if np.all(np.ptp(e, axis=0) == 0):
        raise CalibrationError("Every image has the same embedding; no threshold separates them.")

    if 0 < target_far * n_impostor < 1:
        m = "{} impostor pairs are too few to measure a FAR of {}.".format(n_impostor, target_far)
        warnings.warn(m, stacklevel=2)

    rng = substream(seed, 'calibration')
    impostor = _similarities(e, *_pairs(dataset.labels, n_impostor, rng, genuine=False))
    genuine = _similarities(e, *_pairs(dataset.labels, n_genuine, rng, genuine=True))

    tau = threshold_from_scores(impostor, target_far)
    threshold = VerificationThreshold(
        tau, target_far,
        far=float(np.mean(impostor >= tau)),
        gar=float(np.mean(genuine >= tau)) if len(genuine) else None,
        n_impostor=int(n_impostor),
        n_genuine=int(n_genuine),
    )
    logger.info("Calibrated %r", threshold)
    return threshold
