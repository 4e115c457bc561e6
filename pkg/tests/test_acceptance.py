# -*- coding: utf 8 -*-
"""
Define a suite a tests for the desk-scale trends. These take minutes; run
them with:

    pytest -m slow
"""
import numpy as np
import pytest

from baforge.attack import AttackConfig, run_attack
from baforge.evaluation import (asr_reduction, eval_matrix, loss_variation_profile,
                                sample_pairs)
from baforge.masks import mask_for_mode
from baforge.synthetic import DatasetSpec, generate_dataset
from baforge.training import calibrate_threshold, embed, train_extractor
from baforge.utils import quantize

pytestmark = pytest.mark.slow

SHAPE = (32, 32, 3)
# Default T, N_b, N, K and schedule.
ATTACK = {'iterations': 300, 'ensemble_size': 8}


@pytest.fixture(scope='module')
def desk():
    """ Two trained models on a mid-sized dataset, with thresholds """
    spec = DatasetSpec(n_identities=12, samples_per_identity=24, image_size=SHAPE, max_shift=2)
    train, test = generate_dataset(spec, seed=0).split(0.25)
    kwargs = dict(epochs=15, lr=3e-3, batch_size=32, embedding_dim=32, verbose=False)
    models = {
        'cnn-a': train_extractor(train, arch='cnn-a', seed=0, **kwargs),
        'cnn-b': train_extractor(train, arch='cnn-b', seed=1, **kwargs),
    }
    thresholds = {name: calibrate_threshold(m, test, target_far=0.01) for name, m in models.items()}
    return models, train, test, thresholds


def test_identities_separate(desk):
    """
    Test genuine pairs are clearly more similar than impostor pairs.
    """
    models, _, test, _ = desk
    for model in models.values():
        e = embed(model, test.images)
        sim = e @ e.T
        same = test.labels[:, None] == test.labels[None, :]
        off = ~np.eye(len(e), dtype=bool)
        assert sim[same & off].mean() - sim[~same].mean() >= 0.2


def test_loss_variation_ordering(desk):
    """
    Test the non-linear transform varies the loss most, and none not at all.
    """
    models, _, test, _ = desk
    model = models['cnn-a']
    source, target = sample_pairs(test, 1, seed=5)[0]
    mask = mask_for_mode('patch_eyeglass', SHAPE)
    config = AttackConfig(variant='A1', iterations=50, ensemble_size=1)
    ax = run_attack(source, target, model, config, patch_mask=mask).adversarial
    reference = model.forward(target)

    std = {kind: loss_variation_profile(model, ax, reference, kind, n_samples=200,
                                        patch_mask=mask).std
           for kind in ('none', 'linear', 'nonlinear')}
    assert std['none'] == 0.0
    assert std['linear'] > 0
    assert std['nonlinear'] > 1.2 * std['linear']


def test_curriculum_beats_naive(desk):
    """
    Test the curriculum attack survives brightness changes better than naive
    PGD, and transfers worse than it attacks.
    """
    models, _, test, thresholds = desk
    report = eval_matrix(['A1', 'A2', 'A4'], ['patch_sticker'], ['impersonation'],
                         models['cnn-a'], models, test, thresholds,
                         n_instances=50, seed=0, n_trials=100, attack_overrides=ATTACK,
                         surrogate_name='cnn-a', verbose=False)
    asr = {v: report.cell(v, 'patch_sticker', 'impersonation', 'cnn-a')['asr'] for v in ('A1', 'A2', 'A4')}
    assert asr['A4'] >= asr['A1'] + 0.05
    assert asr['A4'] >= asr['A2']

    white = report.cells[report.cells.box == 'white'].asr.mean()
    black = report.cells[report.cells.box == 'black'].asr.mean()
    assert black <= white


def test_naive_is_brittle(desk):
    """
    Test naive attacks work undisturbed and lose ground under brightness
    changes.
    """
    models, _, test, thresholds = desk
    model, tau = models['cnn-a'], thresholds['cnn-a']
    mask = mask_for_mode('patch_eyeglass', SHAPE)
    # Identity copies all give the same gradient, so one is enough.
    config = AttackConfig(variant='A1', iterations=ATTACK['iterations'], ensemble_size=1)

    axes, references = [], []
    for k, (source, target) in enumerate(sample_pairs(test, 20, seed=2)):
        result = run_attack(source, target, model, config, patch_mask=mask, seed=k)
        axes.append(quantize(result.adversarial))
        references.append(model.forward(target))

    table = asr_reduction(axes, references, model, tau, 'impersonation',
                          kinds=('none', 'nonlinear'), patch_mask=mask)
    assert table.loc['none', 'asr'] >= 0.9
    assert table.loc['nonlinear', 'reduction'] >= 0.1
