# -*- coding: utf 8 -*-
"""
Define a suite a tests for the plots.
"""
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import pytest

from baforge.attack import AttackConfig, run_attack
from baforge.evaluation import LossVariationProfile
from baforge.plot import plot_loss_variation, plot_loss_trace, PlotError


def test_plot_loss_variation():
    """
    Test a figure comes back, or the axes if given.
    """
    profiles = [LossVariationProfile('none', [0.4] * 10),
                LossVariationProfile('nonlinear', [0.1, 0.3, 0.5, 0.2])]
    fig = plot_loss_variation(profiles)
    assert isinstance(fig, plt.Figure)
    labels = fig.axes[0].get_legend_handles_labels()[1]
    assert labels[0].startswith('none (std 0.0000)')

    _, ax = plt.subplots()
    assert plot_loss_variation(profiles, ax=ax) is ax
    plt.close('all')

    with pytest.raises(PlotError):
        plot_loss_variation([])


def test_plot_loss_trace(extractor, image, patch_mask):
    """
    Test the trace plot of a short attack.
    """
    config = AttackConfig(variant='A4', iterations=4, ensemble_size=1)
    result = run_attack(image, image[::-1], extractor, config, patch_mask=patch_mask)
    fig = plot_loss_trace(result)
    assert isinstance(fig, plt.Figure)
    assert 'A4' in fig.axes[0].get_title()
    _, ax = plt.subplots()
    assert plot_loss_trace(result, ax=ax) is ax
    plt.close('all')
