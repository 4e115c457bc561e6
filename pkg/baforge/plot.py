"""
Module for plotting loss variation and attack traces.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import matplotlib.pyplot as plt

from .errors import BAForgeError

COLOURS = {
    'none': 'gray',
    'linear': 'C0',
    'nonlinear': 'C3',
}


class PlotError(BAForgeError):
    """
    Generic error class.
    """
    pass


def plot_loss_variation(profiles, ax=None, bins=30, width=6):
    """
    Histograms of the adversarial loss under each kind of transform.

    Args:
        profiles (list): LossVariationProfile objects, usually one per kind.
        ax (matplotlib.axes.Axes): An axes object to plot into. Will be
            returned. If you don't pass one, we'll create one and give
            back the `fig` that it's in.
        bins (int): Histogram bins.
        width (float): Width of the figure in inches.

    Returns:
        matplotlib.figure.Figure, or matplotlib.axes.Axes if you passed in
            an axes object as `ax`.
    """
    if not profiles:
        raise PlotError("Nothing to plot: no profiles given.")

    return_ax = ax is not None
    if ax is None:
        fig, ax = plt.subplots(figsize=(width, 0.6 * width))

    for profile in profiles:
        label = '{} (std {:.4f})'.format(profile.kind, profile.std)
        colour = COLOURS.get(profile.kind)
        if profile.std == 0:
            ax.axvline(profile.mean, color=colour, lw=2, label=label)
        else:
            ax.hist(profile.losses, bins=bins, color=colour, alpha=0.5, label=label)

    ax.set_xlabel('adversarial loss')
    ax.set_ylabel('samples')
    ax.grid(color='k', alpha=0.2)
    ax.legend()

    if return_ax:
        return ax
    plt.close(fig)
    return fig


def plot_loss_trace(result, ax=None, width=8):
    """
    The mean ensemble loss of an attack by iteration, with the brightness
    probability and range it was trained under on a second axis.

    Args:
        result (AttackResult): A finished attack.
        ax (matplotlib.axes.Axes): An axes object to plot into.
        width (float): Width of the figure in inches.

    Returns:
        matplotlib.figure.Figure, or matplotlib.axes.Axes if you passed in
            an axes object as `ax`.
    """
    trace = result.trace
    return_ax = ax is not None
    if ax is None:
        fig, ax = plt.subplots(figsize=(width, 0.5 * width))

    ax.plot(trace['iteration'], trace['loss'], 'k', label='loss')
    ax.set_xlabel('iteration')
    ax.set_ylabel('mean ensemble loss')
    ax.set_title('{} {} {}'.format(result.config.variant, result.config.mode, result.config.objective))

    twin = ax.twinx()
    twin.plot(trace['iteration'], trace['p'], 'C3', label='p')
    twin.fill_between(trace['iteration'], trace['l'], trace['h'], color='C0', alpha=0.2, lw=0, label='[l, h]')
    twin.set_ylabel('p, [l, h]')

    lines, labels = ax.get_legend_handles_labels()
    more, more_labels = twin.get_legend_handles_labels()
    ax.legend(lines + more, labels + more_labels, loc='upper right')

    if return_ax:
        return ax
    plt.close(fig)
    return fig
