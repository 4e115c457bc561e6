"""
The curriculum controller of the brightness-agnostic attack.

The attack starts with no brightness variation (p = 0, l = h = 1). Every
`period` iterations the uniform range [l, h] widens by one step, and at the
end of every window of N iterations the probability p is set from how well
the attack did over that window: p = max(0, K - mean window loss). A low
loss means the attack is ready for harder transforms.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import logging

from . import defaults
from .errors import ParameterError

logger = logging.getLogger(__name__)


class StepSchedule(object):
    """
    The step functions that widen the brightness range.

    Args:
        delta_l (float): Decrement of l per step.
        delta_h (float): Increment of h per step.
        l_min (float): Floor of l.
        h_max (float): Ceiling of h.
        period (int): Iterations between steps.
    """
    def __init__(self,
                 delta_l=defaults.SCHEDULE['delta_l'],
                 delta_h=defaults.SCHEDULE['delta_h'],
                 l_min=defaults.SCHEDULE['l_min'],
                 h_max=defaults.SCHEDULE['h_max'],
                 period=defaults.SCHEDULE['period']):
        self.delta_l = float(delta_l)
        self.delta_h = float(delta_h)
        self.l_min = float(l_min)
        self.h_max = float(h_max)
        self.period = int(period)

        if not 0 <= self.l_min <= 1 <= self.h_max:
            m = "Schedule needs 0 <= l_min <= 1 <= h_max, "
            m += "got l_min={}, h_max={}.".format(self.l_min, self.h_max)
            raise ParameterError(m)
        if self.delta_l < 0 or self.delta_h < 0:
            raise ParameterError("Schedule steps must be non-negative.")
        if self.period < 1:
            raise ParameterError("Schedule period must be at least 1, got {}.".format(self.period))

    def __repr__(self):
        return 'StepSchedule({})'.format(
            ', '.join('{}={}'.format(k, v) for k, v in self.to_dict().items()))

    def __eq__(self, other):
        return isinstance(other, StepSchedule) and self.to_dict() == other.to_dict()

    def to_dict(self):
        return {
            'delta_l': self.delta_l,
            'delta_h': self.delta_h,
            'l_min': self.l_min,
            'h_max': self.h_max,
            'period': self.period,
        }

    def g1(self, l):
        return max(self.l_min, l - self.delta_l)

    def g2(self, h):
        return min(self.h_max, h + self.delta_h)

    def apply(self, l, h, i):
        """
        The bounds after iteration i. They move once every `period`
        iterations, after iterations period - 1, 2 * period - 1, ...

        Args:
            l (float): Current lower bound.
            h (float): Current upper bound.
            i (int): The iteration just completed.

        Returns:
            tuple. (l, h).
        """
        if (i + 1) % self.period == 0:
            return self.g1(l), self.g2(h)
        return l, h


class CurriculumState(object):
    """
    The state carried between attack iterations.

    Args:
        l (float): Lower bound of the uniform brightness scale.
        h (float): Upper bound of the uniform brightness scale.
        p (float): Probability that BT fires. Held in [0, K]; clamp to
            [0, 1] before use, see `probability`.
        loss_cum (float): Mean ensemble losses summed over the window.
        iteration (int): Iterations completed.
    """
    def __init__(self, l=1.0, h=1.0, p=0.0, loss_cum=0.0, iteration=0):
        self.l = float(l)
        self.h = float(h)
        self.p = float(p)
        self.loss_cum = float(loss_cum)
        self.iteration = int(iteration)

    def __repr__(self):
        return 'CurriculumState(l={}, h={}, p={}, loss_cum={}, iteration={})'.format(
            self.l, self.h, self.p, self.loss_cum, self.iteration)

    def __eq__(self, other):
        return isinstance(other, CurriculumState) and self.as_dict() == other.as_dict()

    @property
    def probability(self):
        return min(1.0, max(0.0, self.p))

    def copy(self):
        return CurriculumState(**self.as_dict())

    def as_dict(self):
        return {
            'l': self.l,
            'h': self.h,
            'p': self.p,
            'loss_cum': self.loss_cum,
            'iteration': self.iteration,
        }


def curriculum_update(state, i, N, K, mean_loss, schedule):
    """
    Advance the curriculum after iteration i.

    At a window boundary (i != 0 and i % N == 0) p is recomputed from the
    average loss of the window that just ended, and the accumulator restarts
    from this iteration's loss. Otherwise this iteration's loss is added to
    the accumulator. The bounds are then stepped by the schedule.

    Args:
        state (CurriculumState): The state before the update. Not modified.
        i (int): The iteration just completed, from 0.
        N (int): Window length.
        K (float): Similarity constant.
        mean_loss (float): Mean adversarial loss over the ensemble at i.
        schedule (StepSchedule): Moves l and h.

    Returns:
        CurriculumState.
    """
    if i < 0:
        raise ParameterError("Iteration must be non-negative, got {}.".format(i))
    if N < 1:
        raise ParameterError("Window length N must be at least 1, got {}.".format(N))

    new = state.copy()
    if i != 0 and i % N == 0:
        new.p = max(0.0, K - state.loss_cum / N)
        new.loss_cum = float(mean_loss)
        logger.debug("Iteration %d: window loss %.4f, p -> %.4f", i, state.loss_cum / N, new.p)
    else:
        new.loss_cum = state.loss_cum + float(mean_loss)

    new.l, new.h = schedule.apply(state.l, state.h, i)
    new.iteration = i + 1
    return new
