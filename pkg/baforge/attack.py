"""
Attack engines.

Four variants share one projected-gradient loop and differ only in the
transforms applied to the ensemble copies at each step:

- A1: no transform (naive PGD).
- A2: linear whole-image brightness.
- A3: the composed non-linear transform with fixed p and [l, h].
- A4: the composed non-linear transform driven by the curriculum.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import logging
import warnings

import numpy as np
import pandas as pd

from . import defaults
from .curriculum import StepSchedule, CurriculumState, curriculum_update
from .errors import ValidationError, ParameterError, ShapeError, NumericFailure
from .formats import read_json
from .masks import mask_for_mode
from .tensor import check_image, clip, j_adv_batch
from .transforms import BrightnessParams, identity, linear_brightness, random_transform
from .utils import sign, substream

logger = logging.getLogger(__name__)

FIELDS = ('variant', 'mode', 'objective', 'iterations', 'alpha', 'ensemble_size',
          'batch_constant', 'similarity_constant', 'epsilon', 'schedule', 'p_fixed',
          'seed', 'brightness', 'linear_range', 'allow_epsilon_override')


class AttackConfig(object):
    """
    Everything that defines one attack run.

    Args:
        variant (str): 'A1', 'A2', 'A3' or 'A4'.
        mode (str): 'patch_eyeglass', 'patch_sticker' or 'imperceptible'.
        objective (str): 'impersonation' or 'dodging'.
        iterations (int): T, the number of PGD steps.
        alpha (float): Step size. Default depends on mode.
        ensemble_size (int): N_b, transformed copies per step.
        batch_constant (int): N, iterations per curriculum window.
        similarity_constant (float): K. Default depends on objective.
        epsilon (float): L-infinity bound in imperceptible mode.
        schedule (StepSchedule or dict): Steps of the brightness range.
        p_fixed (float): Probability of BT for A3.
        seed (int): Master seed of the run.
        brightness (dict): mu, sigma and area_frac_range of the non-linear
            transforms.
        linear_range (tuple): Range of the A2 transform.
        allow_epsilon_override (bool): Permit an epsilon other than 4/255 in
            imperceptible mode.
    """
    def __init__(self,
                 variant=defaults.ATTACK['variant'],
                 mode=defaults.ATTACK['mode'],
                 objective=defaults.ATTACK['objective'],
                 iterations=defaults.ATTACK['iterations'],
                 alpha=None,
                 ensemble_size=defaults.ATTACK['ensemble_size'],
                 batch_constant=defaults.ATTACK['batch_constant'],
                 similarity_constant=None,
                 epsilon=defaults.ATTACK['epsilon'],
                 schedule=None,
                 p_fixed=defaults.ATTACK['p_fixed'],
                 seed=defaults.ATTACK['seed'],
                 brightness=None,
                 linear_range=defaults.LINEAR_RANGE,
                 allow_epsilon_override=False):

        if variant not in defaults.VARIANTS:
            raise ValidationError("Unknown variant: {}. Variant must be one of {}.".format(
                variant, ', '.join(defaults.VARIANTS)))
        if mode not in defaults.MODES:
            raise ValidationError("Unknown mode: {}. Mode must be one of {}.".format(
                mode, ', '.join(defaults.MODES)))
        if objective not in defaults.OBJECTIVES:
            raise ValidationError("Unknown objective: {}. Objective must be one of {}.".format(
                objective, ', '.join(defaults.OBJECTIVES)))

        self.variant = variant
        self.mode = mode
        self.objective = objective
        self.iterations = int(iterations)
        if alpha is None:
            alpha = defaults.ALPHA['imperceptible' if mode == 'imperceptible' else 'patch']
        self.alpha = float(alpha)
        self.ensemble_size = int(ensemble_size)
        self.batch_constant = int(batch_constant)
        if similarity_constant is None:
            similarity_constant = defaults.SIMILARITY_CONSTANT[objective]
        self.similarity_constant = float(similarity_constant)
        self.epsilon = float(epsilon)
        self.p_fixed = float(p_fixed)
        self.seed = int(seed)
        self.allow_epsilon_override = bool(allow_epsilon_override)
        self.linear_range = tuple(float(v) for v in linear_range)

        brightness = dict(defaults.BRIGHTNESS, **(brightness or {}))
        brightness['area_frac_range'] = tuple(float(f) for f in brightness['area_frac_range'])
        self.brightness = brightness

        try:
            if schedule is None:
                schedule = StepSchedule()
            elif isinstance(schedule, dict):
                unknown = set(schedule) - set(defaults.SCHEDULE)
                if unknown:
                    raise ValidationError("Unknown schedule fields: {}.".format(', '.join(sorted(unknown))))
                schedule = StepSchedule(**schedule)
            self.schedule = schedule
            # Checks the brightness fields and linear range too.
            self.brightness_params()
            if not 0 <= self.linear_range[0] <= self.linear_range[1]:
                raise ParameterError("linear_range must satisfy 0 <= a <= b, got {}.".format(self.linear_range))
        except ParameterError as e:
            raise ValidationError(str(e))

        self._validate()

    def _validate(self):
        if self.iterations < 1:
            raise ValidationError("iterations must be positive, got {}.".format(self.iterations))
        if self.ensemble_size < 1:
            raise ValidationError("ensemble_size must be at least 1, got {}.".format(self.ensemble_size))
        if self.batch_constant < 1:
            raise ValidationError("batch_constant must be at least 1, got {}.".format(self.batch_constant))
        if self.alpha <= 0:
            raise ValidationError("alpha must be positive, got {}.".format(self.alpha))
        if self.similarity_constant < 0:
            raise ValidationError("similarity_constant must be non-negative, got {}.".format(self.similarity_constant))
        if not 0 <= self.p_fixed <= 1:
            raise ValidationError("p_fixed must be in [0, 1], got {}.".format(self.p_fixed))
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive, got {}.".format(self.epsilon))
        if self.is_imperceptible and not self.allow_epsilon_override:
            if not np.isclose(self.epsilon, 4 / 255, rtol=0, atol=1e-9):
                m = "Imperceptible attacks use epsilon = 4/255, got {}. ".format(self.epsilon)
                m += "Set allow_epsilon_override to use another bound."
                raise ValidationError(m)

    def __repr__(self):
        return 'AttackConfig({})'.format(
            ', '.join('{}={!r}'.format(k, v) for k, v in self.to_dict().items()))

    def __eq__(self, other):
        return isinstance(other, AttackConfig) and self.to_dict() == other.to_dict()

    @property
    def is_imperceptible(self):
        return self.mode == 'imperceptible'

    def brightness_params(self, p=None, l=None, h=None):
        """
        The non-linear transform parameters for this run. A3 uses p_fixed
        and the widest range of the schedule unless told otherwise.
        """
        return BrightnessParams(
            p=self.p_fixed if p is None else p,
            l=self.schedule.l_min if l is None else l,
            h=self.schedule.h_max if h is None else h,
            **self.brightness,
        )

    def replace(self, **kwargs):
        """
        A copy with some fields changed.
        """
        params = self.to_dict()
        params.update(kwargs)
        return AttackConfig.from_dict(params)

    def to_dict(self):
        return {
            'variant': self.variant,
            'mode': self.mode,
            'objective': self.objective,
            'iterations': self.iterations,
            'alpha': self.alpha,
            'ensemble_size': self.ensemble_size,
            'batch_constant': self.batch_constant,
            'similarity_constant': self.similarity_constant,
            'epsilon': self.epsilon,
            'schedule': self.schedule.to_dict(),
            'p_fixed': self.p_fixed,
            'seed': self.seed,
            'brightness': {
                'mu': self.brightness['mu'],
                'sigma': self.brightness['sigma'],
                'area_frac_range': list(self.brightness['area_frac_range']),
            },
            'linear_range': list(self.linear_range),
            'allow_epsilon_override': self.allow_epsilon_override,
        }

    @classmethod
    def from_dict(cls, params):
        """
        Make a config from a dict using the JSON field names. Missing fields
        take their defaults.
        """
        if not isinstance(params, dict):
            raise ValidationError("An attack config must be a JSON object, got {}.".format(type(params).__name__))
        unknown = set(params) - set(FIELDS)
        if unknown:
            m = "Unknown attack config fields: {}. ".format(', '.join(sorted(unknown)))
            m += "Valid fields are {}.".format(', '.join(FIELDS))
            raise ValidationError(m)
        if 'brightness' in params:
            extra = set(params['brightness'] or {}) - set(defaults.BRIGHTNESS)
            if extra:
                raise ValidationError("Unknown brightness fields: {}.".format(', '.join(sorted(extra))))
        try:
            return cls(**params)
        except (TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise ValidationError("Bad attack config: {}".format(e))

    @classmethod
    def from_json(cls, source):
        """
        Make a config from a JSON file or string.
        """
        return cls.from_dict(read_json(source))


class AttackResult(object):
    """
    What an attack run produces.

    Args:
        adversarial (ndarray): The adversarial image, in [0, 1].
        trace (pd.DataFrame): One row per iteration: iteration, loss (mean
            over the ensemble), p, l and h as used at that iteration, and
            loss_cum after it.
        state (CurriculumState): The final curriculum state.
        samples (pd.DataFrame): The realized transform draws, one row per
            ensemble member per iteration.
        config (AttackConfig): The config of the run.
    """
    def __init__(self, adversarial, trace, state, samples, config):
        self.adversarial = adversarial
        self.trace = trace
        self.state = state
        self.samples = samples
        self.config = config

    def __repr__(self):
        return 'AttackResult(variant={}, iterations={}, final_loss={:.4f})'.format(
            self.config.variant, len(self.trace), self.final_loss)

    @property
    def initial_loss(self):
        return float(self.trace['loss'].iloc[0])

    @property
    def final_loss(self):
        return float(self.trace['loss'].iloc[-1])


def init_patch(source, noise, M_p):
    """
    The starting image of a patch attack: the source outside the patch,
    noise inside it.

    Args:
        source (ndarray): The clean image.
        noise (ndarray): Initial patch content, in [0, 1].
        M_p (ndarray): Patch mask.

    Returns:
        ndarray.
    """
    source = np.asarray(source)
    if np.shape(noise) != source.shape or np.shape(M_p) != source.shape:
        m = "Source {}, noise {} and mask {} must have the same shape.".format(
            source.shape, np.shape(noise), np.shape(M_p))
        raise ShapeError(m)
    return np.where(np.asarray(M_p) > 0, noise, source).astype(source.dtype)


def pgd_step(x, grad, alpha):
    """
    One signed gradient step down the loss, clipped to [0, 1].

    Args:
        x (ndarray): Current image.
        grad (ndarray): Gradient of the loss with respect to x.
        alpha (float): Step size.

    Returns:
        ndarray.
    """
    x = np.asarray(x)
    if np.shape(grad) != x.shape:
        raise ShapeError("Gradient {} does not match image {}.".format(np.shape(grad), x.shape))
    return clip(x - alpha * sign(grad)).astype(x.dtype)


def _draw(config, x, rng, state, patch_mask):
    """
    One transformed copy of x for the variant in hand.
    """
    if config.variant == 'A1':
        return identity(x)
    if config.variant == 'A2':
        return linear_brightness(x, config.linear_range, rng)
    if config.variant == 'A3':
        params = config.brightness_params()
    else:
        params = config.brightness_params(p=state.probability, l=state.l, h=state.h)
    return random_transform('nonlinear', x, rng, params=params, patch_mask=patch_mask)


def run_attack(source, target, extractor, config, patch_mask=None, seed=None, callback=None):
    """
    Generate an adversarial example.

    Each iteration draws N_b transformed copies of the current image, sums
    the gradients of the adversarial loss through every copy, takes a signed
    step and projects: patch attacks only change pixels inside the patch,
    imperceptible attacks stay within epsilon of the source.

    Args:
        source (ndarray): The attacker's clean (H, W, C) image.
        target (ndarray): The image to impersonate. Ignored for dodging,
            where the clean source is the reference.
        extractor: Anything with `forward(batch)` and
            `input_gradient(batch, upstream)`, like a FeatureExtractor.
        config (AttackConfig): The run.
        patch_mask (ndarray): Patch mask for patch modes. The reference
            mask of the mode if None.
        seed (int): Overrides `config.seed`.
        callback (callable): Called as callback(i, x, state) after every
            iteration with the updated image.

    Returns:
        AttackResult.
    """
    source = check_image(source)
    if source.ndim != 3:
        raise ShapeError("run_attack takes one (H, W, C) image, got shape {}.".format(source.shape))
    seed = config.seed if seed is None else int(seed)
    dtype = getattr(extractor, 'dtype', source.dtype)
    src = source.astype(dtype)

    if config.objective == 'dodging':
        if target is not None and not np.array_equal(target, source):
            warnings.warn("Dodging uses the clean source as reference; ignoring target.", stacklevel=2)
        reference = extractor.forward(src)
    else:
        if target is None:
            raise ParameterError("Impersonation needs a target image.")
        reference = extractor.forward(np.asarray(target, dtype=dtype))

    init = substream(seed, 'init')
    if config.is_imperceptible:
        patch_mask = None
        x = src.copy()
    else:
        if patch_mask is None:
            patch_mask = mask_for_mode(config.mode, src.shape)
        if np.shape(patch_mask) != src.shape:
            m = "Patch mask {} does not match image {}.".format(np.shape(patch_mask), src.shape)
            raise ShapeError(m)
        patch_mask = np.asarray(patch_mask, dtype=dtype)
        noise = init.uniform(*defaults.INIT_NOISE, size=src.shape).astype(dtype)
        x = init_patch(src, noise, patch_mask)
    inside = None if patch_mask is None else patch_mask > 0

    rng = substream(seed, 'ensemble')
    state = CurriculumState()
    schedule = config.schedule
    rows, samples = [], []
    warned = False

    for i in range(config.iterations):
        draws = [_draw(config, x, rng, state, patch_mask) for _ in range(config.ensemble_size)]
        batch = np.stack([d.transformed for d in draws]).astype(dtype)
        coeffs = np.stack([d.coeff for d in draws]).astype(dtype)

        embeddings = extractor.forward(batch)
        losses, upstream = j_adv_batch(embeddings, reference, config.objective)
        grad = np.sum(coeffs * extractor.input_gradient(batch, upstream), axis=0)

        if not (np.all(np.isfinite(losses)) and np.all(np.isfinite(grad))):
            raise NumericFailure("Non-finite loss or gradient at iteration {}.".format(i), iteration=i)
        mean_loss = float(np.mean(losses))

        used = {'p': state.probability, 'l': state.l, 'h': state.h}
        if config.variant == 'A3':
            used = {'p': config.p_fixed, 'l': schedule.l_min, 'h': schedule.h_max}
        elif config.variant in ('A1', 'A2'):
            used = {'p': 0.0, 'l': 1.0, 'h': 1.0}

        x = pgd_step(x, grad, config.alpha)
        if inside is not None:
            x = np.where(inside, x, src)
        else:
            x = clip(src + np.clip(x - src, -config.epsilon, config.epsilon)).astype(dtype)

        if config.variant == 'A4':
            state = curriculum_update(state, i, config.batch_constant,
                                      config.similarity_constant, mean_loss, schedule)
            if state.p > 1 and not warned:
                warnings.warn("Curriculum p reached {:.3f}; clamped to 1 when used.".format(state.p), stacklevel=2)
                warned = True
        else:
            state.loss_cum += mean_loss
            state.iteration = i + 1

        rows.append(dict(iteration=i, loss=mean_loss, loss_cum=state.loss_cum, **used))
        for j, d in enumerate(draws):
            samples.append(dict(iteration=i, member=j, **d.draws))

        if callback is not None:
            callback(i, x, state)

    trace = pd.DataFrame(rows, columns=['iteration', 'loss', 'p', 'l', 'h', 'loss_cum'])
    logger.info("%s %s %s: loss %.4f -> %.4f over %d iterations",
                config.variant, config.mode, config.objective,
                trace['loss'].iloc[0], trace['loss'].iloc[-1], config.iterations)

    return AttackResult(x, trace, state, pd.DataFrame(samples), config)
