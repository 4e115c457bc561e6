"""
Measuring attacks.

An adversarial example (AX) is scored by how often it still fools the
verifier under random brightness changes: the mean attack success rate
(ASR) over a fixed ensemble of evaluation transforms. The evaluation
transform parameters are the same for every attack variant.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import logging

import numpy as np
import pandas as pd
from tqdm import tqdm

from . import defaults
from .attack import AttackConfig, run_attack
from .defenses import apply_defenses, describe
from .errors import ParameterError, ValidationError
from .formats import dump_json, read_json, write_json
from .masks import mask_for_mode
from .tensor import clip, j_adv_batch, check_objective
from .transforms import BrightnessParams, KINDS, random_transform
from .utils import quantize, substream, derive_seed

logger = logging.getLogger(__name__)


def _reference(extractor, reference):
    """
    An embedding, given an embedding or an image.
    """
    reference = np.asarray(reference)
    if reference.ndim == 1:
        return reference
    return extractor.forward(reference)


def _similarities(embeddings, reference):
    e = np.asarray(embeddings, dtype=np.float64)
    r = np.asarray(reference, dtype=np.float64)
    return e @ r / (np.linalg.norm(e, axis=-1) * np.linalg.norm(r))


def _succeeds(similarity, tau, objective):
    if objective == 'impersonation':
        return similarity >= tau
    return similarity < tau


def verify(extractor, probe, reference_embedding, tau, objective):
    """
    Does a probe fool the verifier?

    Impersonation succeeds when the probe matches the reference, dodging
    when it does not.

    Args:
        extractor (FeatureExtractor): The verifier's model.
        probe (ndarray): (H, W, C) image.
        reference_embedding (ndarray): Target embedding for impersonation,
            clean source embedding for dodging.
        tau (float or VerificationThreshold): Match threshold.
        objective (str): 'impersonation' or 'dodging'.

    Returns:
        bool.
    """
    check_objective(objective)
    similarity = _similarities(extractor.forward(probe), reference_embedding)
    return bool(_succeeds(similarity, float(tau), objective))


def mean_asr(ax, reference, extractor, tau, objective,
             n_trials=defaults.N_TRIALS,
             eval_params=None,
             kind='nonlinear',
             patch_mask=None,
             defenses=None,
             seed=0,
             linear_range=defaults.LINEAR_RANGE):
    """
    Fraction of random brightness trials in which an AX fools the verifier.

    Each trial transforms the AX, clips it to [0, 1], applies any defenses
    and verifies it.

    Args:
        ax (ndarray): The adversarial image.
        reference (ndarray): Reference embedding, or an image to embed.
        extractor (FeatureExtractor): The model under attack.
        tau (float or VerificationThreshold): Match threshold.
        objective (str): 'impersonation' or 'dodging'.
        n_trials (int): Number of trials.
        eval_params (BrightnessParams): For 'nonlinear'. The fixed
            evaluation parameters if None.
        kind (str): 'none', 'linear' or 'nonlinear'.
        patch_mask (ndarray): Patch mask of a patch attack, so the
            non-linear transform takes its patch form.
        defenses (list): Applied to every probe, in order.
        seed (int): Seeds the trials.
        linear_range (tuple): For 'linear'.

    Returns:
        float. In [0, 1].
    """
    check_objective(objective)
    if n_trials < 1:
        raise ParameterError("n_trials must be at least 1, got {}.".format(n_trials))
    if kind not in KINDS:
        raise ParameterError("Unknown transform kind: {}. Kind must be one of {}.".format(kind, ', '.join(KINDS)))

    ax = np.asarray(ax)
    reference = _reference(extractor, reference)
    params = eval_params or BrightnessParams.evaluation()
    rng = substream(seed, 'evaluation')

    probes = np.stack([
        clip(random_transform(kind, ax, rng, params=params, patch_mask=patch_mask,
                              linear_range=linear_range).transformed)
        for _ in range(n_trials)
    ])
    probes = apply_defenses(probes, defenses)
    similarities = _similarities(extractor.forward(probes.astype(ax.dtype)), reference)
    return float(np.mean(_succeeds(similarities, float(tau), objective)))


def asr_reduction(axes, references, extractor, tau, objective,
                  kinds=KINDS, n_trials=defaults.N_TRIALS, patch_mask=None,
                  defenses=None, seed=0):
    """
    Mean ASR of the same AXs under each kind of evaluation transform.

    Args:
        axes (list): Adversarial images.
        references (list): One reference (embedding or image) per AX.
        extractor (FeatureExtractor): The model under attack.
        tau (float): Match threshold.
        objective (str): 'impersonation' or 'dodging'.
        kinds (tuple): Transform kinds to compare.
        n_trials (int): Trials per AX and kind.

    Returns:
        pd.DataFrame. Indexed by kind, with the mean ASR, its std over AXs
            and the drop relative to 'none'.
    """
    rows = []
    for kind in kinds:
        asrs = [mean_asr(ax, ref, extractor, tau, objective, n_trials=n_trials,
                         kind=kind, patch_mask=patch_mask, defenses=defenses,
                         seed=derive_seed(seed, k))
                for k, (ax, ref) in enumerate(zip(axes, references))]
        rows.append({'kind': kind, 'asr': float(np.mean(asrs)), 'std': float(np.std(asrs)),
                     'n_instances': len(asrs), 'n_trials': n_trials})
    table = pd.DataFrame(rows).set_index('kind')
    if 'none' in table.index:
        table['reduction'] = table.loc['none', 'asr'] - table['asr']
    return table


class EvaluationReport(object):
    """
    Mean ASRs of an attack matrix.

    Args:
        cells (pd.DataFrame): One row per (variant, mode, objective, model)
            with columns box ('white' or 'black'), surrogate, asr, std,
            n_instances and n_trials.
        metadata (dict): Seeds, configs, thresholds and defenses.
        instances (pd.DataFrame): The per-instance ASRs behind the cells.
    """
    KEYS = ['variant', 'mode', 'objective', 'model']

    def __init__(self, cells, metadata=None, instances=None):
        self.cells = cells
        self.metadata = metadata or {}
        self.instances = instances

    def __repr__(self):
        return 'EvaluationReport({} cells)'.format(len(self.cells))

    def __len__(self):
        return len(self.cells)

    def cell(self, variant, mode, objective, model):
        """
        One row of the report as a dict.
        """
        c = self.cells
        row = c[(c.variant == variant) & (c['mode'] == mode) & (c.objective == objective) & (c.model == model)]
        if row.empty:
            raise KeyError((variant, mode, objective, model))
        return row.iloc[0].to_dict()

    def table(self, value='asr'):
        """
        The report as a table: rows are mode and model, columns objective
        and variant.
        """
        return self.cells.pivot_table(index=['mode', 'model'], columns=['objective', 'variant'],
                                      values=value, aggfunc='first')

    def to_dict(self):
        return {'metadata': self.metadata, 'cells': self.cells.to_dict(orient='records')}

    def to_json(self, path=None):
        """
        Serialize as JSON. Writes to path if given, otherwise returns the text.
        """
        if path is None:
            return dump_json(self.to_dict())
        write_json(path, self.to_dict())

    def to_csv(self, path=None):
        """
        One row per cell.
        """
        return self.cells.to_csv(path, index=False)

    @classmethod
    def from_json(cls, source):
        data = read_json(source)
        try:
            return cls(pd.DataFrame(data['cells']), data.get('metadata', {}))
        except KeyError:
            raise ValidationError("A report needs a 'cells' list.")


def sample_pairs(dataset, n, seed=0):
    """
    Source and target images of different identities.

    Args:
        dataset (Dataset): Held-out images.
        n (int): Number of pairs.
        seed (int): Seeds the choice.

    Returns:
        list. (source, target) image tuples.
    """
    if dataset.n_identities < 2:
        raise ValidationError("Attack pairs need at least 2 identities.")
    rng = substream(seed, 'pairs')
    pairs = []
    for _ in range(n):
        s, t = rng.choice(dataset.identities, size=2, replace=False)
        source = dataset.of(s)[rng.integers(len(dataset.of(s)))]
        target = dataset.of(t)[rng.integers(len(dataset.of(t)))]
        pairs.append((source, target))
    return pairs


def eval_matrix(variants, modes, objectives, surrogate, targets, dataset, thresholds,
                n_instances=1, seed=0, n_trials=defaults.N_TRIALS,
                attack_overrides=None, defenses=None, surrogate_name='surrogate',
                patch_masks=None, verbose=True):
    """
    Attack every instance with every variant and score the AXs on every model.

    Attacks are generated on the surrogate. The surrogate's own cells are
    white-box; every other model gives black-box cells. All variants attack
    the same source/target pairs with the same seeds.

    Args:
        variants (list): Variant names.
        modes (list): Mode names.
        objectives (list): Objective names.
        surrogate (FeatureExtractor): The model attacked.
        targets (dict): Name to FeatureExtractor of every model to score on.
            Include the surrogate under `surrogate_name` for white-box cells.
        dataset (Dataset): Held-out images to draw pairs from.
        thresholds (dict): Name to tau of every model in targets.
        n_instances (int): Source/target pairs per cell.
        seed (int): Master seed.
        n_trials (int): Evaluation trials per AX.
        attack_overrides (dict): AttackConfig fields to change from defaults.
        defenses (list): Applied to every probe.
        surrogate_name (str): Name of the surrogate in targets.
        patch_masks (dict): Mode to patch mask. Reference masks if None.
        verbose (bool): Show a progress bar.

    Returns:
        EvaluationReport.
    """
    overrides = dict(attack_overrides or {})
    for key in ('variant', 'mode', 'objective', 'seed'):
        overrides.pop(key, None)
    missing = set(targets) - set(thresholds)
    if missing:
        raise ValidationError("No threshold for models: {}.".format(', '.join(sorted(missing))))

    pairs = sample_pairs(dataset, n_instances, seed)
    rows = []
    total = len(variants) * len(modes) * len(objectives) * n_instances
    progress = tqdm(total=total, disable=not verbose, desc='Attacks')

    for mode in modes:
        mask = (patch_masks or {}).get(mode)
        if mask is None:
            mask = mask_for_mode(mode, dataset.image_shape)
        for objective in objectives:
            for variant in variants:
                config = AttackConfig.from_dict(dict(overrides, variant=variant, mode=mode,
                                                     objective=objective, seed=seed))
                for k, (source, target) in enumerate(pairs):
                    run_seed = derive_seed(seed, k)
                    aim = target if objective == 'impersonation' else None
                    result = run_attack(source, aim, surrogate, config, patch_mask=mask, seed=run_seed)
                    ax = quantize(result.adversarial)
                    for name, model in targets.items():
                        reference = target if objective == 'impersonation' else source
                        asr = mean_asr(ax, reference, model, thresholds[name], objective,
                                       n_trials=n_trials, patch_mask=mask, defenses=defenses,
                                       seed=run_seed)
                        rows.append({'variant': variant, 'mode': mode, 'objective': objective,
                                     'model': name, 'instance': k, 'asr': asr,
                                     'box': 'white' if name == surrogate_name else 'black'})
                    progress.update()
    progress.close()

    instances = pd.DataFrame(rows, columns=EvaluationReport.KEYS + ['instance', 'asr', 'box'])
    grouped = instances.groupby(EvaluationReport.KEYS + ['box'], sort=False)['asr']
    cells = grouped.agg(asr='mean', std=lambda a: float(np.std(a)), n_instances='count').reset_index()
    cells['surrogate'] = surrogate_name
    cells['n_trials'] = n_trials

    metadata = {
        'seed': seed,
        'n_instances': n_instances,
        'n_trials': n_trials,
        'surrogate': surrogate_name,
        'targets': list(targets),
        'thresholds': {name: float(t) for name, t in thresholds.items()},
        'attack': AttackConfig.from_dict(overrides).to_dict(),
        'eval_params': defaults.EVAL_PARAMS,
        'defenses': describe(defenses),
    }
    for _, c in cells.iterrows():
        logger.info("%s %s %s on %s: ASR %.3f", c.variant, c['mode'], c.objective, c.model, c.asr)
    return EvaluationReport(cells, metadata, instances)


class LossVariationProfile(object):
    """
    Spread of the adversarial loss over random transforms of one image.

    Args:
        kind (str): The transform kind.
        losses (ndarray): Loss of every sample.
    """
    def __init__(self, kind, losses):
        self.kind = kind
        self.losses = np.asarray(losses, dtype=np.float64)

    def __repr__(self):
        return 'LossVariationProfile(kind={}, n_samples={}, mean={:.4f}, std={:.4f})'.format(
            self.kind, self.n_samples, self.mean, self.std)

    @property
    def n_samples(self):
        return len(self.losses)

    @property
    def mean(self):
        return float(np.mean(self.losses))

    @property
    def std(self):
        if np.all(self.losses == self.losses[0]):
            return 0.0
        return float(np.std(self.losses))

    @property
    def min(self):
        return float(np.min(self.losses))

    @property
    def max(self):
        return float(np.max(self.losses))

    def summary(self):
        return {'kind': self.kind, 'n_samples': self.n_samples, 'mean': self.mean,
                'std': self.std, 'min': self.min, 'max': self.max}


def loss_variation_profile(extractor, image, reference_embedding, kind,
                           n_samples=200, params=None, patch_mask=None,
                           objective='impersonation', seed=0,
                           linear_range=defaults.LINEAR_RANGE):
    """
    Adversarial loss of an image under n random transforms of one kind.

    Args:
        extractor (FeatureExtractor): The model.
        image (ndarray): Usually an adversarial image mid-attack.
        reference_embedding (ndarray): As for the attack objective.
        kind (str): 'none', 'linear' or 'nonlinear'.
        n_samples (int): Number of draws.
        params (BrightnessParams): For 'nonlinear'. Evaluation parameters if
            None.
        patch_mask (ndarray): Use the patch form of the non-linear transform.
        objective (str): Which loss.
        seed (int): Seeds the draws.

    Returns:
        LossVariationProfile.
    """
    if kind not in KINDS:
        raise ParameterError("Unknown transform kind: {}. Kind must be one of {}.".format(kind, ', '.join(KINDS)))
    if n_samples < 1:
        raise ParameterError("n_samples must be at least 1, got {}.".format(n_samples))

    image = np.asarray(image)
    reference = _reference(extractor, reference_embedding)
    params = params or BrightnessParams.evaluation()
    rng = substream(seed, 'profile')

    losses, cache = [], {}
    for _ in range(n_samples):
        probe = clip(random_transform(kind, image, rng, params=params, patch_mask=patch_mask,
                                      linear_range=linear_range).transformed).astype(image.dtype)
        key = probe.tobytes()
        if key not in cache:
            # One image at a time so equal probes give equal losses.
            loss, _ = j_adv_batch(extractor.forward(probe)[None], reference, objective)
            cache[key] = float(loss[0])
        losses.append(cache[key])
    return LossVariationProfile(kind, losses)


def loss_variation_profiles(extractor, images, references, kinds=KINDS, n_samples=200,
                            params=None, patch_mask=None, objective='impersonation', seed=0):
    """
    Loss variation of several images under several transform kinds.

    Returns:
        pd.DataFrame. One row per image and kind, with the profile summary.
    """
    rows = []
    for k, (image, reference) in enumerate(zip(images, references)):
        for kind in kinds:
            profile = loss_variation_profile(extractor, image, reference, kind, n_samples=n_samples,
                                             params=params, patch_mask=patch_mask,
                                             objective=objective, seed=derive_seed(seed, k))
            rows.append(dict(image=k, **profile.summary()))
    return pd.DataFrame(rows)


def report_config(params=None):
    """
    Check a report config and fill in its defaults.

    Args:
        params (dict): Any of variants, modes, objectives, n_instances,
            n_trials and attack (AttackConfig fields to override).

    Returns:
        dict.
    """
    params = dict(params or {})
    unknown = set(params) - set(defaults.REPORT)
    if unknown:
        m = "Unknown report config fields: {}. ".format(', '.join(sorted(unknown)))
        m += "Valid fields are {}.".format(', '.join(defaults.REPORT))
        raise ValidationError(m)
    config = dict(defaults.REPORT, **params)

    for key, valid in (('variants', defaults.VARIANTS), ('modes', defaults.MODES), ('objectives', defaults.OBJECTIVES)):
        values = config[key]
        if isinstance(values, str) or not values:
            raise ValidationError("{} must be a non-empty list.".format(key))
        bad = [v for v in values if v not in valid]
        if bad:
            raise ValidationError("Unknown {}: {}. Valid values are {}.".format(key, ', '.join(bad), ', '.join(valid)))
    for key in ('n_instances', 'n_trials'):
        if int(config[key]) < 1:
            raise ValidationError("{} must be at least 1, got {}.".format(key, config[key]))
    # Fails early on a bad override.
    AttackConfig.from_dict(dict(config['attack']))
    return config
