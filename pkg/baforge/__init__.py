"""
==================
baforge
==================
"""
from .extractor import FeatureExtractor, build_extractor, forward, input_gradient
from .transforms import BrightnessParams
from .curriculum import StepSchedule, CurriculumState, curriculum_update
from .attack import AttackConfig, AttackResult, run_attack
from .synthetic import DatasetSpec, Dataset, generate_dataset
from .training import train_extractor, calibrate_threshold, VerificationThreshold
from .evaluation import verify, mean_asr, eval_matrix, EvaluationReport, loss_variation_profile
from .formats import load_extractor, save_extractor, read_ppm, write_ppm
from .masks import mask_for_mode, reference_mask
from . import defenses
from . import defaults
from . import transforms


def read_weights(path):
    """
    A package namespace method to be called as `baforge.read_weights`.

    Just wraps `formats.load_extractor()`.

    Args:
        path (str): A BAF1 weights file.

    Returns:
        baforge.FeatureExtractor.
    """
    return load_extractor(path)


__all__ = [
           'FeatureExtractor',
           'BrightnessParams',
           'StepSchedule',
           'CurriculumState',
           'AttackConfig',
           'AttackResult',
           'DatasetSpec',
           'Dataset',
           'VerificationThreshold',
           'EvaluationReport',
           'build_extractor',
           'forward',
           'input_gradient',
           'curriculum_update',
           'run_attack',
           'generate_dataset',
           'train_extractor',
           'calibrate_threshold',
           'verify',
           'mean_asr',
           'eval_matrix',
           'loss_variation_profile',
           'read_ppm',
           'write_ppm',
           'read_weights',
           'mask_for_mode',
           'reference_mask',
           'defenses',
           'transforms',
          ]


from importlib import metadata

try:
    __version__ = metadata.version('ba-forge')
except metadata.PackageNotFoundError:
    __version__ = '0.0.0'
