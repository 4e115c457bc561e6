"""
Defines some default values.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""

IMAGE_SHAPE = (64, 64, 3)
EMBEDDING_DIM = 32

# Attack hyperparameters. `alpha` and `similarity_constant` depend on the
# mode and objective respectively; see ALPHA and SIMILARITY_CONSTANT.
ATTACK = {
    'variant': 'A4',
    'mode': 'patch_eyeglass',
    'objective': 'impersonation',
    'iterations': 300,
    'alpha': None,
    'ensemble_size': 8,
    'batch_constant': 10,
    'similarity_constant': None,
    'epsilon': 4 / 255,
    'p_fixed': 0.5,
    'seed': 0,
}

ALPHA = {
    'patch': 4 / 255,
    'imperceptible': 1 / 255,
}

SIMILARITY_CONSTANT = {
    'impersonation': 1.0,
    'dodging': 0.5,
}

# Step functions g1 and g2: l loses delta_l and h gains delta_h every
# `period` iterations, within [l_min, 1] and [1, h_max].
SCHEDULE = {
    'delta_l': 0.05,
    'delta_h': 0.05,
    'l_min': 0.5,
    'h_max': 1.5,
    'period': 10,
}

# Gaussian global scale and rectangle size used by the non-linear transforms
# during attack generation.
BRIGHTNESS = {
    'mu': 1.0,
    'sigma': 0.1,
    'area_frac_range': (0.1, 0.6),
}

# Range of the linear (whole-image) baseline transform.
LINEAR_RANGE = (0.5, 1.5)

# Patch noise starts mid-range.
INIT_NOISE = (0.4, 0.6)

# Fixed, attack-agnostic evaluation transform parameters.
EVAL_PARAMS = {
    'p': 1.0,
    'l': 0.5,
    'h': 1.5,
    'mu': 1.0,
    'sigma': 0.1,
    'area_frac_range': (0.1, 0.6),
}

N_TRIALS = 100

DATASET = {
    'n_identities': 32,
    'samples_per_identity': 64,
    'image_size': IMAGE_SHAPE,
    'max_shift': 4,
    'noise_sigma': 0.02,
    'brightness_jitter': (0.9, 1.1),
}

TRAINING = {
    'epochs': 15,
    'lr': 3e-3,
    'batch_size': 64,
    'logit_scale': 16.0,
    'holdout': 0.25,
}

CALIBRATION = {
    'target_far': 0.01,
    'n_impostor': 2000,
    'n_genuine': 2000,
}

# Reference patch geometry as fractions of (height, width):
# (top, bottom, left, right).
EYEGLASS_BOX = (19 / 64, 28 / 64, 4 / 64, 60 / 64)
STICKER_BOX = (2 / 64, 18 / 64, 24 / 64, 40 / 64)

VARIANTS = ('A1', 'A2', 'A3', 'A4')
MODES = ('patch_eyeglass', 'patch_sticker', 'imperceptible')
OBJECTIVES = ('impersonation', 'dodging')

# The attack matrix of the evaluate command.
REPORT = {
    'variants': list(VARIANTS),
    'modes': list(MODES),
    'objectives': list(OBJECTIVES),
    'n_instances': 10,
    'n_trials': N_TRIALS,
    'attack': {},
}
