"""
Image and embedding arithmetic.

Images are float arrays shaped (H, W, C) with values in [0, 1]; batches are
(N, H, W, C). Embeddings are float vectors of length D.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import numpy as np

from .errors import ShapeError, DegenerateInputError, ParameterError

OBJECTIVES = ('impersonation', 'dodging')


def check_image(image, shape=None):
    """
    Check that an array looks like an image (or a batch of images).

    Args:
        image (ndarray): (H, W, C) or (N, H, W, C).
        shape (tuple): Optional (H, W, C) the image must have.

    Returns:
        ndarray. The input as an array.
    """
    image = np.asarray(image)
    if image.ndim not in (3, 4):
        m = "Expected an (H, W, C) image or an (N, H, W, C) batch, "
        m += "got shape {}.".format(image.shape)
        raise ShapeError(m)
    if shape is not None and tuple(image.shape[-3:]) != tuple(shape):
        m = "Image shape {} does not match expected {}.".format(image.shape[-3:], tuple(shape))
        raise ShapeError(m)
    return image


def clip(image):
    """
    Clip to the valid intensity range [0, 1].
    """
    return np.clip(image, 0, 1)


def cosine_similarity(a, b):
    """
    Cosine similarity of two embeddings.

    Args:
        a (ndarray): Embedding of length D.
        b (ndarray): Embedding of length D.

    Returns:
        float. In [-1, 1].
    """
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError("Embeddings differ in shape: {} and {}.".format(a.shape, b.shape))
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DegenerateInputError("Cosine similarity is undefined for a zero-norm vector.")
    return float(np.clip(a @ b / (na * nb), -1, 1))


def check_objective(objective):
    if objective not in OBJECTIVES:
        m = "Unknown objective: {}. ".format(objective)
        m += "Objective must be one of {}.".format(', '.join(OBJECTIVES))
        raise ParameterError(m)


def j_adv(probe, reference, mode):
    """
    The adversarial loss. Lower is better for the attacker in both modes.

    Impersonation: 1 - cos(probe, reference).
    Dodging: cos(probe, reference).

    Args:
        probe (ndarray): Embedding of the (transformed) adversarial image.
        reference (ndarray): Embedding to match (impersonation) or to move
            away from (dodging).
        mode (str): 'impersonation' or 'dodging'.

    Returns:
        float.
    """
    check_objective(mode)
    cos = cosine_similarity(probe, reference)
    return 1.0 - cos if mode == 'impersonation' else cos


def j_adv_batch(probes, reference, mode):
    """
    Adversarial loss and its gradient with respect to a batch of embeddings.

    Args:
        probes (ndarray): (N, D) embeddings.
        reference (ndarray): (D,) reference embedding.
        mode (str): 'impersonation' or 'dodging'.

    Returns:
        tuple. (losses, grads): losses shaped (N,), grads shaped (N, D) and
            of the same dtype as `probes`.
    """
    check_objective(mode)
    probes = np.asarray(probes)
    reference = np.asarray(reference, dtype=probes.dtype)
    if probes.ndim != 2 or probes.shape[1] != reference.shape[-1]:
        m = "Probe batch {} does not match reference {}.".format(probes.shape, reference.shape)
        raise ShapeError(m)

    pn = np.linalg.norm(probes, axis=1, keepdims=True)
    rn = np.linalg.norm(reference)
    if np.any(pn == 0) or rn == 0:
        raise DegenerateInputError("Cosine similarity is undefined for a zero-norm vector.")

    r_hat = reference / rn
    p_hat = probes / pn
    cos = p_hat @ r_hat
    dcos = (r_hat[None, :] - cos[:, None] * p_hat) / pn

    if mode == 'impersonation':
        return 1.0 - cos, -dcos
    return cos, dcos
