"""
Exceptions raised by baforge.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""


class BAForgeError(Exception):
    """
    Generic error class.
    """
    pass


class ShapeError(BAForgeError, ValueError):
    """
    An array does not have the dimensions an operation expects.
    """
    pass


class DegenerateInputError(BAForgeError, ValueError):
    """
    A vector has zero norm where a direction is needed.
    """
    pass


class ParameterError(BAForgeError, ValueError):
    """
    A numeric parameter is outside its allowed range.
    """
    pass


class ValidationError(BAForgeError, ValueError):
    """
    A configuration document is malformed or inconsistent.
    """
    pass


class NumericFailure(BAForgeError, ArithmeticError):
    """
    A loss or gradient stopped being finite.

    Args:
        message (str): What went wrong.
        iteration (int): The iteration at which it happened, if known.
    """
    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class TrainingError(NumericFailure):
    """
    Training diverged.
    """
    def __init__(self, message, epoch=None):
        super().__init__(message, iteration=epoch)
        self.epoch = epoch


class CalibrationError(BAForgeError):
    """
    A verification threshold cannot be calibrated from the data given.
    """
    pass


class FormatError(BAForgeError, IOError):
    """
    A file on disk is not in the format we expected.
    """
    pass
