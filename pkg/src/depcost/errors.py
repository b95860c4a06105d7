"""Exception hierarchy shared across the pipeline."""


class DepcostError(Exception):
    """Base class for all pipeline errors."""


class DataError(DepcostError):
    """Input data is missing, malformed or numerically invalid."""


class WavDecodeError(DataError):
    pass


class UnsupportedFormatError(DataError):
    pass


class EmptyInputError(DataError):
    pass


class InsufficientAudioError(DataError):
    pass


class InsufficientFramesError(DataError):
    pass


class CannotNormalizeError(DataError):
    pass


class FeatureFormatError(DataError):
    pass


class ShapeError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class UndefinedRelevanceError(DataError):
    pass


class FoldError(DataError):
    pass


class LeakageError(DepcostError):
    """A held-out sample reached a fitting stage."""


class TrainingError(DepcostError):
    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class ConfigError(DepcostError):
    pass
