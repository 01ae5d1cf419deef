"""Exception types shared across the package.

Missing files raise the builtin FileNotFoundError and low-level I/O
failures raise OSError; everything domain-specific lives here.
"""


class EchoGenError(Exception):
    """Base class for all package-specific errors."""


class CorruptLabelError(EchoGenError):
    """A segmentation raster contains a value outside the label alphabet."""

    def __init__(self, value, source=None):
        self.value = int(value)
        self.source = source
        where = f" in {source}" if source else ""
        super().__init__(f"invalid segmentation label {self.value}{where}; expected one of 0, 1, 2, 3")


class InvalidDimensionsError(EchoGenError):
    """Raster dimensions are unusable (zero-sized or below the supported minimum)."""


class InvalidSplitError(EchoGenError):
    """Requested train/test split is impossible for the given id list."""


class EmptyDatasetError(EchoGenError):
    """No records available where at least one full batch is required."""


class InvalidConfigError(EchoGenError):
    """A configuration value violates its invariants."""


class ShapeError(EchoGenError):
    """Tensor shapes are inconsistent with each other or with the model config."""


class EmptyInputError(EchoGenError):
    """An operation received an empty tensor where values are required."""


class DivergenceError(EchoGenError):
    """Training produced a non-finite loss value."""

    def __init__(self, iteration, term, value):
        self.iteration = iteration
        self.term = term
        self.value = value
        super().__init__(f"non-finite {term} ({value}) at iteration {iteration}")


class IncompatibleCheckpointError(EchoGenError):
    """Checkpoint file has an unsupported format version."""


class ModelNotLoadedError(EchoGenError):
    """A generation request referenced a checkpoint id that is not loaded."""
