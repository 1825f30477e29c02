# -*- coding: utf-8 -*-
"""
Custom exceptions for the snake tracking toolkit.
"""


class SnakeTrackingException(Exception):
    """Base exception for all errors raised by the toolkit."""

    pass


class DimensionMismatch(SnakeTrackingException):
    """Raised when array shapes or model dimensions disagree."""

    pass


class ModelFitException(SnakeTrackingException):
    """Base exception for errors while fitting the mixture model."""

    pass


class EmptyDataset(ModelFitException):
    """Raised when a dataset has no samples or too few for the requested fit."""

    pass


class DegenerateComponent(ModelFitException):
    """Raised when a mixture component loses all responsibility mass (K too large for the data)."""

    pass


class SingularInputBlock(SnakeTrackingException):
    """Raised when a component's input covariance block is below the regularization floor."""

    pass


class PlantException(SnakeTrackingException):
    """Base exception for plant simulation errors."""

    pass


class NonFiniteControl(PlantException):
    """Raised when a NaN or infinite control is applied to the plant."""

    pass


class IdentifierException(SnakeTrackingException):
    """Base exception for RBF identifier errors."""

    pass


class TooFewSamples(IdentifierException):
    """Raised when there are fewer samples than requested basis centers."""

    pass


class NonFiniteInnovation(IdentifierException):
    """Raised when the EKF receives a NaN or infinite target."""

    pass


class ControllerException(SnakeTrackingException):
    """Base exception for controller errors."""

    pass


class NonFinitePropagation(ControllerException):
    """Raised when a rollout produces non-finite states and cannot be scored."""

    pass


class DegenerateWeights(ControllerException):
    """Raised when the sum of MPPI control weights is not positive."""

    pass


class NonFiniteCost(ControllerException):
    """Raised when the MPC solver evaluates a non-finite cost."""

    pass


class TrajectoryException(SnakeTrackingException):
    """Base exception for reference trajectory errors."""

    pass


class UnknownKind(TrajectoryException):
    """Raised for a trajectory kind that is not generated by this toolkit."""

    pass


class ConfigInvalid(SnakeTrackingException):
    """Raised when the experiment config fails validation. Carries the dotted field path."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


class EmptyLog(SnakeTrackingException):
    """Raised when metrics are requested for a log without records."""

    pass


class ExportException(SnakeTrackingException):
    """Raised for errors while reading or writing result files."""

    pass
