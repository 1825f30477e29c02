# -*- coding: utf-8 -*-
"""
Abstract Base Classes defining the contracts between plant, controllers and the tracking loop.
"""
from abc import ABC, abstractmethod
from typing import Union

import numpy as np

from .models import RbfIdentifier


class PositionMap(ABC):
    """
    Steady-state map from motor angle u (rad) to tip bend angle x (deg).

    The plant derives its incremental dynamics from this map.
    """

    @abstractmethod
    def position(self, u: float) -> float:
        """
        Returns the bend angle reached at motor angle u.

        Args:
            u: Motor angle in rad.

        Returns:
            Bend angle in deg.
        """
        pass

    @abstractmethod
    def slope(self, u: float) -> float:
        """Returns d position / du at u (deg/rad), the small-signal gain."""
        pass

    def positions(self, us: np.ndarray) -> np.ndarray:
        """Evaluates position() element-wise over an array of any shape; subclasses batch it."""
        us = np.asarray(us, dtype=float)
        return np.array([self.position(u) for u in us.ravel()]).reshape(us.shape)


class Controller(ABC):
    """
    Contract of a receding-horizon tracking controller for one DoF.

    A controller is stateful only through its warm-start sequence; it never
    mutates the identifier it is handed.
    """

    tag: str = ""

    @abstractmethod
    def plan(
        self, x_current: float, x_desired: Union[float, np.ndarray], identifier: RbfIdentifier, step: int
    ) -> np.ndarray:
        """
        Computes an optimal control sequence from the current state.

        Args:
            x_current: Measured bend angle (deg).
            x_desired: Desired bend angle of the next reference point (deg), or the
                upcoming reference points when the loop previews the trajectory.
            identifier: Frozen identifier snapshot used as the prediction model.
            step: Index of the control step, used to key random streams.

        Returns:
            The control sequence of length H (rad); the caller applies element 0.

        Raises:
            ControllerException: If no control can be computed.
        """
        pass

    @abstractmethod
    def reset(self) -> None:
        """Forgets the warm-start sequence."""
        pass
