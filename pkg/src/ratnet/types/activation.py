from __future__ import annotations
from typing import Protocol, runtime_checkable

import numpy as np
import numpy.typing as npt


@runtime_checkable
class Activation(Protocol):
    """
    Anything a network node can apply elementwise: plain rational functions,
    composed Zolotarev stages, the ReLU approximant, relays and ReLU itself.
    """
    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        ...
    def param_count(self) -> int:
        ...
    def node_count(self) -> int:
        ...
