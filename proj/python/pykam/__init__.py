from ._kam import *  # noqa: F401,F403
from ._kam import KamError, FourierField, FrequencyVector, constants, run

__all__ = ["KamError", "FourierField", "FrequencyVector", "constants", "run"]
