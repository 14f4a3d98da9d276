"""Cycle-by-cycle core loss estimation for PWM-excited magnetic components."""

from .errors import (CoreLossError, DegenerateExcitationError, NumericError, OutOfRangeError,
                     SpectralLeakageError, ValidationError)
from .excitation import SineConfig, SpwmConfig, inductor_current, synth_sine, synth_spwm
from .generic_model import GenericLossModel, TABLE_VII, distribute, evaluate, fit
from .loss import LossMapBackend, LossMapTable, SteinmetzBackend, SteinmetzParams
from .magnetics import CoreSpec
from .pipeline import run_workflow
from .signal import TimeSeries

__version__ = "0.1.0"

__all__ = [
    "CoreLossError", "DegenerateExcitationError", "NumericError", "OutOfRangeError", "SpectralLeakageError",
    "ValidationError", "SineConfig", "SpwmConfig", "inductor_current", "synth_sine", "synth_spwm",
    "GenericLossModel", "TABLE_VII", "distribute", "evaluate", "fit", "LossMapBackend", "LossMapTable",
    "SteinmetzBackend", "SteinmetzParams", "CoreSpec", "run_workflow", "TimeSeries",
]
