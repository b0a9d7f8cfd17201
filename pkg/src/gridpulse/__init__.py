"""Detection, characterization and simulation of minute-periodic patterns in grid frequency."""

from .core import (
    DataFormatError,
    EmptyStatisticsError,
    GridPulseError,
    Segment,
    UniformSeries,
    Unit,
    drop_incomplete_windows,
    mean_valid,
    segment,
)
from .drift import PhaseTrack, step_phase, track
from .spectral import PeakReport, Spectrum, detect_peaks, spectrum
from .swing import DeviceFleet, GridParams, PulseDevice, fleet_demand, power_amplitudes, simulate
from .waveform import (
    AmplitudeSeries,
    Profile,
    Waveform,
    amplitude,
    fold,
    fold_harmonic,
    hourly_amplitudes,
    profile,
    standardize,
    weekly_trend,
)

__version__ = "0.1.0"
