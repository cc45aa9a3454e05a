"""Precision bounds, exact sensitivities and protocol simulation for
parameter estimation with nonlinear (k-body) collective-spin couplings."""

__version__ = "0.1.0"

from kmetro.spin_model import (  # noqa: E402
    QUBIT,
    CoherentPreparation,
    CouplingSpec,
    DickeState,
    ExperimentClock,
    SingleBodySpectrum,
    coherent_amplitudes,
    spectrum_stats,
)

__all__ = [
    "__version__",
    "QUBIT",
    "CoherentPreparation",
    "CouplingSpec",
    "DickeState",
    "ExperimentClock",
    "SingleBodySpectrum",
    "coherent_amplitudes",
    "spectrum_stats",
]
