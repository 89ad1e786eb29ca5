"""Single-photon source simulator and inverse pump designer for a Lambda
emitter in a lossy cavity."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Envelope, SystemParams, TimeGrid, eval_envelope, make_grid, read_envelope_csv,
    validate_params, write_envelope_csv,
)
from .errors import (  # noqa: E402
    CapacityError, ConfigError, CoverageError, DomainError, InfeasibleDesignError,
    ParameterError, PhotonShaperError, RefinementError, SingularCouplingError,
    UndefinedShapeError, UnphysicalTargetError,
)
from .inverse import (  # noqa: E402
    DesignTarget, PumpDesign, RoundTripReport, c2_from_target, pump_coupling_rk4,
    pump_from_target, round_trip, target_from_envelope, target_from_profile,
)
from .observables import (  # noqa: E402
    SpectralDensity, WavePacket, efficiency_curve, intensity, spectrum, wavepacket, wigner_mode1,
)
from .pulses import FAMILIES, PulseSpec, render_pulse  # noqa: E402
from .solver import AmplitudeTrajectory, kernel, solve_ode, solve_volterra  # noqa: E402

__all__ = [
    "__version__",
    "Envelope",
    "SystemParams",
    "TimeGrid",
    "eval_envelope",
    "make_grid",
    "read_envelope_csv",
    "validate_params",
    "write_envelope_csv",
    "CapacityError",
    "ConfigError",
    "CoverageError",
    "DomainError",
    "InfeasibleDesignError",
    "ParameterError",
    "PhotonShaperError",
    "RefinementError",
    "SingularCouplingError",
    "UndefinedShapeError",
    "UnphysicalTargetError",
    "DesignTarget",
    "PumpDesign",
    "RoundTripReport",
    "c2_from_target",
    "pump_coupling_rk4",
    "pump_from_target",
    "round_trip",
    "target_from_envelope",
    "target_from_profile",
    "SpectralDensity",
    "WavePacket",
    "efficiency_curve",
    "intensity",
    "spectrum",
    "wavepacket",
    "wigner_mode1",
    "FAMILIES",
    "PulseSpec",
    "render_pulse",
    "AmplitudeTrajectory",
    "kernel",
    "solve_ode",
    "solve_volterra",
]
