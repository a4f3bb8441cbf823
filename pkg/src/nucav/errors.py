"""Exception hierarchy shared by all nucav modules."""


class NucavError(Exception):
    """Base class for all nucav errors."""


class InvalidGeometryError(NucavError):
    """Degenerate, non-unit or otherwise unusable direction vectors."""


class InvalidParametersError(NucavError):
    """Cavity or coupling parameters violate their constraints."""


class EnergyConservationError(InvalidParametersError):
    """kappa < kappa_r + kappa_t: more light leaves than is damped."""


class CorruptedTableError(NucavError):
    """Transition table branching weights do not sum to one."""


class InvalidEnsembleError(NucavError):
    """Ground-state populations inconsistent with the total nucleus count."""


class DegenerateSpectrumError(NucavError):
    """Steady-state coherence system is singular at the requested detuning."""

    def __init__(self, detuning, message=None):
        self.detuning = detuning
        super().__init__(message or f"coherence system singular at detuning {detuning} gamma")


class NotApplicableError(NucavError):
    """Analysis requested for a geometry it does not describe."""


class ResourceCapError(NucavError):
    """Requested Hilbert space exceeds the configured dimension cap."""


class AmbiguousSteadyStateError(NucavError):
    """Liouvillian null space is degenerate; no unique steady state."""


class UndefinedCorrelationError(NucavError):
    """g2 undefined: the output field carries no intensity."""


class IntegratorError(NucavError):
    """Time propagation failed to meet its accuracy target."""


class ScenarioError(NucavError):
    """Scenario file fails schema validation."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
