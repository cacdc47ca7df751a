"""Exception types shared across the simulator."""


class QuadshareError(Exception):
    """Base class for all quadshare errors."""


class ZeroActivation(QuadshareError):
    """Aggregated fuzzy output has (numerically) zero area; partitions are misconfigured."""


class NonPositiveDt(QuadshareError):
    """A controller or integrator step was asked to advance by dt <= 0."""


class GimbalProximity(QuadshareError):
    """Pitch is too close to +/-pi/2 for the Euler-angle kinematics to be valid."""


class NonMonotoneTime(QuadshareError):
    """The command channel was driven with a timestamp earlier than a previous call."""


class BadThresholds(QuadshareError):
    """Arbitration thresholds violate rho_hi > rho_lo >= 0 or r_max > 0."""


class ConfigInvalid(QuadshareError):
    """Experiment configuration failed validation; message names the field."""


class SimulationDiverged(QuadshareError):
    """A state magnitude exceeded the sanity bound during a run."""


class PortInUse(QuadshareError):
    """The live-service port is already bound by another process."""
