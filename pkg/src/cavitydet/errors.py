"""Exception types shared across the package."""


class CavityDetError(Exception):
    pass


class ConfigError(CavityDetError, ValueError):
    """Invalid field/detector/run configuration."""


class ModelMismatch(ConfigError):
    """Detector model paired with an incompatible field kind."""


class CoincidenceLimit(CavityDetError, ValueError):
    """A propagator was evaluated at coincident times, where it is ill defined."""


class NotApplicable(CavityDetError, ValueError):
    pass


class OpenSpinorIndex(CavityDetError, ValueError):
    pass


class MalformedWord(CavityDetError, ValueError):
    pass


class ModeOutsideSpace(CavityDetError, KeyError):
    pass


class TooFewCutoffs(CavityDetError, ValueError):
    pass
