"""Exception hierarchy shared by every projconv module."""


class ProjconvError(Exception):
    """Base class for all errors raised by projconv."""


class SingularInput(ProjconvError):
    pass


class ExcludedPath(ProjconvError):
    """Stepping a state whose product already annihilated V."""


class NotApplicable(ProjconvError):
    pass


class InternalExhaustive(ProjconvError):
    """No counterexample recipe matches a system the decider calls divergent."""


class CertificationFailed(ProjconvError):
    def __init__(self, message, oscillation=None):
        super().__init__(message)
        self.oscillation = oscillation


class BudgetExceeded(ProjconvError):
    pass


class ContradictionFound(ProjconvError):
    def __init__(self, message, system=None, omega=None):
        super().__init__(message)
        self.system = system
        self.omega = omega


class StratumUnsatisfiable(ProjconvError):
    pass


class SystemFileError(ProjconvError):
    """Malformed system file; ``path`` names the offending JSON element."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
