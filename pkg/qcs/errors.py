"""Exception hierarchy shared by the compute modules and the CLI."""


class QcsError(Exception):
    """Base class; `exit_code` is what the CLI returns when this escapes a command."""

    exit_code = 3


class InputError(QcsError):
    exit_code = 2


class InvalidSpec(InputError):
    """A state spec, channel or grid parameter lies outside its domain."""


class Unphysical(InputError):
    """Covariance with det V < 1 or a density matrix that is not a state."""


class UnsupportedFamily(InputError):
    pass


class NumericalError(QcsError):
    exit_code = 3


class QuadratureNotConverged(NumericalError):
    pass


class CutoffTooSmall(NumericalError):
    """Truncated Fock space holds too little of the state's weight."""


class StepTooLarge(NumericalError):
    pass


class RootNotBracketed(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass
