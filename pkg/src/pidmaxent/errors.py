"""Exception hierarchy.

Every error carries its class name in ``str(exc)`` so command-line users see
``NegativeMass: ...`` rather than a bare message.
"""


class PidError(Exception):
    """Base class for all errors raised by pidmaxent."""

    def __str__(self):
        msg = super().__str__()
        name = type(self).__name__
        return f"{name}: {msg}" if msg else name


class InputError(PidError):
    """Malformed user input (distribution files, indices, names)."""


class NegativeMass(InputError):
    pass


class DuplicateTuple(InputError):
    pass


class EmptyInput(InputError):
    pass


class MassNotNormalizable(InputError):
    pass


class BadIndex(InputError):
    pass


class OverlappingParts(InputError):
    pass


class EmptyPart(InputError):
    pass


class UnknownGate(InputError):
    pass


class BadSize(InputError):
    pass


class BadLevel(InputError):
    pass


class ArityMismatch(InputError):
    pass


class UnsupportedArity(InputError):
    pass


class MissingAtom(InputError):
    pass


class NotAntichain(InputError):
    """A collection holds two source sets where one contains the other."""


class BadTolerance(InputError):
    pass


class InfeasibleSpec(PidError):
    """Pinned marginals admit no common joint distribution."""


class SolverFailed(PidError):
    """An optimization did not reach even the relaxed tolerances."""


class SingularSystem(PidError):
    pass
