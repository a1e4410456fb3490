class EMDQueryError(Exception):
    """Base class for errors raised by emdquery."""


class ImbalanceError(EMDQueryError, ValueError):
    """The two sides of a transportation instance carry different mass."""


class SolverError(EMDQueryError, RuntimeError):
    """A transportation solver failed to produce a plan."""
