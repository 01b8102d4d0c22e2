"""Exception types raised across the package.

Every input error derives from ``InvalidInput`` (itself a ``ValueError``) so the
CLI can map the whole family onto exit code 2.
"""


class InvalidInput(ValueError):
    pass


class InvalidSequence(InvalidInput):
    pass


class DuplicateGate(InvalidSequence):
    def __init__(self, gate):
        self.gate = gate
        super().__init__(f"gate {gate} appears more than once")


class MissingGate(InvalidSequence):
    def __init__(self, gate):
        self.gate = gate
        super().__init__(f"gate {gate} is missing")


class OutOfRange(InvalidSequence):
    def __init__(self, gate, n_sites):
        self.gate = gate
        super().__init__(f"gate {gate} outside 1..{n_sites}")


class InvalidClassParameters(InvalidInput):
    def __init__(self, n_sites, q, r):
        super().__init__(f"(q, r) = ({q}, {r}) is not an allowed class for N = {n_sites}")


class InvalidP(InvalidInput):
    pass


class IllegalSwap(InvalidInput):
    pass


class TooLarge(InvalidInput):
    pass


class InternalInvariantViolation(RuntimeError):
    pass


class DimensionOverflow(InvalidInput):
    pass


class InvalidSector(InvalidInput):
    pass


class NotBlockDiagonal(ValueError):
    pass


class NonUnitarySpectrum(ValueError):
    pass


class TooFewPhases(InvalidInput):
    pass


class EmptySample(InvalidInput):
    pass


class InvalidQ(InvalidInput):
    pass
