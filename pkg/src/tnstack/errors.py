"""Exception types shared across the package."""


class TnstackError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(TnstackError, ValueError):
    """Tensor extents are incompatible with the requested operation."""


class TensorAxisError(TnstackError, IndexError):
    """An axis index is out of range or repeated."""


class WiringError(TnstackError, ValueError):
    """A network wiring is malformed (dangling pair, trace, or split graph)."""


class StackingError(TnstackError, ValueError):
    """Inputs cannot be stacked (shape mismatch, bad placement, output legs)."""


class PlanError(TnstackError, ValueError):
    """A contraction plan is invalid or does not match the network it is run on."""


class RegimeError(TnstackError, ValueError):
    """A closed-form estimate was requested outside its validity regime."""


class MemoryGuardError(TnstackError, RuntimeError):
    """An engine would materialize a tensor above the configured element guard."""


class OracleCapError(TnstackError, RuntimeError):
    """A brute-force expansion would exceed the configured element cap."""


class HalvingFallback(TnstackError, RuntimeError):
    """Pairwise-halving cannot run on this instance; use the plain sweep."""
