"""Exception hierarchy shared by all fockdistill modules."""


class FockDistillError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpecError(FockDistillError):
    """A source specification cannot produce a valid state (e.g. empty window)."""


class UnsupportedError(FockDistillError):
    """Requested feature is structurally present but not supported yet."""


class NumericRangeError(FockDistillError):
    """A computation left the representable floating-point range."""


class ContractViolationError(FockDistillError):
    """An input violated a documented precondition (e.g. unnormalized state)."""


class ImpossibleOutcomeError(FockDistillError):
    """Postselection on a measurement branch whose probability is zero."""


class DegenerateStateError(FockDistillError):
    """Total norm collapsed below tolerance; state is no longer meaningful."""


class InvalidPlanError(FockDistillError):
    """A distillation plan is inconsistent with the state it is applied to."""


class ResourceLimitError(FockDistillError):
    """An enumeration would exceed its configured resource cap."""


class InvalidConfigError(FockDistillError):
    """A pulse/CLI configuration failed validation."""


class IntegrationError(FockDistillError):
    """The master-equation integrator lost accuracy (e.g. trace drift)."""


class TruncationError(FockDistillError):
    """Population reached the top of a truncated Fock space."""
