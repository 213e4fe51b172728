"""Exception hierarchy for halfspace-liouville."""


class ConformalError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(ConformalError, ValueError):
    """A construction parameter lies outside its stated domain."""


class DomainError(ConformalError, ValueError):
    """Evaluation at a singular locus or outside a field or map domain."""


class StencilError(DomainError):
    """A finite-difference stencil leaves the field domain."""


class InputError(ConformalError, ValueError):
    """Malformed input: unsorted eigenvalues, asymmetric matrices, bad grids."""


class SpecFormatError(InputError):
    """A field, map, grid or custom-expression file cannot be parsed."""


class ValidationError(ConformalError):
    """A user-supplied cone or operator fails a sampled structural check."""


class IntegrationError(ConformalError, RuntimeError):
    """The adaptive integrator stalled without a blow-up certificate."""


class InversionError(ConformalError, RuntimeError):
    """No bracket was found when inverting f for the first eigenvalue."""


class FitError(ConformalError, RuntimeError):
    """The bubble least-squares system is rank deficient."""


class StartingRadiusError(ConformalError, RuntimeError):
    """The sphere comparison already fails at the smallest tested radius."""
