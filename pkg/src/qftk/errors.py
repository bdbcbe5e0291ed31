class ClassViolation(ValueError):
    """A test function does not belong to the class a kernel requires.

    Massless fields only accept smearing functions whose Fourier transforms vanish
    to all orders at the momentum origin; anything else raises this.
    """


class QuadratureError(RuntimeError):
    """The refined quadrature disagrees with the base one beyond the requested tolerance."""


class SingularSymbolError(ValueError):
    """A propagator symbol was evaluated on its singular set without an epsilon shift."""


class SpanError(ValueError):
    """A function is not representable in the finite mode basis of a truncated Fock space."""
