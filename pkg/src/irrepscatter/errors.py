"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):

* ``InputError`` subclasses signal malformed input (wrong shapes, empty
  generator lists, non-divisor lattice widths, ...).
* ``CertificationError`` subclasses signal that a numerical certificate
  failed: an operator that should be a projection is not, a Hamiltonian is
  not in the algebra, the scattering loop did not terminate, ...
"""


class IrrepError(Exception):
    """Base class of every error raised by this package."""


class InputError(IrrepError, ValueError):
    """Malformed or inconsistent input."""


class CertificationError(IrrepError):
    """A numerical certificate failed."""


class NonHermitianInput(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class EmptyGeneratorSet(InputError):
    pass


class CapExceeded(InputError):
    pass


class NotFullySupported(InputError):
    pass


class DisconnectedPath(InputError):
    pass


class EigensolverFailure(CertificationError):
    pass


class ZeroOperator(CertificationError):
    pass


class NotIsometry(CertificationError):
    pass


class NotProjection(CertificationError):
    pass


class NonTermination(CertificationError):
    pass


class MultipleSingularValues(CertificationError):
    pass


class NotInAlgebra(CertificationError):
    pass


class NotAGroup(CertificationError):
    pass


class NotInSpan(CertificationError):
    pass


class NotOrthonormal(CertificationError):
    pass
