"""Exception types shared across the library."""


class PescatError(Exception):
    """Base class for all library-specific failures."""


class NonConvergence(PescatError):
    """Eigenvalue iteration failed within its iteration cap."""


class SwapFailure(PescatError):
    """An adjacent eigenvalue swap rotation was numerically degenerate."""


class SpectraOverlap(PescatError):
    """Sylvester spectra are too close for a unique solution."""


class Singular(PescatError):
    """Linear system matrix is numerically rank deficient."""


class PoleProximity(PescatError):
    """Evaluation point is at or numerically near a pole."""


class NotMonic(PescatError):
    """Inversion requires the constant term D to equal the identity."""


class ImproperEntry(PescatError):
    """A rational entry does not stay bounded at infinity."""


class NotAdmissible(PescatError):
    """Parameter matrices violate an admissibility condition."""


class NotContractive(PescatError):
    """Input function is not contractive on the real line."""


class RealSpectrumUnresolved(PescatError):
    """No invariant-subspace completion over the real eigenvalues verified."""


class LimitNotConverged(PescatError):
    """A numerically sampled limit did not settle within tolerance."""


class SingularPotential(PescatError):
    """Potential evaluation is singular inside an integration interval."""


class NoConvergence(PescatError):
    """Step refinement hit its floor before reaching the tolerance."""


class SingularAt(PescatError):
    """S(x) is numerically singular at a point.

    Used both as a return value (potential evaluation reports the
    singularity instead of a matrix) and as a raised error where a finite
    value is mandatory.
    """

    def __init__(self, x: float, cond: float):
        super().__init__(f"S(x) numerically singular at x={x:.6g} (cond={cond:.3e})")
        self.x = float(x)
        self.cond = float(cond)
