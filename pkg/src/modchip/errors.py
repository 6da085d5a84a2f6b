"""
Exception hierarchy for modchip.

Every error raised on purpose by the package derives from ModchipError and
carries a stable process exit code used by the command-line interface.
"""

from typing import Any, Dict, Optional


class ModchipError(Exception):
    """Base class for all modchip errors"""

    exit_code: int = 1


class SchemaError(ModchipError):
    """A device or scenario document failed schema validation"""

    exit_code = 2

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnitError(ModchipError):
    """A numeric configuration key does not carry a unit suffix"""

    exit_code = 3


class UnphysicalNoise(ModchipError):
    """Coherence times violate T2 <= 2*T1 or are non-positive"""

    exit_code = 4


class NonTransmonRegime(ModchipError):
    """E_J_eff/E_C dropped below the transmon-regime threshold"""

    exit_code = 5


class NoSolution(ModchipError):
    """Design targets cannot be met by any transmon spec"""

    exit_code = 6


class DomainError(ModchipError, ValueError):
    """An argument lies outside the domain of a function"""

    exit_code = 7


class SingularFit(ModchipError):
    """Least-squares design matrix is singular"""

    exit_code = 8


class FitDiverged(ModchipError):
    """A nonlinear fit failed or produced a meaningless result"""

    exit_code = 9


class DegenerateDenominator(ModchipError):
    """Perturbative dispersive-shift formula is near a resonance"""

    exit_code = 10


class SignMismatch(ModchipError):
    """Measured dispersive shift has the wrong sign for the spectrum"""

    exit_code = 11


class StepSizeUnderflow(ModchipError):
    """Adaptive integrator could not meet its tolerance"""

    exit_code = 12


class SidebandConvergenceError(ModchipError):
    """Requested sideband range misses a significant share of the weight"""

    exit_code = 13


class DimensionMismatch(ModchipError):
    """Operator or process map has the wrong dimension"""

    exit_code = 14


class OutOfBand(ModchipError):
    """Modulation frequency lies outside the control band"""

    exit_code = 15


class NoTransfer(ModchipError):
    """A chevron scan shows no usable population transfer"""

    exit_code = 16


class UnknownPair(ModchipError):
    """The named pair is not part of the device topology"""

    exit_code = 17


class NonDisjointPairs(ModchipError):
    """Simultaneously driven pairs share a qubit"""

    exit_code = 18


class EmptyCounts(ModchipError):
    """A counts dictionary has no shots"""

    exit_code = 19


class UnphysicalEstimate(ModchipError):
    """Interleaved decay exceeds the reference decay beyond its uncertainty"""

    exit_code = 20


class OutputExistsError(ModchipError):
    """Output directory is not empty and --force was not given"""

    exit_code = 21


class PipelineError(ModchipError):
    """One or more retune stages failed"""

    exit_code = 22

    def __init__(
        self, stage_errors: Dict[str, Exception], record: Optional[Any] = None
    ):
        self.stage_errors = stage_errors
        self.record = record
        details = "; ".join(f"{stage}: {err}" for stage, err in stage_errors.items())
        super().__init__(f"retune failed at {len(stage_errors)} stage(s): {details}")


EXIT_CODES: Dict[str, int] = {
    cls.__name__: cls.exit_code
    for cls in [
        ModchipError,
        SchemaError,
        UnitError,
        UnphysicalNoise,
        NonTransmonRegime,
        NoSolution,
        DomainError,
        SingularFit,
        FitDiverged,
        DegenerateDenominator,
        SignMismatch,
        StepSizeUnderflow,
        SidebandConvergenceError,
        DimensionMismatch,
        OutOfBand,
        NoTransfer,
        UnknownPair,
        NonDisjointPairs,
        EmptyCounts,
        UnphysicalEstimate,
        OutputExistsError,
        PipelineError,
    ]
}

# not a ModchipError, but the CLI reports missing input files with its own code
FILE_NOT_FOUND_EXIT_CODE = 23
