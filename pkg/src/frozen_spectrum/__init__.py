"""Forward and inverse spectral problems for a Sturm-Liouville operator with a
frozen argument on two segments joined by eigenparameter-dependent jump
conditions."""
from .basis import BasisZeros, compute_z, expand_biorthogonal, gram_matrix, spare_zero
from .characterization import (CharacterizationVerdict, build_g_G1_G2, build_W, check_conditions,
                               estimate_C0, fit_asymptotics)
from .errors import (CommonZeroError, DomainError, FrozenSpectrumError, IncompleteSpectrumError, NumericError,
                     ValidationError)
from .forward import PotentialCharFunction, Spectrum, compute_spectrum, eval_Delta
from .geometry import Geometry, Potential
from .inverse import (CoeffSeq, ProductCharFunction, check_uniqueness, reconstruct_charfn, recover_potential,
                      recovery_errors, run_recovery)
from .oracle import fd_spectrum

__all__ = [
    "BasisZeros", "CharacterizationVerdict", "CoeffSeq", "CommonZeroError", "DomainError", "FrozenSpectrumError",
    "Geometry", "IncompleteSpectrumError", "NumericError", "Potential", "PotentialCharFunction",
    "ProductCharFunction", "Spectrum", "ValidationError", "build_W", "build_g_G1_G2", "check_conditions",
    "check_uniqueness", "compute_spectrum", "compute_z", "estimate_C0", "eval_Delta", "expand_biorthogonal",
    "fd_spectrum", "fit_asymptotics", "gram_matrix", "reconstruct_charfn", "recover_potential", "recovery_errors",
    "run_recovery", "spare_zero",
]
