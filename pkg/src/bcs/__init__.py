"""BCS two-body kernels, translation-invariant critical temperature, and the
half-space boundary-superconductivity criterion."""

__version__ = "0.1.0"
