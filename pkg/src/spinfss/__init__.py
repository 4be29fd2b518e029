"""Spin-chain ground states and finite-size scaling of entanglement."""

__version__ = "0.1.0"

from .hilbert import Model, SpinChainSpec, SparseOperator  # noqa: F401
