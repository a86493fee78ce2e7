"""Exact partition functions of q-state spin models.

The partition function is evaluated as the overlap of a stabilizer state,
which encodes the interaction graph, with a product state of Boltzmann
weights. The stabilizer state is contracted along a branch decomposition,
so the cost is exponential only in the decomposition width.
"""

from .contraction import (EncodingMismatchError, WidthExceededError, choose_encoding, contract,
                          contract_weights, correlation, free_energy_report)
from .decomposition import (BranchDecomposition, DecompositionError, WidthReport,
                            heuristic_branch_decompose, width)
from .io import ParseError, load_model, model_digest, parse_model
from .model import (EdgeEnergyTable, Hamiltonian, KBodyTerm, ModelError, PairwiseTable, SpinGraph,
                    VertexFieldTable, WeightVector, boltzmann_weights, make_model)
from .numerics import ScaledComplex
from .oracle import OracleCapError, correlation_exact, partition_exact
from .transforms import DualityError, RotationSystem, SymmetryError, dual_model, planar_dual

__version__ = "0.1.0"

__all__ = [
    "BranchDecomposition", "DecompositionError", "DualityError", "EdgeEnergyTable",
    "EncodingMismatchError", "Hamiltonian", "KBodyTerm", "ModelError", "OracleCapError",
    "PairwiseTable", "ParseError", "RotationSystem", "ScaledComplex", "SpinGraph",
    "SymmetryError", "VertexFieldTable", "WeightVector", "WidthExceededError", "WidthReport",
    "boltzmann_weights", "choose_encoding", "contract", "contract_weights", "correlation",
    "correlation_exact", "dual_model", "free_energy_report", "heuristic_branch_decompose",
    "load_model", "make_model", "model_digest", "parse_model", "partition_exact", "planar_dual",
    "width",
]
