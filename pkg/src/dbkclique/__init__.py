"""Maximum clique by graph decomposition with annealer-sized leaves."""
import types as _types

from ._accel import HAS_NUMBA, jit_enabled, set_jit
from .anneal import DWAVE_2X_TABLE, EmulatedAnnealer, TtsModel, TtsRow, emulated_annealer_solve, tts, tts_lookup
from .bounds import (
    BoundRefused,
    BoundResult,
    dense_edge_ub,
    greedy_clique_lb,
    greedy_coloring_ub,
    lovasz_theta_ub,
    theta_complement,
)
from .engine import (
    BackendError,
    CliqueVerificationError,
    SolveReport,
    SolverConfig,
    Subproblem,
    dbk_solve,
    decompose,
    incumbent_update,
    select_vertex,
    split,
)
from .graph import (
    DimacsParseError,
    Graph,
    density,
    edge_kcore,
    format_dimacs,
    gnp_generate,
    neighborhood_subgraph,
    parse_dimacs,
    read_dimacs,
    remove_vertex,
    vertex_kcore,
    write_dimacs,
)
from .persistency import PersistencyResult, persistency
from .qubo import Qubo, brute_force_solve, energy, maxclique_to_qubo, simulated_annealing_solve

__version__ = "0.1.0"

__all__ = sorted(k for k, v in globals().items() if not k.startswith("_") and not isinstance(v, _types.ModuleType))
