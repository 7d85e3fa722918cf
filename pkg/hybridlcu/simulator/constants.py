from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    unitarity: float = 1e-10
    hermiticity: float = 1e-10
    normalization: float = 1e-12
    backend_agreement: float = 1e-9
    reconstruction: float = 1e-9
    psd: float = 1e-10


TOLERANCES = Tolerances()

# dense storage caps (system dimension)
MAX_PURE_DIM = 2 ** 10
MAX_MIXED_DIM = 2 ** 7

# exhaustive partition enumeration
MAX_ENUMERATION_M = 10
MAX_TABLE_M = 8
MAX_DEMO_M = 6
MAX_DEMO_DIM = 8

# shot sampling: fixed block size keeps substreams independent of the worker count
SHOT_BLOCK_SIZE = 4096
GENERATOR_NAME = 'philox4x64'

# substream tags
STREAM_SHOTS_OBS = 1
STREAM_SHOTS_ONE = 2
STREAM_INSTANCE = 3
STREAM_TAIL = 4
STREAM_CODEWORDS = 5

# matrix text format
FLOAT_DIGITS = 17

# CSV schemas
SHOT_LOG_FIELDS = ['shot', 'k', 'kprime', 'z', 'b', 'j', 'g']
REPORT_FIELDS = [
    'method', 'target', 'estimate', 'half_width', 'delta', 'epsilon', 'N',
    'sigma2_O', 'sigma2_one', 'R_hat', 'seed',
]
PARTITION_FIELDS = ['partition', 'groups', 'ancilla_width', 'R', 'R_minus_P']
LCHS_FIELDS = [
    'K2', 'M', 'alpha', 's_norm1', 'rp_bound', 'overhead_bound_at_P', 'P_assumed',
    'rp_bound_approx',
]
QLSS_FIELDS = [
    'kappa', 'epsilon', 'J', 'K', 'one_norm', 'P', 'R_int', 'R_int_closed_form',
    'R_rand', 'anc_hybrid', 'anc_coherent',
]
GSP_FIELDS = [
    'dim', 'Delta', 'p0', 'eps', 'Tprime', 'sigma2', 'R', 'stage1_dist', 'final_dist',
    'total_time_term1', 'total_time_term2',
]
QED_FIELDS = ['r', 'pZ', 'pX', 'P', 'R', 'R_minus_P', 'seed', 'P_std', 'R_std', 'codewords']

# Steane code generator supports, 1-based qubit labels
STEANE_SUPPORTS = (
    (1, 2, 3, 4),
    (1, 2, 5, 6),
    (1, 3, 5, 7),
)
STEANE_QUBITS = 7

# trapezoid weights are summed explicitly up to this many nodes
LCHS_EXPLICIT_NODE_LIMIT = 2 ** 22
