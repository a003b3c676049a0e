# Numerical tolerances. Units: hbar = 1, rates and energies in 1/time.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
EVOLUTION_POSITIVITY_TOL = 1e-8
WEIGHT_TOL = 1e-9
DROP_WEIGHT = 1e-14
TRACE_PRESERVATION_TOL = 1e-9

R_NEGATIVE_TOL = 1e-9
PPT_TOL = 1e-10
BLOCK_TOL = 1e-12

EIG_CONDITION_LIMIT = 1e4
NULL_SPACE_RCOND = 1e-10
INTEGER_SHIFT_TOL = 1e-9

RK4_DEFAULT_STEPS = 1000
BOUND_MARGIN_TOL = 1e-9

# Large-N validity gates.
ASYMPTOTIC_MIN_PEAK = 10.0
ASYMPTOTIC_MAX_TS = 1.0
FIT_MAX_TS = 0.5
DEFAULT_N_TERMS = 2

# CLI exit codes.
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2
EXIT_NUMERICAL = 3

OUTPUT_DIR_ENV = "BOSON_ENTANGLEMENT_OUTPUT_DIR"
CSV_FLOAT_FORMAT = "%.15g"

TASKS = ("evolve", "verify", "threshold", "large-n", "stationary")
HAMILTONIAN_KINDS = ("none", "diagonal", "hopping", "explicit")
NOISE_KINDS = ("dephasing", "loss", "custom")
INITIAL_STATE_KINDS = ("example", "diagonal_class", "separable_pure", "explicit", "fock",
                       "random", "maximally_mixed")
MIXTURE_STATE_KINDS = ("random", "maximally_mixed")
RANDOM_ENSEMBLES = ("ginibre", "separable", "non_block_diagonal")
TASK_ALIASES = {"verify-bounds": "verify", "large_n": "large-n"}
CHECK_STATUSES = ("passed", "failed", "not_applicable", "precondition_violated")
AGREEMENT_TOL = 1e-10
DECOHERENCE_TOL = 1e-9
ANALYTIC_TOL = 1e-9
THRESHOLD_BEFORE_FACTOR = 0.9
THRESHOLD_AFTER_FACTOR = 1.01
THRESHOLD_ENTANGLED_MIN = 1e-6
THRESHOLD_SEPARABLE_MAX = 1e-10
TIME_SPACINGS = ("linear", "log")

# Column documentation for the schema sidecars, per output table.
CSV_COLUMNS = {
    "evolution": {
        "t": "Time, in units of inverse rate.",
        "negativity_formula": "Mixture negativity from the block formula.",
        "negativity_oracle": "Mixture negativity from partial-transpose eigenvalues (only with --oracle).",
        "trace": "Total trace of the evolved mixture.",
        "min_eigenvalue": "Smallest eigenvalue over all normalised sector components.",
        "bound_rhs": "Right-hand side of the applicable lower bound (loss or dephasing), when one applies.",
    },
    "bounds": {
        "check": "Bound identifier (loss or dephasing).",
        "t": "Time.",
        "lhs": "Negativity of the full evolution.",
        "rhs": "Damped negativity of the hamiltonian-only evolution.",
        "margin": "lhs - rhs.",
    },
    "summary": {
        "check": "Check identifier.",
        "status": "passed, failed, not_applicable or precondition_violated.",
        "value": "Margin, deviation or count measured by the check.",
        "detail": "Human-readable diagnostic.",
    },
    "threshold": {
        "example": "Worked example (loss or dephasing).",
        "p": "Mixing probability of the initial state.",
        "rate": "Effective damping rate (lambda_0 or the sum of lambda_j).",
        "t_star": "Separability time; empty when already separable, inf when never.",
        "negativity_before": "Oracle negativity of the analytic state at 0.9 t*.",
        "negativity_after": "Oracle negativity of the analytic state at 1.01 t*.",
    },
    "large_n": {
        "N": "Particle number.",
        "t": "Time.",
        "peak_parameter": "t S N^(2 alpha); the asymptotic gate needs it to be at least 10.",
        "negativity_exact": "Exact negativity of the diagonal class.",
        "negativity_asymptotic": "Truncated asymptotic series.",
        "relative_error": "|asymptotic - exact| / exact.",
        "gate_passed": "Whether the asymptotic validity gate held.",
    },
    "decay_fits": {
        "N": "Particle number.",
        "alpha": "Occupation-difference exponent.",
        "n_points": "Grid points used by the fits.",
        "window_applied": "False when the validity window held fewer than three points.",
        "algebraic_exponent": "Fitted exponent of N + 1/2 against t.",
        "algebraic_residual": "RMS log-residual of the algebraic model.",
        "exponential_rate": "Fitted decay rate of log N against t.",
        "exponential_residual": "RMS log-residual of the exponential model.",
        "preferred": "Model with the lower residual.",
        "monotone": "Whether the exact trajectory is non-increasing.",
    },
    "stationary": {
        "index": "Stationary state index.",
        "kernel_dimension": "Dimension of the Liouvillian null space.",
        "sectors": "Particle numbers carrying weight.",
        "fidelity_vacuum": "Fidelity with the vacuum.",
        "fidelity_identity": "Fidelity with the weighted normalised identities sum_N p_N 1_N / d_N.",
        "negativity": "Mixture negativity.",
        "block_diagonal": "Whether every component is block-diagonal.",
        "trace_distance_asymptotic": "Trace distance between the evolved initial state at the grid end and this state.",
        "commutant_dimension": "Dimension of the commutant of H and the jumps on the largest sector; empty when the jumps change N.",
    },
}
