from cluster_pack.commons import (
    BranchCutError,
    ConfigError,
    ConstraintError,
    InstabilityError,
    OptimizationError,
    SolverError,
    SynthesisError,
    ValidationError,
)
