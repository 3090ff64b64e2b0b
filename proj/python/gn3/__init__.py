"""Phase field system with type III heat conduction: solver, norms and alpha -> 0 rate studies."""

from ._gn3 import (
    ConfigError,
    DegenerateComparison,
    DomainError,
    Error,
    Graph,
    Grid,
    IncompatibleData,
    InvalidArgument,
    NumericalFailure,
    default_alphas,
    fit_rate,
    laplacian,
    main,
    minimal_section,
    mms_verify,
    moreau,
    norm,
    parse_config,
    potential,
    rate_study,
    resolvent,
    scenario_names,
    simulate,
    solve_helmholtz,
    sweep,
    yosida,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
