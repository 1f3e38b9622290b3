from .autodiff import (
    DomainError,
    Dual,
    Jet2,
    cos,
    eval_jet2,
    exp,
    gradient,
    hessian,
    is_dual,
    jacobian,
    log,
    primal,
    primal_array,
    sin,
    sqrt,
    tidy,
)
from .fdcheck import FDReport, fd_check, fd_gradient, fd_hessian, fd_jacobian
from .linalg import (
    GeneralizedEig,
    NotPositiveDefinite,
    SymMatrix,
    det,
    group_eigenvalues,
    inv,
    solve,
    solve_sym_geig,
)
