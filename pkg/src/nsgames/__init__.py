"""Nonlocal games: classical, quantum and non-signaling values, box networks and bounds."""

from .game import (
    NOT_ASKED,
    Game,
    Question,
    builtin_game,
    check_uniqueness,
    dumps_game,
    load_game,
    loads_game,
    make_chsh,
    make_chsh_n,
    make_distributed_chsh,
    make_exor_game,
    make_extended_chsh,
    make_extended_chsh_n,
    make_ghz_game,
    make_teleported_chsh,
    save_game,
    tabulate,
    validate_game,
)
from .classical import deterministic_value, evaluate_deterministic
from .quantum import canonical_strategy, evaluate_quantum, simulate_teleported_chsh
from .simplex import InfeasibleError, LinearProgram, UnboundedError, solve_lp, to_cplex_lp
from .nonsignaling import (
    ConditionalTable,
    MultiRoundTable,
    build_ns_polytope,
    check_multiround_ns,
    check_nonsignaling,
    constrained_ns_value,
    ns_value,
    output_constraint,
    vertex_is_deterministic,
)
from .boxes import (
    NSBox,
    NetworkStrategy,
    QueryStep,
    WiringProgram,
    evaluate_network,
    exor_box_strategy,
    factorize,
    nonlocal_box,
    resource_r,
    sample_network,
    selection_box,
)
from .surgery import (
    ParameterizedStrategy,
    SourceStrategy,
    check_v_compatible,
    fix_randomness,
    iterate_surgery,
    loss_probability,
    parameterize,
)
from .bounds import (
    best_n,
    gap_table,
    ns_bound_chsh_plus_k,
    ns_bound_chshn,
    quantum_lb_chsh_plus_k,
    quantum_lb_chshn,
    verify_markov_identity,
)
from .report import emit_report
from .values import GameValueReport, game_values

__version__ = "0.1.0"
