"""Local majority consensus on sparse graphs: protocols, graph families,
structural audits and analytical bounds."""

__version__ = "0.1.0"

from .errors import (
    AttemptsExhaustedError, ConfigError, DuplicateEdgeError, GenerationError, GraphError,
    LocalMajorityError, NoEffectiveDegreeError, OddDegreeSumError, ScopeError, SelfLoopError,
    VertexRangeError,
)
from .tape import Purpose, RandomnessTape
from .graph import (
    BallView, DegreeSequenceProfile, Graph, ball, build_graph, complete_graph, degree_profile,
    is_tree_like, read_edge_list, regular_tree, write_edge_list,
)
from .generators import GenSpec, gen_configuration, gen_gnp, gen_regular, generate
from .theory import (
    BiasCondition, RecursionTrace, check_condition, complete_graph_chain, closed_form_bound,
    recursion_step, recursion_trace, tree_population,
)
from .protocol import (
    MMP, MP, BLUE, RED, MMPScope, ProtocolRun, coupled_run, initial_colouring, k_of,
    local_stable_check, mmp_scope, run, step_mmp, step_mp,
)
from .structure import (
    ExplorationTree, ThresholdSet, TypicalityReport, check_regular_typicality, check_typicality,
    count_tree_regular, find_small_cycles, t_build, thresholds,
)
from .harness import (
    CampaignReport, ExperimentConfig, emit_report, load_config, planted_lower_bound,
    run_campaign, sweep_alpha,
)
