"""Miner strategies for constant-product pools under the greedy sequencing rule."""

from .arbitrage import (
    ArbBounds,
    PotentialTrace,
    arb_bounds,
    arbitragable_profit,
    is_centered,
    optimal_single_arb,
    potential,
    potential_trace,
    recenter,
    upper_bound,
)
from .curve import AxiomReport, ConstantProduct, CurveParams, DomainError, check_axioms, marginal_rate, reserve_x, reserve_y
from .exchange import (
    ExecutionTrace,
    MarketContext,
    PoolState,
    Side,
    Transaction,
    apply_tx,
    execute_sequence,
    miner_profit,
    standalone_receipt,
    user_receipts,
)
from .partition import PartitionInstance, gen_partition_instance, solve_partition_via_mev
from .scenario import NumericMode, Scenario, load_scenario, random_multiset, random_scenario
from .sequencing import OrderWitness, Tiebreak, greedy_order, verify_gsr
from .strategy import SearchConfig, SearchSizeError, Strategy, achieves_upper_bound, brute_force_optimal, optimal_f0, optimize

__version__ = "0.1.0"
