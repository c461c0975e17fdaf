"""Solver for minimal market-clearing prices in unit- and multi-demand auctions.

Exact integer arithmetic throughout; ascending price adjustment with
interchangeable item-set selection strategies, brute-force oracles for
verification, and a JSON instance format with a CLI front end.
"""

from .auction import (Allocation, AuctionResult, DescentWitness,
                      EquilibriumVerdict, MultiAllocation, StepDiagnostics,
                      UnitAllocation, allocation_certifies, ascending_auction,
                      extract_allocation, is_excess_demand, is_overdemanded,
                      verify_equilibrium)
from .demand import (DemandCache, bidders_demanding_some,
                     bidders_only_demanding, demand_set, greedy_demand_bundle,
                     mu, unit_demand_set)
from .errors import (BudgetExceededError, ContractError, ConvexityError,
                     InstanceFormatError, IterationCapError, WalrasError)
from .instance import (DEFAULT_BUDGET, EXPLICIT_TABLE, MULTI,
                       SEPARABLE_CONCAVE, UNIT, UNIT_DEMAND, Bundle, Instance,
                       ItemSet, MnatCounterexample, MonotonicityCounterexample,
                       PriceVector, Valuation, evaluate, load_instance,
                       max_total_value, parse_instance, serialize_instance,
                       verify_mnat_exc, verify_monotone_normalized)
from .lnat import (FunctionOracle, LnatCounterexample, Step, StrategyKind,
                   Trajectory, first_gp_minimal, is_gp_minimal,
                   is_lnat_convex_on_box, maximal_gp_minimal,
                   minimal_descent_set, minimal_minimizer_step, minimize)
from .lyapunov import LyapunovOracle, deficiency, lyapunov, lyapunov_step
from .oracle import (all_lyapunov_minimizers, brute_force_min_equilibrium,
                     equilibrium_prices_by_enumeration, price_cap)

__version__ = "0.1.0"
