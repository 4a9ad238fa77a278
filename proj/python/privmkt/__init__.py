# Copyright 2026 The privmkt Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Equilibrium solver for privacy-differentiated free services markets.

The heavy lifting lives in the compiled extension ``privmkt._privmkt``; this
package re-exports its public surface.
"""

from ._privmkt import (  # noqa: F401
    BandCheck,
    BestResponseTrace,
    BruteForceStage2Result,
    Certificate,
    CertifiedOutcome,
    ClosedFormSolution,
    DegenerateDifferentiation,
    DeviationCheck,
    DistributionKind,
    EmptyDomain,
    EquilibriumOutcome,
    FeasibilityReport,
    GridBestResponse,
    GridSpec,
    IbrResult,
    InvalidParameter,
    IterationRecord,
    MarginCheck,
    MarketParams,
    NonConvergence,
    NotAnEquilibrium,
    RiskDistribution,
    ShareResult,
    SingularSystem,
    SolveMethod,
    SolverConfig,
    SolverError,
    SPStrategy,
    Stage2System,
    Termination,
    Threshold,
    best_response_eps,
    brute_force_stage2,
    build_stage2_system,
    cdf,
    certify,
    check_feasibility,
    consumer_utility,
    derived_constants,
    evaluate_outcome,
    grid_best_response,
    indifference_threshold,
    inverse_cdf,
    iterate_best_response,
    market_shares,
    one_shot_best_response,
    oracle_v_max,
    refine_stage2_qos,
    solve_closed_form,
    solve_spne,
    solve_spne_certified,
    sp_margin,
    sp_profit,
    sp_profits,
    stage1_foc_residuals,
    stage1_profits,
    stage2_qos,
    stage2_qos_profile,
    stage2_solve,
)

__version__ = "0.1.0"
