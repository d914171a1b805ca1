"""Iterated prisoner's dilemma tournaments and extortion detection."""
from .dynamics import (
    FixationResult,
    PayoffMatrix,
    build_payoff_matrix,
    moran_fixation_analytic,
    moran_fixation_simulated,
    replicator_stationary,
)
from .engine import InteractionRecord, TournamentConfig, mix_seed, play_match, run_tournament
from .game import Action, MatchHistory, MemoryOneVector, PayoffParams, score_history
from .stats import ols_fit, rank_strategies, summarize
from .strategies import Classic, LookupTable, MemoryOne, default_catalog, resolve
from .zd import (
    Verdict,
    ZDFit,
    chi_closed_form,
    detect_extortion,
    fit_zd,
    is_extortionate_exact,
    measure_memory_one,
)

__version__ = "0.1.0"

__all__ = [
    "Action", "Classic", "FixationResult", "InteractionRecord", "LookupTable", "MatchHistory",
    "MemoryOne", "MemoryOneVector", "PayoffMatrix", "PayoffParams", "TournamentConfig",
    "Verdict", "ZDFit", "build_payoff_matrix", "chi_closed_form", "default_catalog",
    "detect_extortion", "fit_zd", "is_extortionate_exact", "measure_memory_one", "mix_seed",
    "moran_fixation_analytic", "moran_fixation_simulated", "ols_fit", "play_match",
    "rank_strategies", "replicator_stationary", "resolve", "run_tournament", "score_history",
    "summarize",
]
