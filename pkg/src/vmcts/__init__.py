"""P-UCT Monte-Carlo tree search with virtual expansion and early termination."""

from vmcts.search import Policy, SearchConfig, SearchOutcome, search_vanilla
from vmcts.tree import SearchTree
from vmcts.virtual import VetConfig, continue_to_oracle, search_vmcts

__all__ = [
    "Policy", "SearchConfig", "SearchOutcome", "SearchTree", "VetConfig",
    "continue_to_oracle", "search_vanilla", "search_vmcts",
]
__version__ = "0.1.0"
