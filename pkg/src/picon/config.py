import os
from dataclasses import dataclass, field

DEFAULT_REWRITE_BUDGET = 10_000
DEFAULT_DEPTH = 6
DEFAULT_MAX_NODES = 100_000
DEFAULT_SEARCH_BUDGET = 200_000


@dataclass(frozen=True)
class RunConfig:
    """Budgets and output options threaded through a run."""

    rewrite_budget: int = DEFAULT_REWRITE_BUDGET
    depth: int = DEFAULT_DEPTH
    max_nodes: int = DEFAULT_MAX_NODES
    search_budget: int = DEFAULT_SEARCH_BUDGET
    ranges: dict = field(default_factory=dict)
    output_format: str = "text"
    strict_subset: bool = False

    def __post_init__(self):
        for name in ("rewrite_budget", "max_nodes", "search_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")

    @classmethod
    def from_env(cls, **kwargs):
        budget = os.environ.get("PICON_BUDGET")
        if budget and "max_nodes" not in kwargs:
            kwargs["max_nodes"] = int(budget)
        return cls(**kwargs)


DEFAULT = RunConfig()
