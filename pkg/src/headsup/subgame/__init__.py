from .ranges import (
    Range,
    RangeCollapse,
    update_range,
    update_range_or_uniform,
    sharpen,
    flatten,
)
from .resolver import (
    OpponentModel,
    SubgameSpec,
    ResolveResult,
    blueprint_alt_values,
    build_gadget,
    solve_depth_limited,
    make_subgame_spec,
    subgame_roots,
)

__all__ = [
    "Range", "RangeCollapse", "update_range", "update_range_or_uniform",
    "sharpen", "flatten",
    "OpponentModel", "SubgameSpec", "ResolveResult",
    "blueprint_alt_values", "build_gadget", "solve_depth_limited",
    "make_subgame_spec", "subgame_roots",
]
