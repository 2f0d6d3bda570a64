"""Diffusion auctions on social graphs with exact rational arithmetic."""
from .critical import (BETA, IDM, STRATEGIES, CriticalSequence, CutStrategy, LastPosition,
                       TargetUninformed, critical_sequence, dependents, register_strategy,
                       validate_cut_strategy)
from .dot import export_dot
from .generate import GenConfig, gen_random
from .graph import (DuplicateEdge, Graph, GraphError, InvalidReport, NegativeCycle, RemovalSpec,
                    Report, ReportedProfile, TradingPath, UnknownNode, WelfareResult,
                    efficient_allocation, informed_set, restrict, shortest_trading_path, welfare)
from .io import ParseError, dumps_graph, load_fixture, loads_graph, parse_graph, write_graph
from .mechanisms import (MECHANISMS, AuctionOutcome, EmptyMarket, WeightedGraph, cdm,
                         get_mechanism, vickrey, wdm)

__all__ = [name for name in dir() if not name.startswith("_")]
