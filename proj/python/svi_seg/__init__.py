"""Anderson(1)-accelerated stochastic extragradient solver."""

import json as _json

from ._core import (
    FeasibleSet,
    FractionalProblem,
    LcpSviProblem,
    RngStream,
    ScpProblem,
    SolveResult,
    StochasticProblem,
    SviError,
    anderson_coefficient,
    brute_force_lcp,
    build_lcp,
    gen_fractional,
    gen_scp,
    in_sample_length,
    lcp_to_svi,
    sample_schedule,
    sharpe,
    solve,
    solve_seg,
)
from ._core import run_portfolio as _run_portfolio


def run_portfolio(prices, freq="weekly", max_iters=2000, cap=0.2, out=None):
    """Run the portfolio pipeline on a price CSV and return the metrics dict."""
    return _json.loads(_run_portfolio(str(prices), freq, max_iters, cap, None if out is None else str(out)))


__all__ = [name for name in dir() if not name.startswith("_")]
