from .bqrvcss import BQRVCSSSampler, run_chain
from .variants import BQRVCSampler, BVCSSSampler, BVCSampler, run_bqrvc, run_bvc, run_bvcss
from .runner import build_sampler, fit_posterior

__all__ = [
    "BQRVCSSSampler", "BQRVCSampler", "BVCSSSampler", "BVCSampler",
    "run_chain", "run_bqrvc", "run_bvcss", "run_bvc",
    "build_sampler", "fit_posterior",
]
