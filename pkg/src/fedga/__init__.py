"""Energy-aware resource orchestration for synchronized federated learning.

A penalty-guided genetic algorithm picks per-worker CPU frequency and
transmit power offline against a cheap simulated FL environment; the chosen
strategy is then replayed online and compared with random and greedy
schedulers.
"""

from .config import GAConfig, PenaltyWeights, ScenarioConfig, parse_config
from .ga import Chromosome, run_offline
from .scenario import Scenario, generate_scenario

__all__ = [
    "Chromosome",
    "GAConfig",
    "PenaltyWeights",
    "Scenario",
    "ScenarioConfig",
    "generate_scenario",
    "parse_config",
    "run_offline",
]

__version__ = "0.1.0"
