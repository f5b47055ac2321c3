"""Deterministic Monte-Carlo simulator for oblivious mobile robot swarms."""

from .error_models import CompassErrorSpec, VisionErrorSpec
from .harness import (AggregateStats, PlacementRule, RunOutcome,
                      ScenarioConfig, run_batch, run_single)
from .robot_model import BLACK, WHITE, PerceivedRobot, Phase, RobotState
from .scheduler import SchedulerConfig
from .termination import Verdict, Witness

__version__ = "1.0.0"

__all__ = [
    "AggregateStats", "BLACK", "CompassErrorSpec", "PerceivedRobot",
    "Phase", "PlacementRule", "RobotState", "RunOutcome", "ScenarioConfig",
    "SchedulerConfig", "Verdict", "VisionErrorSpec", "WHITE", "Witness",
    "run_batch", "run_single", "__version__",
]
