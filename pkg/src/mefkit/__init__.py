"""mefkit: hourly marginal emission factors for electricity systems.

Computes a dispatch-based incremental MEF benchmark (rolling-horizon LP with
+1 MWh re-solves), fast statistical estimates (Markov-switching and
time-varying-coefficient regressions), evaluation metrics, and an
emission-minimized EV-charging application.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    MefSeries,
    PlantCluster,
    Scenario,
    ScenarioError,
    StorageUnit,
    TimeSeries,
)
