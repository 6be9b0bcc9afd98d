"""Core domain types: hourly series, plant clusters, storages, scenarios."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

HOUR = dt.timedelta(hours=1)

#: Technologies treated as non-dispatchable (availability-driven) by default.
RES_TECHS = {"onshore", "offshore", "solar", "run-of-river"}

#: Reserve products a cluster can be committed to (exogenous MW).
RESERVE_PRODUCTS = ("pcr", "scr_pos", "scr_neg")

MEF_SOURCES = ("incremental", "msdr", "dlr")


class ScenarioError(ValueError):
    """Schema or invariant violation in scenario input."""


@dataclass
class TimeSeries:
    """Hourly series anchored at a calendar timestamp.

    Length is fixed after construction and NaN values are rejected.
    """

    start: dt.datetime
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("series must be a nonempty 1-d array")
        bad = np.flatnonzero(~np.isfinite(v))
        if bad.size:
            raise ValueError(f"series contains a non-finite value at hour {bad[0]}")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self.start == other.start and np.array_equal(self.values, other.values)

    def timestamps(self):
        return [self.start + i * HOUR for i in range(len(self))]

    def slice(self, a: int, b: int) -> "TimeSeries":
        return TimeSeries(self.start + a * HOUR, self.values[a:b])


@dataclass
class MefSeries:
    """Hourly marginal emission factors in t CO2-eq per MWh (== kg/kWh)."""

    start: dt.datetime
    values: np.ndarray
    source: str
    year: object = None

    def __post_init__(self):
        if self.source not in MEF_SOURCES:
            raise ValueError(f"unknown MEF source {self.source!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("MEF series must be a nonempty 1-d array")
        if not np.all(np.isfinite(v)):
            raise ValueError("MEF series contains a non-finite value")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MefSeries):
            return NotImplemented
        return (
            self.start == other.start
            and self.source == other.source
            and np.array_equal(self.values, other.values)
        )

    def to_timeseries(self) -> TimeSeries:
        return TimeSeries(self.start, self.values)


@dataclass
class PlantCluster:
    """Aggregated generation capacity of one technology at one node.

    ``carbon_content`` is specified per MWh of thermal input; emissions per
    MWh electric are ``carbon_content / efficiency``.
    """

    id: str
    node: str
    tech: str
    installed_cap: float
    efficiency: float = 1.0
    min_load: float = 0.0
    carbon_content: float = 0.0
    cvar_full: float = 0.0
    cvar_min: float | None = None
    cramp: float = 0.0
    availability: TimeSeries | None = None
    outages: TimeSeries | None = None
    is_dispatchable: bool | None = None
    reserves: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.cvar_min is None:
            self.cvar_min = self.cvar_full
        if self.is_dispatchable is None:
            self.is_dispatchable = self.tech not in RES_TECHS

    @property
    def emission_rate(self) -> float:
        """t CO2 per MWh electric."""
        return self.carbon_content / self.efficiency

    def reserve(self, product: str) -> float:
        return float(self.reserves.get(product, 0.0))


@dataclass
class StorageUnit:
    """Storage cluster; mid-term units track a level, long-term units carry a water value."""

    id: str
    node: str
    kind: str  # mid_term | long_term
    turbine_cap: float
    pump_cap_ratio: float = 1.0 / 1.1
    cycle_efficiency: float = 0.75
    energy_power_factor: float = 9.0
    water_value: float = 0.0
    initial_level: float | None = None

    def __post_init__(self):
        if self.initial_level is None:
            self.initial_level = 0.5 * self.energy_capacity

    @property
    def energy_capacity(self) -> float:
        return self.turbine_cap * self.energy_power_factor

    @property
    def pump_cap(self) -> float:
        return self.turbine_cap * self.pump_cap_ratio


@dataclass
class Scenario:
    """Complete desk-scale system parametrization.

    Immutable by convention after :func:`validate`; safe to share across
    concurrent readers.
    """

    name: str
    start: dt.datetime
    hours: int
    nodes: list
    years: list
    clusters: list
    storages: list
    interconnectors: list  # (from_node, to_node, capacity MW)
    demand: dict  # node -> TimeSeries (MWh/h)
    fuel_prices: dict = field(default_factory=dict)  # tech -> {year: EUR/MWh_th}
    co2_price: dict = field(default_factory=dict)  # year -> EUR/t
    load_shed_cost: float = 3000.0
    res_curtail_cost: float = 20.0
    grid_loss: float = 0.0
    pump_limit: float = 1.1
    mef_node: str | None = None

    def __post_init__(self):
        if self.mef_node is None and self.nodes:
            self.mef_node = self.nodes[0]

    # -- derived views ----------------------------------------------------

    @property
    def days(self) -> int:
        return self.hours // 24

    @property
    def res_availability(self) -> dict:
        """(node, tech) -> availability series of non-dispatchable clusters."""
        out = {}
        for c in self.clusters:
            if not c.is_dispatchable and c.availability is not None:
                out[(c.node, c.tech)] = c.availability
        return out

    @property
    def reserve_requirements(self) -> dict:
        """(cluster id, product) -> MW for every nonzero commitment."""
        out = {}
        for c in self.clusters:
            for product in RESERVE_PRODUCTS:
                mw = c.reserve(product)
                if mw:
                    out[(c.id, product)] = mw
        return out

    def total_installed_capacity(self) -> float:
        return float(sum(c.installed_cap for c in self.clusters))

    def dispatchable_clusters(self) -> list:
        return [c for c in self.clusters if c.is_dispatchable]

    def res_clusters(self) -> list:
        return [c for c in self.clusters if not c.is_dispatchable]

    def cluster(self, cluster_id: str) -> PlantCluster:
        for c in self.clusters:
            if c.id == cluster_id:
                return c
        raise KeyError(cluster_id)

    # -- validation --------------------------------------------------------

    def validate(self) -> "Scenario":
        """Check every invariant; raise :class:`ScenarioError` on the first violation.

        Also materializes per-cluster defaults (availability 1, outages 0) so
        downstream consumers can rely on the series being present.
        """
        for c in self.clusters:
            if c.availability is None:
                c.availability = constant_series(self.start, self.hours, 1.0)
            if c.outages is None:
                c.outages = constant_series(self.start, self.hours, 0.0)
        if self.hours <= 0 or self.hours % 24 != 0:
            raise ScenarioError(f"hours must be a positive multiple of 24, got {self.hours}")
        if not self.nodes:
            raise ScenarioError("scenario declares no nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise ScenarioError("duplicate node id")
        ids = [c.id for c in self.clusters] + [s.id for s in self.storages]
        if len(set(ids)) != len(ids):
            raise ScenarioError("duplicate cluster/storage id")
        if not 0.0 <= self.grid_loss < 1.0:
            raise ScenarioError(f"grid_loss must lie in [0,1), got {self.grid_loss}")
        for label, cost in (("load_shed_cost", self.load_shed_cost),
                            ("res_curtail_cost", self.res_curtail_cost)):
            if cost < 0:
                raise ScenarioError(f"{label} must be >= 0, got {cost}")
        if self.pump_limit <= 0:
            raise ScenarioError("pump_limit must be positive")
        if self.mef_node not in self.nodes:
            raise ScenarioError(f"mef_node {self.mef_node!r} is not a declared node")

        for node in self.nodes:
            if node not in self.demand:
                raise ScenarioError(f"node {node}: no demand series")
        for node, series in self.demand.items():
            if node not in self.nodes:
                raise ScenarioError(f"demand given for undeclared node {node}")
            self._check_len(f"node {node}: demand", series)
            t = int(np.argmin(series.values))
            if series.values[t] < 0:
                raise ScenarioError(f"node {node}: demand negative at hour {t}")

        for c in self.clusters:
            where = f"cluster {c.id}"
            if c.node not in self.nodes:
                raise ScenarioError(f"{where}: undeclared node {c.node}")
            if c.installed_cap < 0:
                raise ScenarioError(f"{where}: installed_cap must be >= 0")
            if not 0.0 < c.efficiency <= 1.0:
                raise ScenarioError(f"{where}: efficiency must lie in (0,1]")
            if not 0.0 <= c.min_load < 1.0:
                raise ScenarioError(f"{where}: min_load must lie in [0,1)")
            if c.carbon_content < 0:
                raise ScenarioError(f"{where}: carbon_content must be >= 0")
            if c.cramp < 0:
                raise ScenarioError(f"{where}: cramp must be >= 0")
            for product in c.reserves:
                if product not in RESERVE_PRODUCTS:
                    raise ScenarioError(f"{where}: unknown reserve product {product!r}")
                if c.reserves[product] < 0:
                    raise ScenarioError(f"{where}: reserve {product} must be >= 0")
            if c.availability is not None:
                self._check_len(f"{where}: availability", c.availability)
                av = c.availability.values
                bad = np.flatnonzero((av < 0.0) | (av > 1.0))
                if bad.size:
                    raise ScenarioError(
                        f"{where}: availability out of [0,1] at hour {bad[0]}")
            if c.outages is not None:
                self._check_len(f"{where}: outages", c.outages)
                bad = np.flatnonzero(c.outages.values < 0.0)
                if bad.size:
                    raise ScenarioError(f"{where}: outages negative at hour {bad[0]}")

        for s in self.storages:
            where = f"storage {s.id}"
            if s.node not in self.nodes:
                raise ScenarioError(f"{where}: undeclared node {s.node}")
            if s.kind not in ("mid_term", "long_term"):
                raise ScenarioError(f"{where}: kind must be mid_term or long_term")
            if s.turbine_cap < 0:
                raise ScenarioError(f"{where}: turbine_cap must be >= 0")
            if not 0.0 < s.cycle_efficiency <= 1.0:
                raise ScenarioError(f"{where}: cycle_efficiency must lie in (0,1]")
            if s.energy_power_factor <= 0:
                raise ScenarioError(f"{where}: energy_power_factor must be > 0")
            if not 0.0 <= s.initial_level <= s.energy_capacity:
                raise ScenarioError(
                    f"{where}: initial_level outside [0, {s.energy_capacity}]")
            if not 0.0 < s.pump_cap_ratio <= 1.0:
                raise ScenarioError(f"{where}: pump_cap_ratio must lie in (0,1]")

        for (a, b, cap) in self.interconnectors:
            if a not in self.nodes or b not in self.nodes:
                raise ScenarioError(f"interconnector {a}->{b}: undeclared endpoint")
            if cap < 0:
                raise ScenarioError(f"interconnector {a}->{b}: capacity must be >= 0")

        for tech, per_year in self.fuel_prices.items():
            for year, p in per_year.items():
                if p < 0:
                    raise ScenarioError(f"fuel price {tech}/{year} must be >= 0")
        for year, p in self.co2_price.items():
            if p < 0:
                raise ScenarioError(f"co2 price {year} must be >= 0")
        return self

    def _check_len(self, what: str, series: TimeSeries):
        if len(series) != self.hours:
            raise ScenarioError(
                f"{what}: length {len(series)} != scenario hours {self.hours}")
        if series.start != self.start:
            raise ScenarioError(f"{what}: series start differs from scenario start")


def constant_series(start: dt.datetime, hours: int, value: float) -> TimeSeries:
    return TimeSeries(start, np.full(hours, float(value)))
