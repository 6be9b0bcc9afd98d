"""Scenario config grammar and hourly CSV ingestion.

A scenario root is a directory holding ``scenario.cfg`` plus the CSV series it
references.  The config format is line based::

    # comment
    [scenario]
    name = toy
    start = 2030-01-01T00:00:00
    hours = 72
    ...
    [cluster gas1]
    node = DE
    tech = gas
    ...

Section headers carry a kind and, for entities, an id.  Values are scalars,
ISO timestamps, or CSV file names (resolved relative to the root).  Hourly CSVs
use the schema ``timestamp,value`` with ISO-8601 timestamps, comma separator,
dot decimal, UTF-8 and LF line endings; a trailing ``source`` column is added
for MEF series.
"""
from __future__ import annotations

import datetime as dt
from pathlib import Path

import numpy as np

from .model import (
    MefSeries,
    PlantCluster,
    Scenario,
    ScenarioError,
    StorageUnit,
    TimeSeries,
)

CONFIG_NAME = "scenario.cfg"

_SCENARIO_KEYS = {
    "name", "start", "hours", "years", "grid_loss", "load_shed_cost",
    "res_curtail_cost", "pump_limit", "mef_node",
}
_NODE_KEYS = {"demand"}
_CLUSTER_KEYS = {
    "node", "tech", "installed_cap", "efficiency", "min_load", "carbon_content",
    "cvar_full", "cvar_min", "cramp", "availability", "outages", "dispatchable",
    "reserve_pcr", "reserve_scr_pos", "reserve_scr_neg",
}
_STORAGE_KEYS = {
    "node", "kind", "turbine_cap", "pump_cap_ratio", "cycle_efficiency",
    "energy_power_factor", "water_value", "initial_level",
}
_LINK_KEYS = {"capacity"}


def _fmt(v: float) -> str:
    """Shortest decimal text that round-trips the double exactly."""
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


# ---------------------------------------------------------------------------
# hourly CSV


def write_series_csv(series, path, source: str | None = None) -> None:
    """Write a TimeSeries or MefSeries as ``timestamp,value[,source]`` rows."""
    if isinstance(series, MefSeries):
        source = series.source if source is None else source
    values = series.values
    if values.size == 0:
        raise ValueError("refusing to write an empty series")
    start = series.start
    lines = ["timestamp,value" + (",source" if source is not None else "")]
    for i in range(values.size):
        stamp = (start + i * dt.timedelta(hours=1)).isoformat()
        row = f"{stamp},{_fmt(values[i])}"
        if source is not None:
            row += f",{source}"
        lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_series_csv(path):
    """Read an hourly CSV; returns ``(TimeSeries, source or None)``."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"missing series file {path}")
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise ScenarioError(f"{path}: empty series file")
    header = lines[0].strip().split(",")
    if header[:2] != ["timestamp", "value"]:
        raise ScenarioError(f"{path}: expected header 'timestamp,value[,source]'")
    has_source = len(header) >= 3 and header[2] == "source"
    stamps, values, source = [], [], None
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) < 2:
            raise ScenarioError(f"{path}: malformed row {ln!r}")
        stamps.append(dt.datetime.fromisoformat(parts[0]))
        values.append(float(parts[1]))
        if has_source:
            source = parts[2]
    if not values:
        raise ScenarioError(f"{path}: no data rows")
    for i in range(1, len(stamps)):
        if stamps[i] - stamps[i - 1] != dt.timedelta(hours=1):
            raise ScenarioError(f"{path}: non-hourly step before row {i + 1}")
    return TimeSeries(stamps[0], np.array(values)), source


def read_mef_csv(path) -> MefSeries:
    series, source = read_series_csv(path)
    if source is None:
        raise ScenarioError(f"{path}: MEF csv lacks a source column")
    return MefSeries(series.start, series.values, source)


# ---------------------------------------------------------------------------
# config parsing


def _parse_sections(text: str, where: str):
    sections = []
    current = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioError(f"{where}:{lineno}: unterminated section header")
            head = line[1:-1].split()
            if not head:
                raise ScenarioError(f"{where}:{lineno}: empty section header")
            current = {"kind": head[0], "args": head[1:], "line": lineno, "items": {}}
            sections.append(current)
            continue
        if "=" not in line:
            raise ScenarioError(f"{where}:{lineno}: expected 'key = value'")
        if current is None:
            raise ScenarioError(f"{where}:{lineno}: key outside any section")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.split("#", 1)[0].strip()
        if key in current["items"]:
            raise ScenarioError(f"{where}:{lineno}: duplicate key {key!r}")
        current["items"][key] = value
    return sections


def _check_keys(sec, allowed, required, where):
    for k in sec["items"]:
        if k not in allowed:
            raise ScenarioError(f"{where}: unknown key {k!r}")
    for k in required:
        if k not in sec["items"]:
            raise ScenarioError(f"{where}: missing required key {k!r}")


def _num(sec, key, where, default=None):
    if key not in sec["items"]:
        return default
    try:
        return float(sec["items"][key])
    except ValueError:
        raise ScenarioError(f"{where}: key {key!r} is not a number") from None


def _series_or_const(sec, key, root, start, hours, default):
    """A key may be a constant or the name of a CSV file in the scenario root."""
    raw = sec["items"].get(key)
    if raw is None:
        return TimeSeries(start, np.full(hours, float(default)))
    try:
        return TimeSeries(start, np.full(hours, float(raw)))
    except ValueError:
        pass
    series, _ = read_series_csv(root / raw)
    return series


def load_scenario(path) -> Scenario:
    """Load and validate a scenario root (directory or config file path)."""
    path = Path(path)
    cfg = path / CONFIG_NAME if path.is_dir() else path
    root = cfg.parent
    if not cfg.exists():
        raise FileNotFoundError(f"missing scenario config {cfg}")
    sections = _parse_sections(cfg.read_text(encoding="utf-8"), str(cfg))

    heads = [s for s in sections if s["kind"] == "scenario"]
    if len(heads) != 1:
        raise ScenarioError(f"{cfg}: expected exactly one [scenario] section")
    head = heads[0]
    _check_keys(head, _SCENARIO_KEYS, {"name", "start", "hours"}, f"{cfg} [scenario]")
    try:
        start = dt.datetime.fromisoformat(head["items"]["start"])
    except ValueError:
        raise ScenarioError(f"{cfg}: [scenario] start is not an ISO timestamp") from None
    hours = int(_num(head, "hours", "[scenario]"))
    years = [int(y) for y in head["items"].get("years", "").split()] or [start.year]

    nodes, demand = [], {}
    clusters, storages, links = [], [], []
    fuel_prices, co2_price = {}, {}

    for sec in sections:
        kind, args = sec["kind"], sec["args"]
        where = f"{cfg}:{sec['line']} [{kind}{' ' + ' '.join(args) if args else ''}]"
        if kind == "scenario":
            continue
        if kind == "node":
            if len(args) != 1:
                raise ScenarioError(f"{where}: expected [node <id>]")
            _check_keys(sec, _NODE_KEYS, {"demand"}, where)
            node = args[0]
            if node in nodes:
                raise ScenarioError(f"{where}: duplicate node {node}")
            nodes.append(node)
            series, _ = read_series_csv(root / sec["items"]["demand"])
            demand[node] = series
        elif kind == "cluster":
            if len(args) != 1:
                raise ScenarioError(f"{where}: expected [cluster <id>]")
            _check_keys(sec, _CLUSTER_KEYS, {"node", "tech", "installed_cap"}, where)
            reserves = {}
            for product in ("pcr", "scr_pos", "scr_neg"):
                mw = _num(sec, f"reserve_{product}", where, 0.0)
                if mw:
                    reserves[product] = mw
            dispatchable = None
            if "dispatchable" in sec["items"]:
                flag = sec["items"]["dispatchable"].lower()
                if flag not in ("true", "false"):
                    raise ScenarioError(f"{where}: dispatchable must be true or false")
                dispatchable = flag == "true"
            clusters.append(PlantCluster(
                id=args[0],
                node=sec["items"]["node"],
                tech=sec["items"]["tech"],
                installed_cap=_num(sec, "installed_cap", where),
                efficiency=_num(sec, "efficiency", where, 1.0),
                min_load=_num(sec, "min_load", where, 0.0),
                carbon_content=_num(sec, "carbon_content", where, 0.0),
                cvar_full=_num(sec, "cvar_full", where, None),
                cvar_min=_num(sec, "cvar_min", where, None),
                cramp=_num(sec, "cramp", where, 0.0),
                availability=_series_or_const(sec, "availability", root, start, hours, 1.0),
                outages=_series_or_const(sec, "outages", root, start, hours, 0.0),
                is_dispatchable=dispatchable,
                reserves=reserves,
            ))
        elif kind == "storage":
            if len(args) != 1:
                raise ScenarioError(f"{where}: expected [storage <id>]")
            _check_keys(sec, _STORAGE_KEYS, {"node", "kind", "turbine_cap"}, where)
            storages.append(StorageUnit(
                id=args[0],
                node=sec["items"]["node"],
                kind=sec["items"]["kind"],
                turbine_cap=_num(sec, "turbine_cap", where),
                pump_cap_ratio=_num(sec, "pump_cap_ratio", where, 1.0 / 1.1),
                cycle_efficiency=_num(sec, "cycle_efficiency", where, 0.75),
                energy_power_factor=_num(sec, "energy_power_factor", where, 9.0),
                water_value=_num(sec, "water_value", where, 0.0),
                initial_level=_num(sec, "initial_level", where, None),
            ))
        elif kind == "link":
            if len(args) != 2:
                raise ScenarioError(f"{where}: expected [link <from> <to>]")
            _check_keys(sec, _LINK_KEYS, {"capacity"}, where)
            links.append((args[0], args[1], _num(sec, "capacity", where)))
        elif kind == "fuel_price":
            if len(args) != 1:
                raise ScenarioError(f"{where}: expected [fuel_price <tech>]")
            fuel_prices[args[0]] = {
                int(y): float(v) for y, v in sec["items"].items()}
        elif kind == "co2_price":
            co2_price.update({int(y): float(v) for y, v in sec["items"].items()})
        else:
            raise ScenarioError(f"{where}: unknown section kind {kind!r}")

    scenario = Scenario(
        name=head["items"]["name"],
        start=start,
        hours=hours,
        nodes=nodes,
        years=years,
        clusters=clusters,
        storages=storages,
        interconnectors=links,
        demand=demand,
        fuel_prices=fuel_prices,
        co2_price=co2_price,
        load_shed_cost=_num(head, "load_shed_cost", "[scenario]", 3000.0),
        res_curtail_cost=_num(head, "res_curtail_cost", "[scenario]", 20.0),
        grid_loss=_num(head, "grid_loss", "[scenario]", 0.0),
        pump_limit=_num(head, "pump_limit", "[scenario]", 1.1),
        mef_node=head["items"].get("mef_node"),
    )
    _derive_costs(scenario)
    return scenario.validate()


def _derive_costs(scenario: Scenario) -> None:
    """Fill missing cvar_full from fuel and CO2 prices: (fuel + co2*carb)/eta."""
    year = scenario.years[0]
    for c in scenario.clusters:
        if c.cvar_full is None:
            fuel = scenario.fuel_prices.get(c.tech, {}).get(year, 0.0)
            co2 = scenario.co2_price.get(year, 0.0)
            c.cvar_full = (fuel + co2 * c.carbon_content) / c.efficiency
        if c.cvar_min is None:
            c.cvar_min = c.cvar_full


# ---------------------------------------------------------------------------
# scenario writing (round-trip partner of load_scenario)


def write_scenario(scenario: Scenario, path) -> None:
    """Write a scenario root that :func:`load_scenario` reads back identically."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    lines = ["[scenario]"]
    lines.append(f"name = {scenario.name}")
    lines.append(f"start = {scenario.start.isoformat()}")
    lines.append(f"hours = {scenario.hours}")
    lines.append(f"years = {' '.join(str(y) for y in scenario.years)}")
    lines.append(f"grid_loss = {_fmt(scenario.grid_loss)}")
    lines.append(f"load_shed_cost = {_fmt(scenario.load_shed_cost)}")
    lines.append(f"res_curtail_cost = {_fmt(scenario.res_curtail_cost)}")
    lines.append(f"pump_limit = {_fmt(scenario.pump_limit)}")
    lines.append(f"mef_node = {scenario.mef_node}")

    def emit_series(name: str, series: TimeSeries) -> str:
        fname = f"{name}.csv"
        write_series_csv(series, root / fname)
        return fname

    for node in scenario.nodes:
        lines += ["", f"[node {node}]"]
        lines.append(f"demand = {emit_series(f'demand_{node}', scenario.demand[node])}")

    for c in scenario.clusters:
        lines += ["", f"[cluster {c.id}]"]
        lines.append(f"node = {c.node}")
        lines.append(f"tech = {c.tech}")
        lines.append(f"installed_cap = {_fmt(c.installed_cap)}")
        lines.append(f"efficiency = {_fmt(c.efficiency)}")
        lines.append(f"min_load = {_fmt(c.min_load)}")
        lines.append(f"carbon_content = {_fmt(c.carbon_content)}")
        lines.append(f"cvar_full = {_fmt(c.cvar_full)}")
        lines.append(f"cvar_min = {_fmt(c.cvar_min)}")
        lines.append(f"cramp = {_fmt(c.cramp)}")
        av = c.availability.values
        if np.all(av == av[0]):
            lines.append(f"availability = {_fmt(av[0])}")
        else:
            lines.append(f"availability = {emit_series(f'avail_{c.id}', c.availability)}")
        out = c.outages.values
        if np.all(out == out[0]):
            lines.append(f"outages = {_fmt(out[0])}")
        else:
            lines.append(f"outages = {emit_series(f'out_{c.id}', c.outages)}")
        lines.append(f"dispatchable = {'true' if c.is_dispatchable else 'false'}")
        for product, mw in sorted(c.reserves.items()):
            lines.append(f"reserve_{product} = {_fmt(mw)}")

    for s in scenario.storages:
        lines += ["", f"[storage {s.id}]"]
        lines.append(f"node = {s.node}")
        lines.append(f"kind = {s.kind}")
        lines.append(f"turbine_cap = {_fmt(s.turbine_cap)}")
        lines.append(f"pump_cap_ratio = {_fmt(s.pump_cap_ratio)}")
        lines.append(f"cycle_efficiency = {_fmt(s.cycle_efficiency)}")
        lines.append(f"energy_power_factor = {_fmt(s.energy_power_factor)}")
        lines.append(f"water_value = {_fmt(s.water_value)}")
        lines.append(f"initial_level = {_fmt(s.initial_level)}")

    for (a, b, cap) in scenario.interconnectors:
        lines += ["", f"[link {a} {b}]", f"capacity = {_fmt(cap)}"]

    for tech in sorted(scenario.fuel_prices):
        lines += ["", f"[fuel_price {tech}]"]
        for year in sorted(scenario.fuel_prices[tech]):
            lines.append(f"{year} = {_fmt(scenario.fuel_prices[tech][year])}")
    if scenario.co2_price:
        lines += ["", "[co2_price]"]
        for year in sorted(scenario.co2_price):
            lines.append(f"{year} = {_fmt(scenario.co2_price[year])}")

    (root / CONFIG_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8",
                                    newline="\n")
