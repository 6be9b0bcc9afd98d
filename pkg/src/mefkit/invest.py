"""Capacity-expansion planning over representative load blocks.

Chooses conventional capacity additions per node and year that minimize
discounted generation plus fixed plus investment costs while meeting demand in
every load block.  Renewable and storage capacities are exogenous: they enter
as per-block feed-in that reduces the load conventional capacity must serve.
Investment cost is annualized (EUR per MW and year) and charged in every
modeled year a vintage is alive: a vintage added in year ``y'`` serves years
``y' <= y <= y' + lifetime``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lp
from .model import PlantCluster, Scenario, ScenarioError


@dataclass
class CandidateTech:
    name: str
    cinv: float  # EUR/MW/a, annualized investment cost
    cfix: float  # EUR/MW/a
    cvar: float  # EUR/MWh
    lifetime: int  # years
    efficiency: float = 1.0
    carbon_content: float = 0.0
    availability: float = 1.0  # derated capacity credit


@dataclass
class LoadBlock:
    hours: float  # duration weight within the year
    demand_mw: float
    res_mw: float = 0.0  # exogenous renewable/storage feed-in


@dataclass
class InvestProblem:
    nodes: list
    years: list
    techs: list
    blocks: dict  # (node, year) -> [LoadBlock]
    existing: dict = field(default_factory=dict)  # (node, tech, year) -> MW
    discount: dict = field(default_factory=dict)  # year -> df in (0, 1]
    shed_cost: float = 3000.0

    def validate(self) -> "InvestProblem":
        if not self.years:
            raise ScenarioError("invest problem declares no years")
        for tech in self.techs:
            if tech.lifetime < 1:
                raise ScenarioError(f"tech {tech.name}: lifetime must be >= 1 year")
            if not 0.0 < tech.availability <= 1.0:
                raise ScenarioError(f"tech {tech.name}: availability in (0,1]")
        for year in self.years:
            df = self.discount.get(year, 1.0)
            if not 0.0 < df <= 1.0:
                raise ScenarioError(f"discount factor for {year} outside (0,1]")
            for node in self.nodes:
                if (node, year) not in self.blocks:
                    raise ScenarioError(f"no load blocks for ({node}, {year})")
                for blk in self.blocks[(node, year)]:
                    if blk.hours <= 0 or blk.demand_mw < 0:
                        raise ScenarioError("load block with nonpositive weight "
                                            "or negative demand")
        return self


@dataclass
class CapacityPlan:
    added: dict  # (node, tech, year) -> MW
    installed: dict  # (node, tech, year) -> MW, sum of vintages still alive
    objective: float = 0.0

    def installed_total(self, node, tech, year, existing=0.0) -> float:
        return existing + self.installed.get((node, tech, year), 0.0)


def _alive(vintage: int, year: int, lifetime: int) -> bool:
    return vintage <= year <= vintage + lifetime


def solve_invest(problem: InvestProblem) -> CapacityPlan:
    problem.validate()
    prog = lp.LinearProgram()
    years = sorted(problem.years)
    add_idx = {}
    offset = 0.0

    for node in problem.nodes:
        for tech in problem.techs:
            for y in years:
                # annualized capex+fix charged in every alive modeled year
                cost = sum(problem.discount.get(yy, 1.0) * (tech.cinv + tech.cfix)
                           for yy in years if _alive(y, yy, tech.lifetime))
                add_idx[(node, tech.name, y)] = prog.add_var(
                    f"add[{node},{tech.name},{y}]", 0.0, lp.INF, cost)

    for node in problem.nodes:
        for y in years:
            df = problem.discount.get(y, 1.0)
            for tech in problem.techs:
                ex = problem.existing.get((node, tech.name, y), 0.0)
                offset += df * tech.cfix * ex
            for bi, blk in enumerate(problem.blocks[(node, y)]):
                gen_vars = {}
                coeffs = {}
                for tech in problem.techs:
                    g = prog.add_var(f"gen[{node},{tech.name},{y},{bi}]", 0.0,
                                     lp.INF, df * blk.hours * tech.cvar)
                    gen_vars[tech.name] = g
                    coeffs[g] = 1.0
                    # gen <= af * (existing + alive additions)
                    ex = problem.existing.get((node, tech.name, y), 0.0)
                    cap_coeffs = {g: 1.0}
                    for yv in years:
                        if _alive(yv, y, tech.lifetime):
                            cap_coeffs[add_idx[(node, tech.name, yv)]] = \
                                -tech.availability
                    prog.add_row(cap_coeffs, "<=", tech.availability * ex,
                                 f"cap[{node},{tech.name},{y},{bi}]")
                shed = prog.add_var(f"shed[{node},{y},{bi}]", 0.0, lp.INF,
                                    df * blk.hours * problem.shed_cost)
                curt = prog.add_var(f"curt[{node},{y},{bi}]", 0.0, lp.INF, 0.0)
                coeffs[shed] = 1.0
                coeffs[curt] = -1.0
                prog.add_row(coeffs, "=", blk.demand_mw - blk.res_mw,
                             f"bal[{node},{y},{bi}]")

    sol = lp.solve(prog)
    if sol.status != "optimal":
        raise ScenarioError(f"invest optimization came back {sol.status}")

    added = {}
    installed = {}
    for (node, tech_name, y), j in add_idx.items():
        mw = float(sol.x[j])
        if mw > 1e-9:
            added[(node, tech_name, y)] = mw
    for tech in problem.techs:
        for node in problem.nodes:
            for y in years:
                total = sum(added.get((node, tech.name, yv), 0.0)
                            for yv in years if _alive(yv, y, tech.lifetime))
                if total > 1e-9:
                    installed[(node, tech.name, y)] = total
    return CapacityPlan(added, installed, sol.objective_value + offset)


def problem_from_scenario(scenario: Scenario, candidates, years=None,
                          n_blocks: int = 6, discount=None) -> InvestProblem:
    """Derive load blocks from the scenario's net-load duration curve.

    Net load is demand minus non-dispatchable feed-in; the duration curve is
    split into ``n_blocks`` equal-width segments whose means become block
    demand levels.  Existing capacity is picked up from dispatchable clusters
    whose tech matches a candidate.
    """
    years = list(years) if years is not None else list(scenario.years)
    blocks = {}
    existing = {}
    for node in scenario.nodes:
        net = scenario.demand[node].values.copy()
        for c in scenario.res_clusters():
            if c.node == node:
                net -= np.maximum(
                    c.installed_cap * c.availability.values - c.outages.values, 0.0)
        net = np.maximum(net, 0.0)
        order = np.sort(net)[::-1]
        segments = np.array_split(order, n_blocks)
        # per-segment max gives a staircase above the duration curve, so a
        # feasible plan here stays shed-free in the hourly dispatch
        blks = [LoadBlock(hours=float(len(seg)), demand_mw=float(seg.max()))
                for seg in segments if len(seg)]
        for y in years:
            blocks[(node, y)] = blks
    for c in scenario.dispatchable_clusters():
        for tech in candidates:
            if tech.name == c.tech:
                for y in years:
                    key = (c.node, c.tech, y)
                    existing[key] = existing.get(key, 0.0) + c.installed_cap
    return InvestProblem(
        nodes=list(scenario.nodes),
        years=years,
        techs=list(candidates),
        blocks=blocks,
        existing=existing,
        discount=dict(discount or {}),
        shed_cost=scenario.load_shed_cost,
    ).validate()


def scenario_with_plan(scenario: Scenario, plan: CapacityPlan, year: int,
                       candidates) -> Scenario:
    """Scenario whose cluster fleet includes the plan's installed additions."""
    by_name = {t.name: t for t in candidates}
    clusters = list(scenario.clusters)
    for (node, tech_name, y), mw in sorted(plan.installed.items()):
        if y != year or mw <= 0:
            continue
        tech = by_name[tech_name]
        clusters.append(PlantCluster(
            id=f"plan_{tech_name}_{node}_{y}",
            node=node,
            tech=tech_name,
            installed_cap=mw * tech.availability,
            efficiency=tech.efficiency,
            carbon_content=tech.carbon_content,
            cvar_full=tech.cvar,
        ))
    return Scenario(
        name=f"{scenario.name}+plan{year}",
        start=scenario.start,
        hours=scenario.hours,
        nodes=list(scenario.nodes),
        years=[year],
        clusters=clusters,
        storages=list(scenario.storages),
        interconnectors=list(scenario.interconnectors),
        demand=dict(scenario.demand),
        fuel_prices=dict(scenario.fuel_prices),
        co2_price=dict(scenario.co2_price),
        load_shed_cost=scenario.load_shed_cost,
        res_curtail_cost=scenario.res_curtail_cost,
        grid_loss=scenario.grid_loss,
        pump_limit=scenario.pump_limit,
        mef_node=scenario.mef_node,
    ).validate()


def plan_to_rows(plan: CapacityPlan) -> list:
    """Stable (node, tech, year, added, installed) rows for CSV emission."""
    keys = sorted(set(plan.added) | set(plan.installed))
    return [(n, t, y, plan.added.get((n, t, y), 0.0),
             plan.installed.get((n, t, y), 0.0)) for (n, t, y) in keys]
