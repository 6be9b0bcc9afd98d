"""Rolling-horizon dispatch: one 72-hour LP per day, keeping the middle day.

Windows tile the year.  The window for day ``d`` spans days ``d-1 .. d+1``
(truncated at the calendar edges: day 1 optimizes days 1-2, the last day the
final two days) and only the 24 hours of day ``d`` are kept.  Storage levels
and online capacity carried into a window equal the end-of-kept-day state of
the previous window, so kept days chain continuously.

Model reductions that preserve the optimum exactly:

* dispatchable clusters with no minimum load, no ramp cost, no partial-load
  cost premium and no reserve commitment need no online-capacity tracking;
  their generation is bounded directly by available capacity, and online
  capacity / start-ups are reconstructed from the generation profile;
* non-dispatchable feed-in enters the balance as a constant minus the
  curtailment variable.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import lp
from .model import Scenario, TimeSeries


class DispatchError(RuntimeError):
    """Internal dispatch failure (window identified in the message)."""


@dataclass
class CarriedState:
    storage_level: dict = field(default_factory=dict)  # storage id -> MWh
    online: dict = field(default_factory=dict)  # cluster id -> MW

    def copy(self) -> "CarriedState":
        return CarriedState(dict(self.storage_level), dict(self.online))


@dataclass
class DispatchWindow:
    day: int  # 0-based kept-day index
    start_hour: int
    n_hours: int
    keep_offset: int  # kept day's first hour relative to start_hour
    carried_state: CarriedState | None = None

    @property
    def keep_slice(self) -> slice:
        return slice(self.keep_offset, self.keep_offset + 24)

    @property
    def hours(self) -> range:
        return range(self.start_hour, self.start_hour + self.n_hours)


def windows_for(hours: int) -> list:
    """Tile `hours` (a multiple of 24) into rolling windows, one per day."""
    days = hours // 24
    out = []
    for d in range(days):
        s = max(0, (d - 1) * 24)
        e = min(hours, (d + 2) * 24)
        out.append(DispatchWindow(day=d, start_hour=s, n_hours=e - s,
                                  keep_offset=d * 24 - s))
    return out


def initial_state(scenario: Scenario) -> CarriedState:
    state = CarriedState()
    for s in scenario.storages:
        if s.kind == "mid_term":
            state.storage_level[s.id] = float(s.initial_level)
    for c in scenario.clusters:
        if _is_committed(c):
            state.online[c.id] = 0.0
    return state


def _is_committed(cluster) -> bool:
    if not cluster.is_dispatchable:
        return False
    return (cluster.min_load > 0.0 or cluster.cramp > 0.0
            or cluster.cvar_min != cluster.cvar_full
            or any(cluster.reserves.values()))


class WindowModel:
    """LP for one window plus the index maps needed to read solutions back."""

    def __init__(self, scenario: Scenario, window: DispatchWindow,
                 perturbation: tuple | None = None):
        self.scenario = scenario
        self.window = window
        state = window.carried_state or initial_state(scenario)
        T = window.n_hours
        h0 = window.start_hour
        if perturbation is not None:
            hour, _ = perturbation
            lo = h0 + window.keep_offset
            if not lo <= hour < lo + 24:
                raise ValueError(
                    f"perturbation hour {hour} outside the kept day of window "
                    f"{window.day}")

        prog = lp.LinearProgram()
        nodes = scenario.nodes
        n_idx = {n: i for i, n in enumerate(nodes)}
        gl_in = 1.0 - scenario.grid_loss / 2.0
        gl_out = 1.0 + scenario.grid_loss / 2.0

        conv = scenario.clusters
        self.committed = [_is_committed(c) for c in conv]
        self.rates = np.array([c.emission_rate for c in conv])

        nan = -1
        self.gen_idx = np.full((len(conv), T), nan, dtype=np.int64)
        self.pon_idx = np.full((len(conv), T), nan, dtype=np.int64)
        self.su_idx = np.full((len(conv), T), nan, dtype=np.int64)
        self.curt_idx = np.full((len(conv), T), nan, dtype=np.int64)
        self.feed = np.zeros((len(conv), T))  # res available feed-in
        self.avail_cap = np.zeros((len(conv), T))
        self.dis_idx = np.full((len(scenario.storages), T), nan, dtype=np.int64)
        self.chg_idx = np.full((len(scenario.storages), T), nan, dtype=np.int64)
        self.lvl_idx = np.full((len(scenario.storages), T), nan, dtype=np.int64)
        self.shed_idx = np.zeros((len(nodes), T), dtype=np.int64)
        self.flow_idx = np.full((len(scenario.interconnectors), T), nan,
                                dtype=np.int64)
        self.bal_row = np.zeros((len(nodes), T), dtype=np.int64)
        self.objective_offset = 0.0

        # available capacity per cluster-hour
        for ci, c in enumerate(conv):
            af = c.availability.values[h0:h0 + T] if c.availability is not None else 1.0
            out = c.outages.values[h0:h0 + T] if c.outages is not None else 0.0
            cap = np.maximum(c.installed_cap * af - out, 0.0)
            if c.is_dispatchable:
                self.avail_cap[ci] = cap
            else:
                self.feed[ci] = cap

        # variables
        for ci, c in enumerate(conv):
            if not c.is_dispatchable:
                for t in range(T):
                    self.curt_idx[ci, t] = prog.add_var(
                        f"curt[{c.id},{t}]", 0.0, self.feed[ci, t],
                        scenario.res_curtail_cost - c.cvar_full)
                self.objective_offset += c.cvar_full * float(self.feed[ci].sum())
            elif self.committed[ci]:
                pre = (c.cvar_min - c.cvar_full) * c.min_load
                for t in range(T):
                    self.gen_idx[ci, t] = prog.add_var(
                        f"gen[{c.id},{t}]", 0.0, lp.INF, c.cvar_full)
                    self.pon_idx[ci, t] = prog.add_var(
                        f"on[{c.id},{t}]", 0.0, self.avail_cap[ci, t], pre)
                    self.su_idx[ci, t] = prog.add_var(
                        f"start[{c.id},{t}]", 0.0, lp.INF, c.cramp)
            else:
                for t in range(T):
                    self.gen_idx[ci, t] = prog.add_var(
                        f"gen[{c.id},{t}]", 0.0, self.avail_cap[ci, t], c.cvar_full)

        for si, s in enumerate(scenario.storages):
            wv = s.water_value if s.kind == "long_term" else 0.0
            for t in range(T):
                self.dis_idx[si, t] = prog.add_var(f"dis[{s.id},{t}]", 0.0, lp.INF, wv)
                self.chg_idx[si, t] = prog.add_var(f"chg[{s.id},{t}]", 0.0, lp.INF, -wv)
                if s.kind == "mid_term":
                    self.lvl_idx[si, t] = prog.add_var(
                        f"lvl[{s.id},{t}]", 0.0, s.energy_capacity, 0.0)

        for ni, n in enumerate(nodes):
            for t in range(T):
                self.shed_idx[ni, t] = prog.add_var(
                    f"shed[{n},{t}]", 0.0, lp.INF, scenario.load_shed_cost)

        for li, (a, b, cap) in enumerate(scenario.interconnectors):
            for t in range(T):
                self.flow_idx[li, t] = prog.add_var(f"flow[{a}->{b},{t}]", 0.0, cap)

        # balance rows
        for ni, n in enumerate(nodes):
            demand = scenario.demand[n].values[h0:h0 + T]
            for t in range(T):
                coeffs = {}
                rhs = demand[t]
                for ci, c in enumerate(conv):
                    if c.node != n:
                        continue
                    if not c.is_dispatchable:
                        coeffs[self.curt_idx[ci, t]] = -1.0
                        rhs -= self.feed[ci, t]
                    else:
                        coeffs[self.gen_idx[ci, t]] = 1.0
                for si, s in enumerate(scenario.storages):
                    if s.node != n:
                        continue
                    coeffs[self.dis_idx[si, t]] = 1.0
                    coeffs[self.chg_idx[si, t]] = -1.0
                coeffs[self.shed_idx[ni, t]] = 1.0
                for li, (fa, fb, _) in enumerate(scenario.interconnectors):
                    if fb == n:
                        coeffs[self.flow_idx[li, t]] = gl_in
                    if fa == n:
                        coeffs[self.flow_idx[li, t]] = coeffs.get(
                            self.flow_idx[li, t], 0.0) - gl_out
                if perturbation is not None and n == scenario.mef_node:
                    hour, dmw = perturbation
                    if hour == h0 + t:
                        rhs += dmw
                self.bal_row[ni, t] = prog.add_row(coeffs, "=", rhs,
                                                   f"bal[{n},{t}]")

        # commitment rows
        for ci, c in enumerate(conv):
            if not self.committed[ci]:
                continue
            pos = c.reserve("pcr") + c.reserve("scr_pos")
            neg = c.reserve("pcr") + c.reserve("scr_neg")
            on0 = state.online.get(c.id, 0.0)
            for t in range(T):
                g, o, u = self.gen_idx[ci, t], self.pon_idx[ci, t], self.su_idx[ci, t]
                prog.add_row({g: 1.0, o: -1.0}, "<=", -pos, f"cap_up[{c.id},{t}]")
                if c.min_load > 0.0 or neg > 0.0:
                    prog.add_row({o: c.min_load, g: -1.0}, "<=", -neg,
                                 f"cap_lo[{c.id},{t}]")
                if t == 0:
                    prog.add_row({o: 1.0, u: -1.0}, "<=", on0,
                                 f"started[{c.id},{t}]")
                else:
                    prog.add_row({o: 1.0, u: -1.0, self.pon_idx[ci, t - 1]: -1.0},
                                 "<=", 0.0, f"started[{c.id},{t}]")

        # storage rows
        for si, s in enumerate(scenario.storages):
            if s.kind == "mid_term":
                lvl0 = state.storage_level.get(s.id, s.initial_level)
                eta = s.cycle_efficiency
                for t in range(T):
                    d, g, l = self.chg_idx[si, t], self.dis_idx[si, t], self.lvl_idx[si, t]
                    coeffs = {l: 1.0, g: 1.0, d: -eta}
                    rhs = 0.0
                    if t == 0:
                        rhs = lvl0
                    else:
                        coeffs[self.lvl_idx[si, t - 1]] = -1.0
                    prog.add_row(coeffs, "=", rhs, f"level[{s.id},{t}]")
                    prog.add_row({g: 1.0, d: scenario.pump_limit}, "<=",
                                 s.turbine_cap, f"pump[{s.id},{t}]")
            else:
                for t in range(T):
                    prog.add_row({self.dis_idx[si, t]: 1.0,
                                  self.chg_idx[si, t]: 1.0}, "<=",
                                 s.turbine_cap, f"stcap[{s.id},{t}]")

        self.lp = prog

    # -- readback ---------------------------------------------------------

    def generation(self, x: np.ndarray) -> np.ndarray:
        """(n_clusters, T) generation, including reconstructed res feed-in."""
        n_cl, T = self.gen_idx.shape
        gen = np.zeros((n_cl, T))
        for ci in range(n_cl):
            if self.curt_idx[ci, 0] >= 0:
                gen[ci] = self.feed[ci] - x[self.curt_idx[ci]]
            else:
                gen[ci] = x[self.gen_idx[ci]]
        return gen

    def emissions(self, x: np.ndarray, sl: slice | None = None) -> np.ndarray:
        gen = self.generation(x)
        if sl is not None:
            gen = gen[:, sl]
        return self.rates @ gen

    def end_state(self, x: np.ndarray) -> CarriedState:
        """State at the end of the kept day (carried into the next window)."""
        t_end = self.window.keep_offset + 23
        state = CarriedState()
        for si, s in enumerate(self.scenario.storages):
            if s.kind == "mid_term":
                state.storage_level[s.id] = float(x[self.lvl_idx[si, t_end]])
        for ci, c in enumerate(self.scenario.clusters):
            if not self.committed[ci]:
                continue
            state.online[c.id] = float(x[self.pon_idx[ci, t_end]])
        return state


@dataclass
class DispatchSolution:
    """Concatenated kept-day results of a rolling-horizon run."""

    scenario_name: str
    start: object
    hours: int
    nodes: list
    cluster_ids: list
    storage_ids: list
    links: list
    dispatchable: list
    gen: np.ndarray          # (n_clusters, H) MWh
    pon: np.ndarray          # (n_clusters, H) MW online
    su: np.ndarray           # (n_clusters, H) MW started
    curt: np.ndarray         # (n_clusters, H) MWh curtailed (res only)
    sdis: np.ndarray         # (n_storages, H)
    schg: np.ndarray         # (n_storages, H)
    slvl: np.ndarray         # (n_storages, H)
    shed: np.ndarray         # (n_nodes, H)
    flow: np.ndarray         # (n_links, H)
    emissions: np.ndarray    # (H,) t CO2
    shadow_price: np.ndarray  # (n_nodes, H) EUR/MWh
    window_objectives: np.ndarray
    mef_node: str
    bases: list = field(repr=False, default_factory=list)
    carried: list = field(repr=False, default_factory=list)

    def emissions_series(self) -> TimeSeries:
        return TimeSeries(self.start, self.emissions)

    def shadow_price_series(self, node: str | None = None) -> TimeSeries:
        node = node or self.mef_node
        return TimeSeries(self.start, self.shadow_price[self.nodes.index(node)])

    def conventional_generation(self) -> TimeSeries:
        rows = [i for i, d in enumerate(self.dispatchable) if d]
        return TimeSeries(self.start, self.gen[rows].sum(axis=0))


def emissions_series(solution: DispatchSolution) -> TimeSeries:
    return solution.emissions_series()


def build_window_lp(scenario: Scenario, window: DispatchWindow,
                    perturbation: tuple | None = None) -> lp.LinearProgram:
    """LP for one window; ``perturbation=(absolute hour, delta MW)`` raises the
    target node's demand rhs in that single hour of the kept day."""
    return WindowModel(scenario, window, perturbation).lp


def run_year(scenario: Scenario, perturbation: tuple | None = None,
             keep_bases: bool = True) -> DispatchSolution:
    """Solve all windows in sequence, keeping only middle-day results."""
    scenario.validate()
    H = scenario.hours
    n_cl = len(scenario.clusters)
    n_st = len(scenario.storages)
    n_no = len(scenario.nodes)
    n_ln = len(scenario.interconnectors)

    gen = np.zeros((n_cl, H))
    pon = np.zeros((n_cl, H))
    su = np.zeros((n_cl, H))
    curt = np.zeros((n_cl, H))
    sdis = np.zeros((n_st, H))
    schg = np.zeros((n_st, H))
    slvl = np.zeros((n_st, H))
    shed = np.zeros((n_no, H))
    flow = np.zeros((n_ln, H))
    shadow = np.zeros((n_no, H))
    objectives = []
    bases = []
    carried = []

    state = initial_state(scenario)
    warm_by_shape: dict = {}
    for window in windows_for(H):
        window = replace(window, carried_state=state.copy())
        model = WindowModel(scenario, window, _window_perturbation(window, perturbation))
        solver = lp.Solver(model.lp)
        sol = solver.solve(warm=warm_by_shape.get(window.n_hours))
        if sol.status != "optimal":
            raise DispatchError(
                f"window for day {window.day} ({window.start_hour}h+"
                f"{window.n_hours}h) came back {sol.status}")
        warm_by_shape[window.n_hours] = sol.basis

        ks = window.keep_slice
        dest = slice(window.day * 24, window.day * 24 + 24)
        xfull = sol.x
        g = model.generation(xfull)
        gen[:, dest] = g[:, ks]
        for ci in range(n_cl):
            if model.curt_idx[ci, 0] >= 0:
                curt[ci, dest] = xfull[model.curt_idx[ci, ks]]
                pon[ci, dest] = model.feed[ci, ks]
            elif model.committed[ci]:
                pon[ci, dest] = xfull[model.pon_idx[ci, ks]]
                su[ci, dest] = xfull[model.su_idx[ci, ks]]
        for si in range(n_st):
            sdis[si, dest] = xfull[model.dis_idx[si, ks]]
            schg[si, dest] = xfull[model.chg_idx[si, ks]]
            if model.lvl_idx[si, 0] >= 0:
                slvl[si, dest] = xfull[model.lvl_idx[si, ks]]
        for ni in range(n_no):
            shed[ni, dest] = xfull[model.shed_idx[ni, ks]]
            shadow[ni, dest] = sol.duals[model.bal_row[ni, ks]]
        for li in range(n_ln):
            flow[li, dest] = xfull[model.flow_idx[li, ks]]

        objectives.append(sol.objective_value + model.objective_offset)
        if keep_bases:
            bases.append(sol.basis)
            carried.append(window.carried_state.copy())
        state = model.end_state(xfull)

    # collapsed clusters: minimal-commitment reconstruction (online capacity
    # tracks generation; start-ups are the positive generation increments)
    for ci, c in enumerate(scenario.clusters):
        if c.is_dispatchable and not _is_committed(c):
            pon[ci] = gen[ci]
            su[ci, 0] = max(gen[ci, 0], 0.0)
            su[ci, 1:] = np.maximum(np.diff(gen[ci]), 0.0)

    rates = np.array([c.emission_rate for c in scenario.clusters])
    emissions = rates @ gen if n_cl else np.zeros(H)
    return DispatchSolution(
        scenario_name=scenario.name,
        start=scenario.start,
        hours=H,
        nodes=list(scenario.nodes),
        cluster_ids=[c.id for c in scenario.clusters],
        storage_ids=[s.id for s in scenario.storages],
        links=list(scenario.interconnectors),
        dispatchable=[c.is_dispatchable for c in scenario.clusters],
        gen=gen, pon=pon, su=su, curt=curt,
        sdis=sdis, schg=schg, slvl=slvl,
        shed=shed, flow=flow,
        emissions=emissions,
        shadow_price=shadow,
        window_objectives=np.array(objectives),
        mef_node=scenario.mef_node,
        bases=bases,
        carried=carried,
    )


def _window_perturbation(window: DispatchWindow, perturbation):
    if perturbation is None:
        return None
    hour, dmw = perturbation
    lo = window.day * 24
    if lo <= hour < lo + 24:
        return (hour, dmw)
    return None
