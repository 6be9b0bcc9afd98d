import numpy as np
import pytest

from mefkit import lp
from oracles import enumerate_vertices, random_box_lp


def build(c, a, senses, rhs, lower, upper):
    prog = lp.LinearProgram()
    for j in range(len(c)):
        prog.add_var(lower=lower[j], upper=upper[j], cost=c[j])
    for i in range(len(senses)):
        coeffs = {j: a[i][j] for j in range(len(c)) if a[i][j] != 0.0}
        prog.add_row(coeffs, senses[i], rhs[i])
    return prog


def test_single_var_geq():
    prog = lp.LinearProgram()
    x = prog.add_var(cost=1.0)
    prog.add_row({x: 1.0}, ">=", 3.0)
    sol = lp.solve(prog)
    assert sol.status == "optimal"
    assert sol.x[x] == pytest.approx(3.0, abs=1e-9)
    assert sol.duals[0] == pytest.approx(1.0, abs=1e-9)
    assert sol.objective_value == pytest.approx(3.0, abs=1e-9)


def test_degenerate_symmetric_vertex_is_deterministic():
    def run():
        prog = lp.LinearProgram()
        x = prog.add_var(cost=-1.0)
        y = prog.add_var(cost=-1.0)
        prog.add_row({x: 1.0, y: 1.0}, "<=", 1.0)
        return lp.solve(prog)

    a, b = run(), run()
    assert a.objective_value == pytest.approx(-1.0, abs=1e-9)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.duals, b.duals)
    # lowest-index tie-breaking puts the whole unit on the first variable
    assert a.x[0] == pytest.approx(1.0, abs=1e-9)
    assert a.x[1] == pytest.approx(0.0, abs=1e-9)


def test_infeasible_detected():
    prog = lp.LinearProgram()
    x = prog.add_var(cost=1.0)  # x >= 0
    prog.add_row({x: 1.0}, "<=", -1.0)
    assert lp.solve(prog).status == "infeasible"


def test_unbounded_detected():
    prog = lp.LinearProgram()
    x = prog.add_var(cost=-1.0)
    prog.add_row({x: 1.0}, ">=", 0.0)
    assert lp.solve(prog).status == "unbounded"


def test_equality_row_and_upper_bounds():
    prog = lp.LinearProgram()
    x = prog.add_var(cost=2.0, upper=4.0)
    y = prog.add_var(cost=3.0, upper=4.0)
    prog.add_row({x: 1.0, y: 1.0}, "=", 5.0)
    sol = lp.solve(prog)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(4.0, abs=1e-9)
    assert sol.x[1] == pytest.approx(1.0, abs=1e-9)
    assert sol.objective_value == pytest.approx(11.0, abs=1e-9)


def test_beale_degenerate_cycle_terminates():
    # classic cycling-prone instance; Bland fallback must terminate it
    c = [-0.75, 150.0, -0.02, 6.0]
    a = [[0.25, -60.0, -0.04, 9.0],
         [0.5, -90.0, -0.02, 3.0],
         [0.0, 0.0, 1.0, 0.0]]
    senses = ["<=", "<=", "<="]
    rhs = [0.0, 0.0, 1.0]
    lower = [0.0] * 4
    upper = [50.0] * 4
    prog = build(c, a, senses, rhs, lower, upper)
    sol = lp.solve(prog)
    assert sol.status == "optimal"
    ref, _ = enumerate_vertices(c, a, senses, rhs, lower, upper)
    assert sol.objective_value == pytest.approx(ref, abs=1e-8)


def test_random_suite_matches_vertex_enumeration_oracle():
    rng = np.random.default_rng(20240117)
    n_optimal = 0
    for _ in range(50):
        c, a, senses, rhs, lower, upper = random_box_lp(rng)
        prog = build(c, a, senses, rhs, lower, upper)
        sol = lp.solve(prog)
        assert sol.status == "optimal"  # feasible and bounded by construction
        ref_obj, _ = enumerate_vertices(c, a, senses, rhs, lower, upper)
        assert sol.objective_value == pytest.approx(
            ref_obj, abs=1e-8 * (1.0 + abs(ref_obj)))
        n_optimal += 1

        # strong duality and dual signs
        gap = abs(lp.dual_objective(prog, sol) - sol.objective_value)
        assert gap <= 1e-7 * (1.0 + abs(sol.objective_value))
        ax = a @ sol.x
        for i, s in enumerate(senses):
            if s == "<=":
                assert sol.duals[i] <= 1e-9
            elif s == ">=":
                assert sol.duals[i] >= -1e-9
            slack = rhs[i] - ax[i]
            assert abs(sol.duals[i] * slack) <= 1e-7 * (1.0 + abs(rhs[i]))

        # primal feasibility residual per row
        for i, s in enumerate(senses):
            tol = 1e-8 * (1.0 + abs(rhs[i]))
            if s == "<=":
                assert ax[i] <= rhs[i] + tol
            elif s == ">=":
                assert ax[i] >= rhs[i] - tol
            else:
                assert abs(ax[i] - rhs[i]) <= tol
    assert n_optimal == 50


def test_determinism_bit_identical():
    rng = np.random.default_rng(7)
    c, a, senses, rhs, lower, upper = random_box_lp(rng)
    s1 = lp.solve(build(c, a, senses, rhs, lower, upper))
    s2 = lp.solve(build(c, a, senses, rhs, lower, upper))
    assert s1.objective_value == s2.objective_value
    assert np.array_equal(s1.x, s2.x)
    assert np.array_equal(s1.duals, s2.duals)


def test_warm_resolve_matches_cold():
    rng = np.random.default_rng(99)
    for _ in range(10):
        c, a, senses, rhs, lower, upper = random_box_lp(rng)
        prog = build(c, a, senses, rhs, lower, upper)
        solver = lp.Solver(prog)
        base = solver.solve()
        assert base.status == "optimal"

        bump_row = int(rng.integers(0, len(senses)))
        delta = float(rng.uniform(-0.05, 0.05))
        solver.bump_rhs(bump_row, delta)
        warm = solver.resolve()

        prog2 = build(c, a, senses,
                      [r + (delta if i == bump_row else 0.0)
                       for i, r in enumerate(rhs)], lower, upper)
        cold = lp.solve(prog2)
        assert warm.status == cold.status
        if cold.status == "optimal":
            assert warm.objective_value == pytest.approx(
                cold.objective_value, abs=1e-8 * (1.0 + abs(cold.objective_value)))


def test_try_rhs_bump_fast_path_agrees_with_resolve():
    prog = lp.LinearProgram()
    x = prog.add_var(cost=5.0, upper=100.0)
    y = prog.add_var(cost=20.0, upper=100.0)
    prog.add_row({x: 1.0, y: 1.0}, "=", 50.0)
    solver = lp.Solver(prog)
    sol = solver.solve()
    assert sol.status == "optimal"
    snap = solver.freeze()
    bumped = solver.try_rhs_bump(0, 1.0)
    assert bumped is not None
    assert bumped[x] == pytest.approx(51.0, abs=1e-9)

    solver.restore(snap)
    solver.bump_rhs(0, 1.0)
    ref = solver.resolve()
    assert ref.x[x] == pytest.approx(51.0, abs=1e-9)
    assert ref.x[y] == pytest.approx(0.0, abs=1e-9)


def test_dump_format():
    prog = lp.LinearProgram()
    x = prog.add_var(name="gen", cost=1.5, upper=10.0)
    prog.add_row({x: 2.0}, "<=", 5.0, name="cap")
    text = prog.dump()
    assert "minimize" in text
    assert "obj: 1.5 gen" in text
    assert "cap: 2.0 gen <= 5.0" in text
    assert "0.0 <= gen <= 10.0" in text
    assert text.endswith("end\n")


def test_fixed_variable_never_enters():
    prog = lp.LinearProgram()
    x = prog.add_var(cost=-1.0, lower=2.0, upper=2.0)
    y = prog.add_var(cost=1.0, upper=5.0)
    prog.add_row({x: 1.0, y: 1.0}, ">=", 4.0)
    sol = lp.solve(prog)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(2.0, abs=1e-12)
    assert sol.x[1] == pytest.approx(2.0, abs=1e-9)
