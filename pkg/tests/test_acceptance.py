"""Acceptance gate: one check per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per criterion is
printed in the terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import contextlib
import io
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import four_vertex_graph, random_symmetric_graph  # noqa: E402
from edgeloc.analysis import is_degenerate_initial, nullity, predict_convergence, similarity_check  # noqa: E402
from edgeloc.cli import main as cli_main  # noqa: E402
from edgeloc.estimator import (  # noqa: E402
    EstimatorConfig,
    EstimatorState,
    anchored_config,
    build_h_matrix,
    decay_rate,
    error_metrics,
    integrate,
    orientation_estimates,
    simulate,
    spread_history,
)
from edgeloc.graphs import (  # noqa: E402
    BRUTE_FORCE_MAX_EDGES,
    brute_force_in_trees,
    count_in_trees,
    has_spanning_tree,
    knuth_count,
    line_graph,
    spanning_tree_roots,
    strongly_connected_components,
)
from edgeloc.locgraph import localize  # noqa: E402
from edgeloc.scenarios import example1, example3, random_scenario  # noqa: E402

SEEDS = range(20)
RESULTS: dict[int, tuple[str, bool, str]] = {}


def _pairs(*names):
    return {x for a, b in names for x in ((a, b), (b, a))}


def _scenario_params(i):
    return 3 + i % 6, i, i % 4


def check_1():
    start = time.perf_counter()
    loc = localize(example1())
    undesired = {(tuple(k), tuple(j)) for k, j in loc.undesired}
    elg = loc.elg.graph
    elapsed = time.perf_counter() - start
    ok = (
        undesired == {(("1", "2"), ("2", "3")), (("1", "2"), ("2", "5")), (("3", "2"), ("2", "1")), (("5", "2"), ("2", "1"))}
        and set(elg.vertices) == {"1", "2", "2~1", "3~2", "4~1", "5~2"}
        and set(elg.edges) == _pairs(("1", "2~1"), ("1", "4~1"), ("2", "3~2"), ("2", "5~2"))
        and not has_spanning_tree(elg)
        and predict_convergence(loc).verdict == "no-global-consensus"
        and elapsed < 1.0
    )
    return ok, f"{len(undesired)} undesired, |V|={len(elg.vertices)}, |E|={len(elg.edges)}, tree={has_spanning_tree(elg)}, {elapsed:.3f}s"


def check_2():
    start = time.perf_counter()
    loc = localize(example3())
    elg = loc.elg.graph
    roots = spanning_tree_roots(elg)
    elapsed = time.perf_counter() - start
    ok = set(elg.vertices) == {"1", "2", "4", "2~1", "3~2"} and len(loc.lig) == 8 and "1" in roots and elapsed < 1.0
    return ok, f"vertices {sorted(elg.vertices)}, {len(loc.lig)} edge agents, root 1 present={'1' in roots}, {elapsed:.3f}s"


def check_3():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    graphs = [four_vertex_graph()] + [random_symmetric_graph(rng, 6) for _ in range(200)]
    edges_checked = brute_checked = 0
    for g in graphs:
        lg = line_graph(g)
        for e in g.edges:
            count = count_in_trees(lg, e)
            if knuth_count(g, e) != count:
                return False, f"Knuth mismatch on {g!r} at {e}"
            edges_checked += 1
            if len(lg.edges) <= BRUTE_FORCE_MAX_EDGES:
                if brute_force_in_trees(lg, e) != count:
                    return False, f"brute-force mismatch on line graph of {g!r} at {e}"
                brute_checked += 1
        if len(g.edges) <= BRUTE_FORCE_MAX_EDGES:
            for v in g.vertices:
                if brute_force_in_trees(g, v) != count_in_trees(g, v):
                    return False, f"brute-force mismatch on {g!r} at {v}"
                brute_checked += 1
    elapsed = time.perf_counter() - start
    return elapsed < 30.0, f"{len(graphs)} graphs, {edges_checked} edges, {brute_checked} brute-force roots, {elapsed:.2f}s"


def check_4():
    start = time.perf_counter()
    with_tree = 0
    for i in range(200):
        loc = localize(random_scenario(*_scenario_params(i)))
        verdicts = {has_spanning_tree(loc.elg.graph), has_spanning_tree(line_graph(loc.elg.graph)), has_spanning_tree(loc.lig.graph)}
        if len(verdicts) != 1:
            return False, f"disagreement on scenario {i}"
        with_tree += verdicts.pop()
    elapsed = time.perf_counter() - start
    return elapsed < 10.0, f"200 scenarios agree ({with_tree} with a spanning tree), {elapsed:.2f}s"


def _max_error(z, theta):
    return float(np.abs(error_metrics(orientation_estimates(z), theta).per_agent_error).max())


def check_5():
    loc = localize(example3())
    theta = loc.true_orientations()
    spreads, slopes, slowest = [], [], 0.0
    for seed in SEEDS:
        start = time.perf_counter()
        traj = simulate(loc.lig, EstimatorConfig(dt=0.01, t_final=30.0, seed=seed), theta)
        history = spread_history(traj, theta)
        spreads.append(history[-1])
        slopes.append(decay_rate(traj.times, history))
        slowest = max(slowest, time.perf_counter() - start)
    spreads, slopes = np.array(spreads), np.array(slopes)
    passing = int(((spreads < 1e-6) & (slopes < -0.05)).sum())
    ok = passing == len(SEEDS) and slowest < 5.0
    return ok, (
        f"{passing}/20 seeds meet spread<1e-6 at t=30 (spread {spreads.min():.2e}..{spreads.max():.2e}); "
        f"slopes {slopes.min():.3f}..{slopes.max():.3f}; {slowest:.2f}s/seed max"
    )


def check_6():
    loc = localize(example3())
    theta = loc.true_orientations()
    errors, slowest = [], 0.0
    for seed in SEEDS:
        start = time.perf_counter()
        cfg = anchored_config(EstimatorConfig(t_final=30.0, seed=seed), loc.lig, "1", "2", loc.scenario.true_bearing("1", "2"))
        errors.append(_max_error(simulate(loc.lig, cfg, theta).final.estimates, theta))
        slowest = max(slowest, time.perf_counter() - start)
    errors = np.array(errors)
    passing = int((errors < 1e-6).sum())
    ok = passing == len(SEEDS) and slowest < 5.0
    return ok, f"{passing}/20 seeds meet max error<1e-6 at t=30 (max error {errors.min():.2e}..{errors.max():.2e}); {slowest:.2f}s/seed max"


def check_7():
    loc = localize(example1())
    theta = loc.true_orientations()
    components = [sorted(int(k) - 1 for k in c) for c in strongly_connected_components(loc.lig.graph)]
    good, slowest, worst_internal = 0, 0.0, 0.0
    for seed in SEEDS:
        start = time.perf_counter()
        z = simulate(loc.lig, EstimatorConfig(t_final=30.0, seed=seed), theta).final.estimates
        th = orientation_estimates(z)
        internal = max(error_metrics(th[c], theta[c]).spread for c in components)
        worst_internal = max(worst_internal, internal)
        good += internal < 1e-6 and error_metrics(th, theta).spread > 1e-3
        slowest = max(slowest, time.perf_counter() - start)
    ok = good >= 18 and slowest < 5.0
    return ok, f"{good}/20 seeds with {len(components)} internally agreed components (max internal spread {worst_internal:.1e}) and global spread>1e-3; {slowest:.2f}s/seed max"


def check_8():
    scenarios = [example3()] + [random_scenario(*_scenario_params(i)) for i in range(200)]
    checked, worst_hz, worst_sim = 0, 0.0, 0.0
    for sc in scenarios:
        loc = localize(sc)
        if not loc.has_spanning_tree:
            continue
        h = build_h_matrix(loc.lig)
        z = np.exp(1j * loc.true_orientations())
        hz = float(np.linalg.norm(h @ z))
        sim = similarity_check(h, z).max_deviation
        if hz >= 1e-10 or nullity(h) != 1 or sim >= 1e-10:
            return False, f"failure: |Hz|={hz:.1e}, nullity={nullity(h)}, deviation={sim:.1e}"
        worst_hz, worst_sim = max(worst_hz, hz), max(worst_sim, sim)
        checked += 1
    return checked > 1, f"{checked} spanning-tree scenarios; max |Hz|={worst_hz:.1e}, max deviation={worst_sim:.1e}"


def check_9():
    loc = localize(example3())
    h = build_h_matrix(loc.lig)
    rng = np.random.default_rng(99)
    norms = []
    for _ in range(5):
        z0 = h @ (rng.normal(size=len(loc.lig)) + 1j * rng.normal(size=len(loc.lig)))
        if not is_degenerate_initial(z0, h):
            return False, "column-space start not flagged"
        norms.append(float(np.linalg.norm(integrate(h, EstimatorState(z0), EstimatorConfig()).final.estimates)))
    flagged = sum(
        is_degenerate_initial(np.exp(1j * rng.uniform(-np.pi, np.pi, size=len(loc.lig))), h) for _ in range(100)
    )
    ok = max(norms) < 1e-4 and flagged == 0
    return ok, f"column-space starts flagged, final norm <= {max(norms):.1e}; {flagged}/100 random starts flagged"


CLI_RUNS = [
    ["generate", "--n-agents", "7", "--seed", "11"],
    ["graphs", "--preset", "example1"],
    ["graphs", "--preset", "example3"],
    ["simulate", "--preset", "example3", "--seed", "5"],
    ["simulate", "--preset", "example3", "--anchor", "1,2", "--seed", "5"],
    ["simulate", "--preset", "example1", "--seed", "5"],
    ["verify", "--preset", "example3", "--seed", "5"],
]


def check_10():
    compared = 0
    with tempfile.TemporaryDirectory() as tmp:
        for i, argv in enumerate(CLI_RUNS):
            outs = [Path(tmp) / f"{i}-{rep}" for rep in "ab"]
            for out in outs:
                with contextlib.redirect_stdout(io.StringIO()):
                    code = cli_main([*argv, "--out", str(out)])
                if code != 0:
                    return False, f"{' '.join(argv)} failed"
            for path in sorted(outs[0].iterdir()):
                if path.read_bytes() != (outs[1] / path.name).read_bytes():
                    return False, f"{' '.join(argv)}: {path.name} differs"
                compared += 1
    return True, f"{len(CLI_RUNS)} commands, {compared} output files byte-identical"


CRITERIA = {
    1: ("graph pipeline, five-agent example", check_1),
    2: ("graph pipeline, four-agent example", check_2),
    3: ("Knuth's formula and in-tree counts", check_3),
    4: ("spanning-tree agreement across graphs", check_4),
    5: ("biased consensus without anchor", check_5),
    6: ("exact recovery with anchor", check_6),
    7: ("no global consensus without spanning tree", check_7),
    8: ("equilibrium, nullity and similarity", check_8),
    9: ("degenerate initial estimates", check_9),
    10: ("deterministic CLI output", check_10),
}


def _run(n: int) -> tuple[bool, str]:
    title, fn = CRITERIA[n]
    ok, detail = fn()
    RESULTS[n] = (title, ok, detail)
    return ok, detail


def summary_line(n: int) -> str:
    title, ok, detail = RESULTS[n]
    return f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"


def summary_lines() -> list[str]:
    return [summary_line(n) for n in sorted(RESULTS)]


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail = _run(n)
    print(summary_line(n))
    assert ok, detail


if __name__ == "__main__":
    for n in CRITERIA:
        _run(n)
        print(summary_line(n), flush=True)
    sys.exit(0 if all(ok for _, ok, _ in RESULTS.values()) else 1)
