import json
import math
from fractions import Fraction

import pytest

from fuzzdist import fuzzsim
from fuzzdist.errors import InputError, ValidationError
from fuzzdist.fuzzsim import (ExperimentResult, SimOutcome, SimSeed,
                              load_experiment_config, make_sim_program,
                              resolve_entry_function, run_campaign,
                              run_experiment, write_runs_csv)
from fuzzdist.graphs import (BasicBlock, CallGraph, Cfg, ProgramGraphs,
                             TargetSpec)
from fuzzdist.physical import ATTENTION, PHYSICAL, DistanceMap
from fuzzdist.rng import SplitMix64


def build_program(cfg_specs, cg_edges, target_blocks, entry=None):
    """cfg_specs: {function: (entry, {bid: (succs, callees)})}."""
    cfgs = {}
    for function, (entry_block, blocks) in cfg_specs.items():
        edges = set()
        built = {}
        for bid, (succs, callees) in blocks.items():
            built[bid] = BasicBlock(bid, (), frozenset(callees))
            edges.update((bid, s) for s in succs)
        cfgs[function] = Cfg(function, entry_block, built, frozenset(edges))
    graphs = ProgramGraphs(
        callgraph=CallGraph(nodes=frozenset(cfg_specs), edges=frozenset(cg_edges)),
        cfgs=cfgs)
    spec = TargetSpec(locations=frozenset(), target_functions=frozenset(),
                      target_blocks=frozenset(target_blocks))
    return make_sim_program(graphs, spec, entry_function=entry)


def dist_for(prog, values, metric=PHYSICAL):
    refs = {}
    keys = {}
    for function, cfg in prog.graphs.cfgs.items():
        for bid in cfg.blocks:
            if (function, bid) in values:
                refs[(function, bid)] = Fraction(values[(function, bid)])
                keys[(function, bid)] = f"{function}:{bid}"
    return DistanceMap(metric=metric, values=refs, block_keys=keys)


def linear_program():
    return build_program(
        {"main": ("b0", {"b0": (["b1"], []), "b1": (["b2"], []), "b2": ([], [])})},
        [], {("main", "b2")})


def forked_program():
    # b0 branches: b1 leads to the target, b2 dead-ends
    return build_program(
        {"main": ("b0", {"b0": (["b1", "b2"], []), "b1": (["b3"], []),
                         "b2": ([], []), "b3": ([], [])})},
        [], {("main", "b3")})


# ---------------------------------------------------------------------------
# generator


def test_generator_reference_outputs():
    first = SplitMix64(0)
    assert [first.next_u64() for _ in range(3)] == [
        16294208416658607535, 7960286522194355700, 487617019471545679]
    other = SplitMix64(1234567)
    assert [other.next_u64() for _ in range(3)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_generator_unit_interval_and_ranges():
    rng = SplitMix64(99)
    for _ in range(200):
        assert 0.0 <= rng.random() < 1.0
    for _ in range(200):
        assert 0 <= rng.randrange(7) < 7
    with pytest.raises(ValueError):
        rng.randrange(0)


def test_generator_split_is_deterministic():
    a = SplitMix64(5).split()
    b = SplitMix64(5).split()
    assert a.next_u64() == b.next_u64()
    # the child stream is not the parent stream
    parent = SplitMix64(5)
    child = parent.split()
    assert parent.next_u64() != child.next_u64()


# ---------------------------------------------------------------------------
# entry resolution and program assembly


def test_entry_is_the_unique_root():
    prog = linear_program()
    assert prog.entry_function == "main"


def test_entry_prefers_explicit_name():
    prog = build_program(
        {"a": ("b0", {"b0": ([], [])}), "b": ("b0", {"b0": ([], [])})},
        [("a", "b")], set(), entry="b")
    assert prog.entry_function == "b"


def test_explicit_entry_needs_a_cfg():
    graphs = ProgramGraphs(
        callgraph=CallGraph(nodes=frozenset({"a", "ghost"}), edges=frozenset()),
        cfgs={"a": Cfg("a", "b0", {"b0": BasicBlock("b0", (), frozenset())},
                       frozenset())})
    with pytest.raises(ValidationError):
        resolve_entry_function(graphs, "ghost")


def test_self_call_does_not_disqualify_a_root():
    prog = build_program(
        {"solo": ("b0", {"b0": ([], ["solo"])})},
        [("solo", "solo")], set())
    assert prog.entry_function == "solo"


def test_fallback_to_main_with_several_roots():
    prog = build_program(
        {"main": ("b0", {"b0": ([], [])}), "other": ("b0", {"b0": ([], [])})},
        [], set())
    assert prog.entry_function == "main"


def test_no_root_and_no_main_is_an_error():
    graphs = ProgramGraphs(
        callgraph=CallGraph(nodes=frozenset({"a", "b"}),
                            edges=frozenset({("a", "b"), ("b", "a")})),
        cfgs={"a": Cfg("a", "b0", {"b0": BasicBlock("b0", (), frozenset())},
                       frozenset()),
              "b": Cfg("b", "b0", {"b0": BasicBlock("b0", (), frozenset())},
                       frozenset())})
    with pytest.raises(ValidationError):
        resolve_entry_function(graphs)


def test_bias_validation():
    graphs = linear_program().graphs
    spec = linear_program().targets
    with pytest.raises(ValidationError):
        make_sim_program(graphs, spec, branch_bias={("main", "nope"): 0.5})
    with pytest.raises(ValidationError):
        make_sim_program(graphs, spec, branch_bias={("main", "b1"): 0.0})
    with pytest.raises(ValidationError):
        make_sim_program(graphs, spec, branch_bias={("main", "b1"): 1.5})
    prog = make_sim_program(graphs, spec, branch_bias={("main", "b1"): 1.0})
    assert prog.branch_bias == {("main", "b1"): 1.0}


# ---------------------------------------------------------------------------
# campaigns


def test_target_at_entry_ends_in_one_iteration():
    prog = build_program({"main": ("b0", {"b0": ([], [])})}, [], {("main", "b0")})
    dist = dist_for(prog, {("main", "b0"): 0})
    out = run_campaign(prog, dist, budget=50, rng_seed=3)
    assert out.hit
    assert out.iterations_to_target == 1
    assert out.trace == ((1, 0, 1.0),)


def test_straight_line_path_hits_immediately():
    prog = linear_program()
    dist = dist_for(prog, {("main", "b0"): 2, ("main", "b1"): 1, ("main", "b2"): 0})
    out = run_campaign(prog, dist, budget=10, rng_seed=1)
    assert out.iterations_to_target == 1


def test_identical_arguments_reproduce_the_outcome():
    prog = forked_program()
    dist = dist_for(prog, {("main", "b0"): 2, ("main", "b1"): 1,
                           ("main", "b2"): 3, ("main", "b3"): 0})
    first = run_campaign(prog, dist, budget=40, rng_seed=11)
    second = run_campaign(prog, dist, budget=40, rng_seed=11)
    assert first == second


def test_different_seeds_diverge():
    prog = forked_program()
    # distances steer nothing here (all equal) so discovery is pure chance
    dist = dist_for(prog, {ref: 5 for ref in
                           (("main", "b0"), ("main", "b1"),
                            ("main", "b2"), ("main", "b3"))})
    outcomes = {run_campaign(prog, dist, budget=100, rng_seed=s).iterations_to_target
                for s in range(1, 30)}
    assert len(outcomes) > 1


def test_unreachable_target_times_out():
    prog = build_program(
        {"main": ("b0", {"b0": (["b1"], []), "b1": ([], []), "b2": ([], [])})},
        [], {("main", "b2")})
    dist = dist_for(prog, {("main", "b0"): 1, ("main", "b1"): 1, ("main", "b2"): 0})
    out = run_campaign(prog, dist, budget=25, rng_seed=9)
    assert not out.hit
    assert out.iterations_to_target is None
    assert len(out.trace) == 25


def test_walks_cannot_loop_forever():
    prog = build_program(
        {"main": ("b0", {"b0": (["b0"], []), "b1": ([], [])})},
        [], {("main", "b1")})
    dist = dist_for(prog, {("main", "b0"): 1, ("main", "b1"): 0})
    out = run_campaign(prog, dist, budget=2, rng_seed=4)
    assert not out.hit
    assert len(out.trace) == 2


def test_walk_descends_into_called_function():
    prog = build_program(
        {"main": ("b0", {"b0": ([], ["helper"])}),
         "helper": ("h0", {"h0": ([], [])})},
        [("main", "helper")], {("helper", "h0")})
    dist = dist_for(prog, {("main", "b0"): 10, ("helper", "h0"): 0})
    out = run_campaign(prog, dist, budget=5, rng_seed=1)
    assert out.iterations_to_target == 1


def test_campaign_requires_entry_distance():
    prog = linear_program()
    dist = dist_for(prog, {("main", "b1"): 1, ("main", "b2"): 0})
    with pytest.raises(ValidationError) as err:
        run_campaign(prog, dist, budget=5, rng_seed=0)
    assert "main:b0" in str(err.value)


def test_budget_must_be_positive():
    prog = linear_program()
    dist = dist_for(prog, {("main", "b0"): 0})
    with pytest.raises(ValidationError):
        run_campaign(prog, dist, budget=0, rng_seed=0)


def test_single_path_program_always_reuses_the_first_seed():
    prog = build_program(
        {"main": ("b0", {"b0": (["b1"], []), "b1": ([], []), "b2": ([], [])})},
        [], {("main", "b2")})
    dist = dist_for(prog, {("main", "b0"): 1, ("main", "b1"): 1, ("main", "b2"): 0})
    out = run_campaign(prog, dist, budget=30, rng_seed=2)
    assert [parent for _, parent, _ in out.trace] == [0] * 30


def test_constant_distances_give_uniform_energy():
    prog = forked_program()
    dist = dist_for(prog, {ref: 5 for ref in
                           (("main", "b0"), ("main", "b1"),
                            ("main", "b2"), ("main", "b3"))})
    out = run_campaign(prog, dist, budget=60, rng_seed=8)
    tau = 60 / 5
    for iteration, _, energy in out.trace[1:]:
        cooling = 1.0 - math.exp(-iteration / tau)
        assert energy == pytest.approx(2.0 ** (10 * 0.5 * cooling))


def test_energy_rises_as_the_campaign_cools():
    # with a constant map the recorded energy is monotone in the iteration
    prog = forked_program()
    dist = dist_for(prog, {ref: 5 for ref in
                           (("main", "b0"), ("main", "b1"),
                            ("main", "b2"), ("main", "b3"))})
    out = run_campaign(prog, dist, budget=80, rng_seed=8)
    energies = [e for _, _, e in out.trace[1:]]
    assert energies == sorted(energies)


def test_campaign_invariant_under_affine_distance_change():
    # energies see only min-max normalized distances, so scaling and
    # shifting every value leaves the whole campaign untouched
    prog = forked_program()
    base = {("main", "b0"): 2, ("main", "b1"): 1,
            ("main", "b2"): 3, ("main", "b3"): 0}
    plain = dist_for(prog, base)
    moved = dist_for(prog, {ref: 7 * v + 3 for ref, v in base.items()})
    for seed in range(1, 8):
        a = run_campaign(prog, plain, budget=50, rng_seed=seed)
        b = run_campaign(prog, moved, budget=50, rng_seed=seed)
        assert a.trace == b.trace
        assert a.iterations_to_target == b.iterations_to_target


def test_seeds_with_no_known_distance_get_top_energy_weight():
    queue = [
        SimSeed(0, [], [], seed_distance=Fraction(0)),
        SimSeed(1, [], [], seed_distance=Fraction(10)),
        SimSeed(2, [], [], seed_distance=None),
    ]
    energies = fuzzsim._queue_energies(queue, iteration=1000, tau=10.0)
    # near-fully cooled: best seed ~2**10, worst and unknown ~2**0
    assert energies[0] == pytest.approx(2.0 ** 10, rel=1e-6)
    assert energies[1] == pytest.approx(1.0, rel=1e-6)
    assert energies[2] == pytest.approx(1.0, rel=1e-6)


def test_gated_branch_defers_discovery():
    prog_open = build_program(
        {"main": ("b0", {"b0": (["b1", "b2"], []), "b1": ([], []),
                         "b2": ([], [])})},
        [], {("main", "b1")})
    prog_gated = make_sim_program(prog_open.graphs, prog_open.targets,
                                  branch_bias={("main", "b1"): 0.05})
    dist = dist_for(prog_open, {("main", "b0"): 1, ("main", "b1"): 0,
                                ("main", "b2"): 2})
    open_hits = []
    gated_hits = []
    for seed in range(1, 25):
        open_hits.append(run_campaign(prog_open, dist, 500, seed).iterations_to_target)
        gated_hits.append(run_campaign(prog_gated, dist, 500, seed).iterations_to_target)
    assert None not in open_hits
    # the gate can only delay the very same runs
    for o, g in zip(open_hits, gated_hits):
        assert g is None or g >= o
    assert sum(g if g else 500 for g in gated_hits) > sum(open_hits)


# ---------------------------------------------------------------------------
# experiments


def test_paired_runs_share_seeds():
    prog = forked_program()
    dist = dist_for(prog, {("main", "b0"): 2, ("main", "b1"): 1,
                           ("main", "b2"): 3, ("main", "b3"): 0})
    att = dist_for(prog, {("main", "b0"): 2, ("main", "b1"): 1,
                          ("main", "b2"): 3, ("main", "b3"): 0}, metric=ATTENTION)
    result = run_experiment(prog, dist, att, runs=3, budget=20, rng_base=40)
    assert [p.rng_seed for p, _ in result.outcomes] == [41, 42, 43]
    assert [a.rng_seed for _, a in result.outcomes] == [41, 42, 43]
    assert all(p.metric == "physical" and a.metric == "attention"
               for p, a in result.outcomes)


def test_swapping_the_arms_swaps_the_outcomes():
    prog = forked_program()
    values = {("main", "b0"): 2, ("main", "b1"): 1,
              ("main", "b2"): 3, ("main", "b3"): 0}
    phys = dist_for(prog, values)
    att = dist_for(prog, {ref: v * 2 for ref, v in values.items()}, metric=ATTENTION)
    ab = run_experiment(prog, phys, att, runs=4, budget=30, rng_base=7)
    ba = run_experiment(prog, att, phys, runs=4, budget=30, rng_base=7)
    assert [(p, a) for p, a in ab.outcomes] == [(a, p) for p, a in ba.outcomes]


def test_runs_must_be_positive():
    prog = linear_program()
    dist = dist_for(prog, {("main", "b0"): 0})
    with pytest.raises(ValidationError):
        run_experiment(prog, dist, dist, runs=0, budget=5)


def make_outcome(metric, seed, budget, iters):
    return SimOutcome(metric=metric, rng_seed=seed, budget=budget,
                      iterations_to_target=iters, trace=((1, 0, 1.0),))


def test_summary_arithmetic():
    outcomes = (
        (make_outcome("physical", 1, 200, 100), make_outcome("attention", 1, 200, 50)),
        (make_outcome("physical", 2, 200, None), make_outcome("attention", 2, 200, 100)),
    )
    result = ExperimentResult(runs=2, budget=200, rng_base=0, outcomes=outcomes)
    summary = result.summary()
    assert summary["physical"] == {"hits": 1, "timeouts": 1,
                                   "median_iterations": 150,
                                   "mean_iterations": 150.0}
    assert summary["attention"] == {"hits": 2, "timeouts": 0,
                                    "median_iterations": 75,
                                    "mean_iterations": 75.0}
    assert summary["speedup"]["median"] == pytest.approx(2.0)
    assert summary["speedup"]["mean"] == pytest.approx(2.0)


def test_runs_csv_layout(tmp_path):
    outcomes = (
        (make_outcome("physical", 1, 200, 100), make_outcome("attention", 1, 200, 50)),
        (make_outcome("physical", 2, 200, None), make_outcome("attention", 2, 200, 100)),
    )
    result = ExperimentResult(runs=2, budget=200, rng_base=0, outcomes=outcomes)
    path = str(tmp_path / "runs.csv")
    write_runs_csv(result, path)
    with open(path, "r", encoding="utf-8") as fh:
        assert fh.read() == (
            "run,rng_seed,metric,hit,iterations\n"
            "1,1,physical,1,100\n"
            "1,1,attention,1,50\n"
            "2,2,physical,0,200\n"
            "2,2,attention,1,100\n"
        )


# ---------------------------------------------------------------------------
# configuration files


def write_config(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_config_full(tmp_path):
    path = write_config(tmp_path, {
        "runs": 30, "budget": 10000, "rng_base": 5,
        "branch_bias": {"demangle_signature:bb24": 0.2}})
    config = load_experiment_config(path)
    assert config.runs == 30
    assert config.budget == 10000
    assert config.rng_base == 5
    assert config.branch_bias == {("demangle_signature", "bb24"): 0.2}


def test_config_defaults(tmp_path):
    config = load_experiment_config(write_config(tmp_path, {"runs": 1, "budget": 2}))
    assert config.rng_base == 0
    assert config.branch_bias == {}


@pytest.mark.parametrize("data", [
    {"budget": 5},
    {"runs": 0, "budget": 5},
    {"runs": True, "budget": 5},
    {"runs": 2, "budget": -1},
    {"runs": 2, "budget": 5, "rng_base": "x"},
    {"runs": 2, "budget": 5, "branch_bias": {"noplainkey": 0.5}},
    {"runs": 2, "budget": 5, "branch_bias": {"a:b:c": 0.5}},
    {"runs": 2, "budget": 5, "branch_bias": {"a:b": 0}},
    {"runs": 2, "budget": 5, "branch_bias": {"a:b": 1.2}},
    {"runs": 2, "budget": 5, "branch_bias": ["a:b"]},
    [1, 2],
])
def test_config_rejects_bad_documents(tmp_path, data):
    with pytest.raises(InputError):
        load_experiment_config(write_config(tmp_path, data))


def test_config_rejects_malformed_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{broken")
    with pytest.raises(InputError) as err:
        load_experiment_config(str(path))
    assert "config.json" in str(err.value)


def test_maze_fixture_smoke(maze_dir, maze_program, maze_targets):
    from fuzzdist.fuzzsim import load_experiment_config
    from fuzzdist.physical import (DistanceConfig, block_distances,
                                   function_distances)

    config = load_experiment_config(f"{maze_dir}/sim_config_small.json")
    prog = make_sim_program(maze_program, maze_targets, config.branch_bias)
    fdist = function_distances(maze_program, maze_targets)
    dmap = block_distances(maze_program, maze_targets, fdist)
    result = run_experiment(prog, dmap, dmap, runs=config.runs,
                            budget=config.budget, rng_base=config.rng_base)
    assert len(result.outcomes) == config.runs
    summary = result.summary()
    assert summary["runs"] == config.runs
    assert set(summary) == {"runs", "budget", "rng_base", "physical",
                            "attention", "speedup"}
