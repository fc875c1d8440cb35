"""Seeded fuzzing-campaign simulator driven by a distance map.

The simulator walks the program graphs instead of executing code. A walk
starts at the entry block of the entry function and repeatedly steps to one
of the current block's CFG successors; a block with no successors falls
through into the entry of a called function when one has a CFG. Whenever a
step offers several options the walk consumes one "decision" from the
seed's genotype (a list of floats in [0, 1), index = floor(u * options));
missing decisions are drawn fresh from the campaign generator and recorded.
Entering a block with a branch bias below 1 passes only with that
probability, re-rolled on every walk: the bias models an input-dependent
precondition, so it is environmental noise rather than genotype.

Campaign loop, one walk per iteration:

* iteration 1 creates the initial seed with an empty genotype;
* later iterations pick a queue seed with probability proportional to its
  energy ``2 ** (k * (1 - d) * (1 - T))`` where d is the seed's min-max
  normalized distance over the current queue, ``T = exp(-iteration / tau)``
  cools exploration down over time (k = 10, tau = budget / 5), mutate it by
  re-randomizing one genotype slot, and walk the mutant;
* a walk that reaches a target block ends the campaign at that iteration;
* a mutant covering a block the campaign has not seen before joins the
  queue.

A seed's distance is the arithmetic mean of the defined block distances
along its path (multiplicity kept); seeds whose path has no defined block
normalize to the far end of the queue. Identical program, distance map,
budget and rng seed reproduce the identical trace.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, ValidationError
from .graphs import ProgramGraphs, TargetSpec
from .physical import DistanceMap
from .rng import SplitMix64

BlockRef = tuple[str, str]

ENERGY_EXPONENT_SCALE = 10
MAX_WALK_STEPS = 4096


@dataclass(frozen=True)
class SimProgram:
    graphs: ProgramGraphs
    targets: TargetSpec
    branch_bias: dict[BlockRef, float]
    entry_function: str


@dataclass
class SimSeed:
    seed_id: int
    genotype: list[float]
    path: list[BlockRef]
    seed_distance: Fraction | None


@dataclass(frozen=True)
class SimOutcome:
    metric: str
    rng_seed: int
    budget: int
    iterations_to_target: int | None
    trace: tuple[tuple[int, int, float], ...]

    @property
    def hit(self) -> bool:
        return self.iterations_to_target is not None


def resolve_entry_function(graphs: ProgramGraphs, explicit: str | None = None) -> str:
    """Entry = explicit name, else the unique call-graph root, else 'main'."""
    nodes = graphs.callgraph.nodes
    if explicit is not None:
        if explicit not in graphs.cfgs:
            raise ValidationError(f"entry function '{explicit}' has no CFG")
        return explicit
    called = {b for a, b in graphs.callgraph.edges if a != b}
    roots = sorted(n for n in nodes if n not in called)
    if len(roots) == 1 and roots[0] in graphs.cfgs:
        return roots[0]
    if "main" in graphs.cfgs:
        return "main"
    raise ValidationError(
        "cannot determine the entry function: no unique root and no 'main'")


def make_sim_program(graphs: ProgramGraphs, targets: TargetSpec,
                     branch_bias: dict[BlockRef, float] | None = None,
                     entry_function: str | None = None) -> SimProgram:
    bias = dict(branch_bias or {})
    for (function, bid), p in bias.items():
        cfg = graphs.cfgs.get(function)
        if cfg is None or bid not in cfg.blocks:
            raise ValidationError(f"branch bias names unknown block {function}:{bid}")
        if not 0 < p <= 1:
            raise ValidationError(
                f"branch bias for {function}:{bid} must be in (0, 1], got {p}")
    return SimProgram(graphs=graphs, targets=targets, branch_bias=bias,
                      entry_function=resolve_entry_function(graphs, entry_function))


def _walk_options(graphs: ProgramGraphs, ref: BlockRef) -> list[BlockRef]:
    function, bid = ref
    cfg = graphs.cfgs[function]
    succs = cfg.successors(bid)
    if succs:
        return [(function, s) for s in succs]
    return [(callee, graphs.cfgs[callee].entry)
            for callee in sorted(cfg.blocks[bid].callees)
            if callee in graphs.cfgs]


def _walk(prog: SimProgram, genotype: list[float], rng: SplitMix64,
          ) -> tuple[list[BlockRef], list[float], bool]:
    """Run one walk; returns (path, consumed genotype, target hit)."""
    path: list[BlockRef] = []
    consumed: list[float] = []
    cursor = 0
    ref: BlockRef = (prog.entry_function, prog.graphs.cfgs[prog.entry_function].entry)
    for _ in range(MAX_WALK_STEPS):
        path.append(ref)
        if ref in prog.targets.target_blocks:
            return path, consumed, True
        options = _walk_options(prog.graphs, ref)
        if not options:
            return path, consumed, False
        if len(options) == 1:
            nxt = options[0]
        else:
            if cursor < len(genotype):
                u = genotype[cursor]
            else:
                u = rng.random()
            consumed.append(u)
            cursor += 1
            nxt = options[int(u * len(options))]
        bias = prog.branch_bias.get(nxt, 1.0)
        if bias < 1.0 and rng.random() >= bias:
            return path, consumed, False
        ref = nxt
    return path, consumed, False


def _seed_distance(dist: DistanceMap, path: list[BlockRef]) -> Fraction | None:
    total = Fraction(0)
    count = 0
    for ref in path:
        value = dist.values.get(ref)
        if value is not None:
            total += value
            count += 1
    if count == 0:
        return None
    return total / count


def _queue_energies(queue: list[SimSeed], iteration: int, tau: float) -> list[float]:
    distances = [s.seed_distance for s in queue]
    defined = [d for d in distances if d is not None]
    lo = min(defined) if defined else None
    hi = max(defined) if defined else None
    cooling = 1.0 - math.exp(-iteration / tau)
    energies = []
    for d in distances:
        if d is None:
            norm = 1.0
        elif lo == hi:
            norm = 0.5
        else:
            norm = float((d - lo) / (hi - lo))
        energies.append(2.0 ** (ENERGY_EXPONENT_SCALE * (1.0 - norm) * cooling))
    return energies


def _select(queue: list[SimSeed], energies: list[float], rng: SplitMix64) -> int:
    total = math.fsum(energies)
    pick = rng.random() * total
    acc = 0.0
    for i, e in enumerate(energies):
        acc += e
        if pick < acc:
            return i
    return len(queue) - 1


def run_campaign(prog: SimProgram, dist: DistanceMap, budget: int,
                 rng_seed: int) -> SimOutcome:
    """Simulate one campaign; deterministic in all arguments."""
    if budget < 1:
        raise ValidationError(f"budget must be at least 1, got {budget}")
    entry_ref = (prog.entry_function, prog.graphs.cfgs[prog.entry_function].entry)
    if entry_ref not in dist.values:
        raise ValidationError(
            f"distance map does not cover the entry block {entry_ref[0]}:{entry_ref[1]}")
    rng = SplitMix64(rng_seed)
    tau = budget / 5
    queue: list[SimSeed] = []
    covered: set[BlockRef] = set()
    trace: list[tuple[int, int, float]] = []

    for iteration in range(1, budget + 1):
        if iteration == 1:
            parent_id, energy, genotype = 0, 1.0, []
        else:
            energies = _queue_energies(queue, iteration, tau)
            idx = _select(queue, energies, rng)
            parent = queue[idx]
            parent_id, energy = parent.seed_id, energies[idx]
            genotype = list(parent.genotype)
            if genotype:
                slot = rng.randrange(len(genotype))
                genotype[slot] = rng.random()
        trace.append((iteration, parent_id, energy))
        path, consumed, hit = _walk(prog, genotype, rng)
        if hit:
            return SimOutcome(metric=dist.metric, rng_seed=rng_seed, budget=budget,
                              iterations_to_target=iteration, trace=tuple(trace))
        new_blocks = any(ref not in covered for ref in path)
        covered.update(path)
        if iteration == 1 or new_blocks:
            queue.append(SimSeed(seed_id=len(queue), genotype=consumed, path=path,
                                 seed_distance=_seed_distance(dist, path)))
    return SimOutcome(metric=dist.metric, rng_seed=rng_seed, budget=budget,
                      iterations_to_target=None, trace=tuple(trace))


# ---------------------------------------------------------------------------
# paired experiments


@dataclass(frozen=True)
class ExperimentResult:
    runs: int
    budget: int
    rng_base: int
    outcomes: tuple[tuple[SimOutcome, SimOutcome], ...]

    def summary(self) -> dict:
        def stats(outs: list[SimOutcome]) -> dict:
            iters = [o.iterations_to_target if o.hit else o.budget for o in outs]
            return {
                "hits": sum(1 for o in outs if o.hit),
                "timeouts": sum(1 for o in outs if not o.hit),
                "median_iterations": statistics.median(iters),
                "mean_iterations": statistics.fmean(iters),
            }

        phys = stats([p for p, _ in self.outcomes])
        att = stats([a for _, a in self.outcomes])
        return {
            "runs": self.runs,
            "budget": self.budget,
            "rng_base": self.rng_base,
            "physical": phys,
            "attention": att,
            "speedup": {
                "median": phys["median_iterations"] / att["median_iterations"],
                "mean": phys["mean_iterations"] / att["mean_iterations"],
            },
        }


def run_experiment(prog: SimProgram, phys: DistanceMap, att: DistanceMap,
                   runs: int, budget: int, rng_base: int = 0) -> ExperimentResult:
    """Paired campaigns: run i uses rng seed ``rng_base + i`` for both arms."""
    if runs < 1:
        raise ValidationError(f"runs must be at least 1, got {runs}")
    outcomes = []
    for i in range(1, runs + 1):
        seed = rng_base + i
        outcomes.append((run_campaign(prog, phys, budget, seed),
                         run_campaign(prog, att, budget, seed)))
    return ExperimentResult(runs=runs, budget=budget, rng_base=rng_base,
                            outcomes=tuple(outcomes))


def write_runs_csv(result: ExperimentResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("run,rng_seed,metric,hit,iterations\n")
        for i, (p, a) in enumerate(result.outcomes, start=1):
            for out in (p, a):
                iters = out.iterations_to_target if out.hit else out.budget
                fh.write(f"{i},{out.rng_seed},{out.metric},{int(out.hit)},{iters}\n")


# ---------------------------------------------------------------------------
# experiment configuration files


@dataclass(frozen=True)
class ExperimentConfig:
    runs: int
    budget: int
    rng_base: int
    branch_bias: dict[BlockRef, float]


def load_experiment_config(path: str) -> ExperimentConfig:
    """Read a JSON experiment configuration.

    Keys: ``runs`` and ``budget`` (positive integers, required),
    ``rng_base`` (integer, default 0), ``branch_bias`` (object mapping
    ``function:block`` to a probability in (0, 1], default empty).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read: {exc.strerror}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}", path=path) from exc
    if not isinstance(data, dict):
        raise ParseError("experiment config must be a JSON object", path=path)

    def positive_int(key: str) -> int:
        value = data.get(key)
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ValidationError(f"'{key}' must be a positive integer, got {value!r}",
                                  path=path)
        return value

    runs = positive_int("runs")
    budget = positive_int("budget")
    rng_base = data.get("rng_base", 0)
    if not isinstance(rng_base, int) or isinstance(rng_base, bool):
        raise ValidationError(f"'rng_base' must be an integer, got {rng_base!r}", path=path)
    bias_raw = data.get("branch_bias", {})
    if not isinstance(bias_raw, dict):
        raise ValidationError("'branch_bias' must be an object", path=path)
    bias: dict[BlockRef, float] = {}
    for key, p in bias_raw.items():
        if not isinstance(key, str) or key.count(":") != 1:
            raise ValidationError(f"branch bias key must be 'function:block', got {key!r}",
                                  path=path)
        if not isinstance(p, (int, float)) or isinstance(p, bool) or not 0 < p <= 1:
            raise ValidationError(f"branch bias for '{key}' must be in (0, 1], got {p!r}",
                                  path=path)
        function, bid = key.split(":")
        bias[(function, bid)] = float(p)
    return ExperimentConfig(runs=runs, budget=budget, rng_base=rng_base, branch_bias=bias)
