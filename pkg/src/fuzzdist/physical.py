"""Physical (structural) distance computation over program graphs.

Function level: the distance from function n to the target set is the
inverse of the summed inverse shortest-path lengths to every reachable
target function, i.e. ``(sum_t 1/d(n,t))**-1`` over call-graph edge counts.
A target function itself has distance 0, and the value is absent exactly
when no target function is reachable from n.

Block level, within each function:

* a target block has distance 0;
* a block that calls at least one function with a defined function distance
  is a transition block and gets ``c * min`` over those callee distances;
* any other block takes the inverse-sum-of-inverses over every reachable
  transition or target block t of ``steps(m, t) + base(t)``, where steps
  counts CFG edges and base(t) is t's own value from the first two rules;
* the value is absent when no rule applies.

All distances are exact rationals internally and serialize to decimal
strings with exactly two fractional digits (half-even rounding).
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, ValidationError
from .graphs import Cfg, ProgramGraphs, TargetSpec, block_key

PHYSICAL = "physical"
ATTENTION = "attention"


@dataclass(frozen=True)
class DistanceConfig:
    """Tuning knobs for block distance; c scales the call transition hop."""

    c: Fraction = Fraction(10)

    def __post_init__(self):
        if self.c <= 0:
            raise ValidationError(f"transition scale c must be positive, got {self.c}")


@dataclass(frozen=True)
class FunctionDistanceMap:
    values: dict[str, Fraction]


@dataclass(frozen=True)
class DistanceMap:
    """Block distances for one metric.

    ``values`` is keyed by (function, block id); ``block_keys`` carries the
    external ``file:line`` (or ``function:block-id``) name for each entry.
    Maps loaded back from CSV have synthetic (``""``, row tag) keys: the
    external key and value survive a round trip, block identity does not.
    """

    metric: str
    values: dict[tuple[str, str], Fraction]
    block_keys: dict[tuple[str, str], str]

    def __post_init__(self):
        if self.metric not in (PHYSICAL, ATTENTION):
            raise ValidationError(f"unknown metric kind '{self.metric}'")

    def rows(self) -> list[tuple[str, Fraction]]:
        """(block_key, value) pairs in serialization order."""
        return sorted(
            ((self.block_keys[ref], v) for ref, v in self.values.items()),
            key=lambda kv: (kv[0], kv[1]),
        )


def format_distance(value: Fraction) -> str:
    """Exact half-even rounding of a rational to a 2-decimal string."""
    scaled = value * 100
    q, r = divmod(scaled.numerator, scaled.denominator)
    double = 2 * r
    if double > scaled.denominator or (double == scaled.denominator and q % 2):
        q += 1
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // 100}.{q % 100:02d}"


def _reverse_adjacency(nodes, edges):
    rev: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        rev[b].append(a)
    return rev


def _bfs_layers(start: str, adjacency: dict[str, list[str]]) -> dict[str, int]:
    """Edge-count shortest distance from start to every reachable node."""
    dist = {start: 0}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt in adjacency[node]:
            if nxt not in dist:
                dist[nxt] = dist[node] + 1
                queue.append(nxt)
    return dist


def function_distances(graphs: ProgramGraphs, targets: TargetSpec) -> FunctionDistanceMap:
    """Call-graph distance from every function to the target functions."""
    nodes = graphs.callgraph.nodes
    rev = _reverse_adjacency(nodes, graphs.callgraph.edges)
    # distance from each node TO each target = reverse BFS from the target
    per_target = {t: _bfs_layers(t, rev) for t in sorted(targets.target_functions)}
    values: dict[str, Fraction] = {}
    for n in nodes:
        if n in targets.target_functions:
            values[n] = Fraction(0)
            continue
        inv_sum = Fraction(0)
        reachable = False
        for t, dist in per_target.items():
            if n in dist:
                reachable = True
                inv_sum += Fraction(1, dist[n])
        if reachable:
            values[n] = 1 / inv_sum
    return FunctionDistanceMap(values=values)


def _block_base_values(cfg: Cfg, targets: TargetSpec, fdist: FunctionDistanceMap,
                       config: DistanceConfig) -> dict[str, Fraction]:
    """First-two-rule values: target blocks then transition blocks."""
    base: dict[str, Fraction] = {}
    for bid, block in cfg.blocks.items():
        if (cfg.function, bid) in targets.target_blocks:
            base[bid] = Fraction(0)
            continue
        callee_dists = [fdist.values[c] for c in block.callees if c in fdist.values]
        if callee_dists:
            base[bid] = config.c * min(callee_dists)
    return base


def block_distances(graphs: ProgramGraphs, targets: TargetSpec,
                    fdist: FunctionDistanceMap,
                    config: DistanceConfig = DistanceConfig()) -> DistanceMap:
    """Block-level physical distance for every block any rule covers."""
    values: dict[tuple[str, str], Fraction] = {}
    keys: dict[tuple[str, str], str] = {}
    for function in sorted(graphs.cfgs):
        cfg = graphs.cfgs[function]
        base = _block_base_values(cfg, targets, fdist, config)
        rev = _reverse_adjacency(cfg.blocks.keys(), cfg.edges)
        # accumulate 1/(steps + base) contributions via one reverse BFS per anchor
        inv_sums: dict[str, Fraction] = {}
        for anchor in sorted(base):
            anchor_val = base[anchor]
            for bid, steps in _bfs_layers(anchor, rev).items():
                if bid in base:
                    continue  # covered by a direct rule already
                inv_sums[bid] = inv_sums.get(bid, Fraction(0)) + \
                    Fraction(1, Fraction(steps) + anchor_val)
        for bid in cfg.blocks:
            ref = (function, bid)
            if bid in base:
                values[ref] = base[bid]
            elif bid in inv_sums:
                values[ref] = 1 / inv_sums[bid]
            else:
                continue
            keys[ref] = block_key(cfg, bid)
    return DistanceMap(metric=PHYSICAL, values=values, block_keys=keys)


# ---------------------------------------------------------------------------
# serialization: CSV of `block_key,distance` rows, sorted by key


def write_distance_csv(dmap: DistanceMap, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in dmap.rows():
            fh.write(f"{key},{format_distance(value)}\n")


def load_distance_csv(path: str, metric: str) -> DistanceMap:
    """Read a distance CSV back into a DistanceMap with synthetic refs."""
    values: dict[tuple[str, str], Fraction] = {}
    keys: dict[tuple[str, str], str] = {}
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row:
                    continue
                if len(row) != 2:
                    raise ParseError(f"row {i + 1}: expected 'block_key,distance', got {row!r}",
                                     path=path)
                key, text = row
                try:
                    value = Fraction(text)
                except (ValueError, ZeroDivisionError) as exc:
                    raise ParseError(f"row {i + 1}: bad distance {text!r}", path=path) from exc
                if value < 0:
                    raise ValidationError(f"row {i + 1}: negative distance {text}", path=path)
                ref = ("", f"row{i:06d}")
                values[ref] = value
                keys[ref] = key
    except OSError as exc:
        raise ParseError(f"cannot read: {exc.strerror}", path=path) from exc
    return DistanceMap(metric=metric, values=values, block_keys=keys)


def attach_distances(graphs: ProgramGraphs, dmap: DistanceMap, metric: str) -> DistanceMap:
    """Re-key a CSV-loaded map onto real (function, block id) refs.

    Blocks whose external key has no row stay absent. Duplicate keys in the
    file must agree on the value; blocks sharing one key all receive it.
    """
    by_key: dict[str, Fraction] = {}
    for ref, value in dmap.values.items():
        key = dmap.block_keys[ref]
        if key in by_key and by_key[key] != value:
            raise ValidationError(
                f"block key '{key}' appears with conflicting distances")
        by_key[key] = value
    values: dict[tuple[str, str], Fraction] = {}
    keys: dict[tuple[str, str], str] = {}
    for function, cfg in graphs.cfgs.items():
        for bid in cfg.blocks:
            key = block_key(cfg, bid)
            if key in by_key:
                ref = (function, bid)
                values[ref] = by_key[key]
                keys[ref] = key
    return DistanceMap(metric=metric, values=values, block_keys=keys)
