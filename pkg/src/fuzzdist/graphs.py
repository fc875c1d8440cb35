"""Program graph model: call graph, per-function CFGs, and target resolution.

On-disk formats
---------------
Call graph (single JSON file)::

    {"nodes": ["main", "helper"], "edges": [["main", "helper"]]}

CFG directory: one JSON file per function::

    {
      "function": "main",
      "entry": "bb0",
      "blocks": [
        {"id": "bb0", "lines": [{"file": "a.c", "line": 12}], "callees": ["helper"]}
      ],
      "edges": [["bb0", "bb1"]]
    }

Targets file: plain text, one ``path/file.c:LINE`` location per line,
colon separated with no spaces. ``#`` starts a comment; blank lines are
ignored.

All graph values are immutable after construction and safe to share between
threads. File paths are normalized (forward slashes, no leading ``./``) so
the same location spelled on different platforms compares equal.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass

from .errors import ParseError, ValidationError


def normalize_path(path: str) -> str:
    """Normalize a source path: backslashes to slashes, strip leading './'."""
    p = path.replace("\\", "/")
    while p.startswith("./"):
        p = p[2:]
    return p


@dataclass(frozen=True, order=True)
class SourceLoc:
    """A source location: normalized file path plus 1-based line number."""

    file: str
    line: int


@dataclass(frozen=True)
class BasicBlock:
    id: str
    lines: tuple[SourceLoc, ...]
    callees: frozenset[str]


@dataclass(frozen=True)
class Cfg:
    """Intra-procedural control-flow graph of one function."""

    function: str
    entry: str
    blocks: dict[str, BasicBlock]
    edges: frozenset[tuple[str, str]]

    def successors(self, block_id: str) -> list[str]:
        """Successor block ids of ``block_id``, sorted for determinism."""
        return sorted(b for a, b in self.edges if a == block_id)


@dataclass(frozen=True)
class CallGraph:
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]


@dataclass(frozen=True)
class ProgramGraphs:
    callgraph: CallGraph
    cfgs: dict[str, Cfg]


@dataclass(frozen=True)
class TargetSpec:
    """Resolved targets: the requested locations plus the functions and
    (function, block id) pairs whose lines intersect them."""

    locations: frozenset[SourceLoc]
    target_functions: frozenset[str]
    target_blocks: frozenset[tuple[str, str]]


def block_key(cfg: Cfg, block_id: str) -> str:
    """Stable external name for a block.

    ``file:line`` of the block's first source location when it has one,
    otherwise ``function:block-id``. Keys are not guaranteed unique (two
    blocks may start on the same line after inlining); consumers that need
    uniqueness must handle duplicates.
    """
    block = cfg.blocks[block_id]
    if block.lines:
        loc = block.lines[0]
        return f"{loc.file}:{loc.line}"
    return f"{cfg.function}:{block_id}"


# ---------------------------------------------------------------------------
# loading


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read: {exc.strerror}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}", path=path) from exc


def _require(cond: bool, message: str, path: str):
    if not cond:
        raise ValidationError(message, path=path)


def _parse_edge_list(raw, what: str, path: str) -> list[tuple[str, str]]:
    _require(isinstance(raw, list), f"{what} must be a list", path)
    edges = []
    for item in raw:
        _require(
            isinstance(item, list) and len(item) == 2
            and all(isinstance(x, str) for x in item),
            f"{what} entries must be [from, to] string pairs, got {item!r}", path)
        edges.append((item[0], item[1]))
    return edges


def _load_callgraph(path: str) -> CallGraph:
    data = _load_json(path)
    _require(isinstance(data, dict), "call graph must be a JSON object", path)
    nodes_raw = data.get("nodes")
    _require(isinstance(nodes_raw, list) and all(isinstance(n, str) for n in nodes_raw),
             "'nodes' must be a list of function names", path)
    _require(len(set(nodes_raw)) == len(nodes_raw), "'nodes' contains duplicates", path)
    nodes = frozenset(nodes_raw)
    edges = _parse_edge_list(data.get("edges", []), "'edges'", path)
    for a, b in edges:
        _require(a in nodes, f"edge references unknown caller '{a}'", path)
        _require(b in nodes, f"edge references unknown callee '{b}'", path)
    return CallGraph(nodes=nodes, edges=frozenset(edges))


def _parse_loc(raw, path: str) -> SourceLoc:
    _require(isinstance(raw, dict), f"line entry must be an object, got {raw!r}", path)
    file = raw.get("file")
    line = raw.get("line")
    _require(isinstance(file, str) and file != "", "line entry needs a non-empty 'file'", path)
    _require(isinstance(line, int) and not isinstance(line, bool) and line >= 1,
             f"line number must be a positive integer, got {line!r}", path)
    return SourceLoc(file=normalize_path(file), line=line)


def _load_cfg(path: str, nodes: frozenset[str]) -> Cfg:
    data = _load_json(path)
    _require(isinstance(data, dict), "CFG must be a JSON object", path)
    function = data.get("function")
    _require(isinstance(function, str) and function != "", "missing 'function' name", path)
    _require(function in nodes,
             f"function '{function}' does not appear in the call graph", path)

    blocks_raw = data.get("blocks")
    _require(isinstance(blocks_raw, list) and blocks_raw, "'blocks' must be a non-empty list", path)
    blocks: dict[str, BasicBlock] = {}
    for braw in blocks_raw:
        _require(isinstance(braw, dict), f"block entry must be an object, got {braw!r}", path)
        bid = braw.get("id")
        _require(isinstance(bid, str) and bid != "", "block needs a non-empty 'id'", path)
        _require(bid not in blocks, f"duplicate block id '{bid}'", path)
        lines = tuple(_parse_loc(lraw, path) for lraw in braw.get("lines", []))
        _require(len(set(lines)) == len(lines),
                 f"block '{bid}' lists a duplicate source line", path)
        callees_raw = braw.get("callees", [])
        _require(isinstance(callees_raw, list) and all(isinstance(c, str) for c in callees_raw),
                 f"block '{bid}' callees must be a list of function names", path)
        for callee in callees_raw:
            _require(callee in nodes,
                     f"block '{bid}' calls '{callee}' which is not in the call graph", path)
        blocks[bid] = BasicBlock(id=bid, lines=lines, callees=frozenset(callees_raw))

    entry = data.get("entry")
    _require(isinstance(entry, str) and entry in blocks,
             f"entry block '{entry}' is not a declared block", path)
    edges = _parse_edge_list(data.get("edges", []), "'edges'", path)
    for a, b in edges:
        _require(a in blocks, f"edge references unknown block '{a}'", path)
        _require(b in blocks, f"edge references unknown block '{b}'", path)
    return Cfg(function=function, entry=entry, blocks=blocks, edges=frozenset(edges))


def load_program(callgraph_path: str, cfg_dir: str) -> ProgramGraphs:
    """Load a call graph plus every ``*.json`` CFG under ``cfg_dir``.

    Raises ParseError/ValidationError naming the offending file for any
    malformed input, dangling identifier, or duplicate function definition.
    """
    callgraph = _load_callgraph(callgraph_path)
    try:
        names = sorted(n for n in os.listdir(cfg_dir) if n.endswith(".json"))
    except OSError as exc:
        raise ParseError(f"cannot list CFG directory: {exc.strerror}", path=cfg_dir) from exc
    cfgs: dict[str, Cfg] = {}
    for name in names:
        path = os.path.join(cfg_dir, name)
        cfg = _load_cfg(path, callgraph.nodes)
        if cfg.function in cfgs:
            raise ValidationError(
                f"function '{cfg.function}' is defined by more than one CFG file", path=path)
        cfgs[cfg.function] = cfg
    return ProgramGraphs(callgraph=callgraph, cfgs=cfgs)


def save_program(graphs: ProgramGraphs, callgraph_path: str, cfg_dir: str) -> None:
    """Inverse of load_program; writes files that load back to an equal value."""
    cg = {
        "nodes": sorted(graphs.callgraph.nodes),
        "edges": sorted([a, b] for a, b in graphs.callgraph.edges),
    }
    with open(callgraph_path, "w", encoding="utf-8") as fh:
        json.dump(cg, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.makedirs(cfg_dir, exist_ok=True)
    for function in sorted(graphs.cfgs):
        cfg = graphs.cfgs[function]
        data = {
            "function": cfg.function,
            "entry": cfg.entry,
            "blocks": [
                {
                    "id": b.id,
                    "lines": [{"file": loc.file, "line": loc.line} for loc in b.lines],
                    "callees": sorted(b.callees),
                }
                for b in (cfg.blocks[bid] for bid in sorted(cfg.blocks))
            ],
            "edges": sorted([a, b] for a, b in cfg.edges),
        }
        # function names may contain path separators in principle; keep the
        # file name safe while 'function' inside the JSON stays authoritative
        safe = re.sub(r"[^A-Za-z0-9_.-]", "_", function)
        with open(os.path.join(cfg_dir, f"{safe}.json"), "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")


_TARGET_RE = re.compile(r"^(?P<file>[^:]+):(?P<line>[0-9]+)$")


def load_targets_file(path: str) -> list[SourceLoc]:
    """Parse a targets file into locations (order preserved, duplicates kept)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read: {exc.strerror}", path=path) from exc
    out: list[SourceLoc] = []
    for lineno, raw in enumerate(raw_lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if text == "":
            continue
        m = _TARGET_RE.match(text)
        if not m:
            raise ParseError(
                f"line {lineno}: expected 'path/file.c:LINE' with no spaces, got {raw!r}",
                path=path)
        out.append(SourceLoc(file=normalize_path(m.group("file")), line=int(m.group("line"))))
    if not out:
        raise ValidationError("no target locations given", path=path)
    return out


def resolve_targets(graphs: ProgramGraphs, locations: list[SourceLoc]) -> TargetSpec:
    """Map target source locations onto blocks and their owning functions.

    A block is a target when any of its lines equals any requested location;
    every matching block counts (several blocks may share a line). Raises
    ValidationError when no location matches anything.
    """
    wanted = frozenset(locations)
    target_blocks: set[tuple[str, str]] = set()
    target_functions: set[str] = set()
    for function, cfg in graphs.cfgs.items():
        for bid, block in cfg.blocks.items():
            if any(loc in wanted for loc in block.lines):
                target_blocks.add((function, bid))
                target_functions.add(function)
    if not target_blocks:
        locs = ", ".join(f"{l.file}:{l.line}" for l in sorted(wanted))
        raise ValidationError(f"no target location matched any block: {locs}")
    return TargetSpec(locations=wanted,
                      target_functions=frozenset(target_functions),
                      target_blocks=frozenset(target_blocks))
