"""Time-indexed linear Gaussian structural causal models.

A model is a DAG over named nodes carrying integer time offsets, plus one
linear assignment per node: each node equals the coefficient-weighted sum of
its parents plus an independent Gaussian shock.  The module supports exact
interventional slopes (path rule), graph surgery for ``do`` interventions,
and two samplers: cross-sectional draws of the template window and unrolled
stationary time series.

All types are value-semantic and immutable; sampling is deterministic per
seed and independent of the ``workers`` setting.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ValidationError

_BLOCK = 1 << 16  # samples per RNG block; fixed so output is worker-count invariant


@dataclass(frozen=True, order=True)
class NodeRef:
    """A named node at an integer multiple of the sampling interval."""

    name: str
    time_offset: int = 0

    def __post_init__(self):
        if not self.name:
            raise ValidationError("bad_node", "node name must be non-empty")
        if not isinstance(self.time_offset, int):
            raise ValidationError("bad_node", f"time_offset must be an integer, got {self.time_offset!r}")

    def __str__(self) -> str:
        return f"{self.name}@{self.time_offset}"

    @staticmethod
    def parse(text: str) -> "NodeRef":
        """Parse ``"Z@0"`` (or bare ``"Z"``, meaning offset 0)."""
        name, sep, off = text.partition("@")
        if not sep:
            return NodeRef(name, 0)
        try:
            return NodeRef(name, int(off))
        except ValueError as exc:
            raise ValidationError("bad_node", f"cannot parse node reference {text!r}") from exc


Edge = tuple[NodeRef, NodeRef]


@dataclass(frozen=True)
class TimeIndexedDag:
    """Directed graph over NodeRefs; hypothesis object, not checked on build.

    Construction only requires edge endpoints to be declared nodes.  Temporal
    ordering and acyclicity are *verdicts* produced by :func:`validate_dag`,
    so that incoherent hypotheses (cycles, backward edges) can be represented
    and then rejected.
    """

    nodes: frozenset[NodeRef]
    edges: frozenset[Edge]

    def __init__(self, nodes: Iterable[NodeRef], edges: Iterable[Edge]):
        object.__setattr__(self, "nodes", frozenset(nodes))
        object.__setattr__(self, "edges", frozenset((s, t) for s, t in edges))
        for s, t in self.edges:
            if s not in self.nodes or t not in self.nodes:
                raise ValidationError("bad_edge", f"edge {s}->{t} references an undeclared node")

    @cached_property
    def sorted_nodes(self) -> tuple[NodeRef, ...]:
        return tuple(sorted(self.nodes, key=lambda n: (n.time_offset, n.name)))

    @cached_property
    def parents(self) -> dict[NodeRef, tuple[NodeRef, ...]]:
        out: dict[NodeRef, list[NodeRef]] = {n: [] for n in self.sorted_nodes}
        for s, t in sorted(self.edges, key=lambda e: (e[0].time_offset, e[0].name, e[1].time_offset, e[1].name)):
            out[t].append(s)
        return {n: tuple(ps) for n, ps in out.items()}

    @cached_property
    def children(self) -> dict[NodeRef, tuple[NodeRef, ...]]:
        out: dict[NodeRef, list[NodeRef]] = {n: [] for n in self.sorted_nodes}
        for s, t in sorted(self.edges, key=lambda e: (e[1].time_offset, e[1].name, e[0].time_offset, e[0].name)):
            out[s].append(t)
        return {n: tuple(cs) for n, cs in out.items()}

    def topological_order(self) -> tuple[NodeRef, ...]:
        """Deterministic topological order (ties broken by offset, then name)."""
        indeg = {n: len(self.parents[n]) for n in self.sorted_nodes}
        ready = [n for n in self.sorted_nodes if indeg[n] == 0]
        order: list[NodeRef] = []
        while ready:
            node = ready.pop(0)
            order.append(node)
            added = []
            for child in self.children[node]:
                indeg[child] -= 1
                if indeg[child] == 0:
                    added.append(child)
            if added:
                ready = sorted(ready + added, key=lambda n: (n.time_offset, n.name))
        if len(order) != len(self.nodes):
            raise ValidationError("cyclic_graph", "graph contains a directed cycle")
        return tuple(order)

    def descendants(self, node: NodeRef) -> frozenset[NodeRef]:
        """All nodes reachable from ``node`` via directed edges (exclusive)."""
        seen: set[NodeRef] = set()
        stack = list(self.children[node])
        while stack:
            cur = stack.pop()
            if cur not in seen:
                seen.add(cur)
                stack.extend(self.children[cur])
        return frozenset(seen)

    def ancestors(self, node: NodeRef) -> frozenset[NodeRef]:
        seen: set[NodeRef] = set()
        stack = list(self.parents[node])
        while stack:
            cur = stack.pop()
            if cur not in seen:
                seen.add(cur)
                stack.extend(self.parents[cur])
        return frozenset(seen)


@dataclass(frozen=True)
class DagViolation:
    kind: str  # backward_edge | cycle
    detail: str


@dataclass(frozen=True)
class DagValidation:
    ok: bool
    violations: tuple[DagViolation, ...]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [{"kind": v.kind, "detail": v.detail} for v in self.violations]}


def validate_dag(dag: TimeIndexedDag) -> DagValidation:
    """Check temporal ordering and acyclicity; returns a verdict, never raises.

    An edge may not point backward in time.  Edges within the same offset are
    allowed as long as the graph (taken as a whole) stays acyclic.
    """
    if not dag.nodes:
        raise ValidationError("empty_graph", "graph must have at least one node")
    violations = []
    for s, t in sorted(dag.edges, key=lambda e: (str(e[0]), str(e[1]))):
        if t.time_offset < s.time_offset:
            violations.append(DagViolation("backward_edge", f"{s} -> {t} points backward in time"))
    cycle = _find_cycle(dag)
    if cycle is not None:
        violations.append(DagViolation("cycle", " -> ".join(str(n) for n in cycle)))
    return DagValidation(ok=not violations, violations=tuple(violations))


def _find_cycle(dag: TimeIndexedDag) -> list[NodeRef] | None:
    """Return one directed cycle (closed walk) if any exists."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in dag.sorted_nodes}
    parent: dict[NodeRef, NodeRef] = {}

    for root in dag.sorted_nodes:
        if color[root] != WHITE:
            continue
        stack: list[tuple[NodeRef, int]] = [(root, 0)]
        color[root] = GREY
        while stack:
            node, idx = stack[-1]
            kids = dag.children[node]
            if idx < len(kids):
                stack[-1] = (node, idx + 1)
                child = kids[idx]
                if color[child] == GREY:
                    cyc = [child, node]
                    cur = node
                    while cur != child:
                        cur = parent[cur]
                        cyc.append(cur)
                    cyc.reverse()
                    return cyc
                if color[child] == WHITE:
                    color[child] = GREY
                    parent[child] = node
                    stack.append((child, 0))
            else:
                color[node] = BLACK
                stack.pop()
    return None


@dataclass(frozen=True)
class LinearSem:
    """A linear Gaussian SEM: a DAG plus path coefficients and shock scales.

    ``noise_std`` is keyed by node *name* (names in the taxonomy templates are
    unique); all shocks have mean zero and are mutually independent.
    ``shifts`` holds deterministic per-name levels (zero unless set by
    :func:`intervene`), so a do-constant is just a zero-variance shifted root.
    """

    dag: TimeIndexedDag
    coefficients: Mapping[Edge, float]
    noise_std: Mapping[str, float]
    shifts: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        coef_edges = frozenset(self.coefficients)
        if coef_edges != self.dag.edges:
            missing = self.dag.edges - coef_edges
            extra = coef_edges - self.dag.edges
            parts = []
            if missing:
                parts.append("missing coefficients for " + ", ".join(sorted(f"{s}->{t}" for s, t in missing)))
            if extra:
                parts.append("coefficients without edges: " + ", ".join(sorted(f"{s}->{t}" for s, t in extra)))
            raise ValidationError("coefficient_mismatch", "; ".join(parts))
        names = {n.name for n in self.dag.nodes}
        if set(self.noise_std) != names:
            raise ValidationError(
                "noise_mismatch",
                f"noise_std must cover exactly the node names {sorted(names)}, got {sorted(self.noise_std)}",
            )
        for name, std in self.noise_std.items():
            if not np.isfinite(std) or std < 0:
                raise ValidationError("bad_noise", f"noise_std[{name}] must be >= 0, got {std}")
        if not set(self.shifts) <= names:
            raise ValidationError("bad_shift", "shifts reference undeclared node names")
        object.__setattr__(self, "coefficients", dict(self.coefficients))
        object.__setattr__(self, "noise_std", dict(self.noise_std))
        object.__setattr__(self, "shifts", dict(self.shifts))

    def shift_of(self, name: str) -> float:
        return float(self.shifts.get(name, 0.0))


@dataclass(frozen=True)
class SamplePanel:
    """Cross-sectional draws of every node in the template window.

    ``draws[:, j]`` holds the samples of ``columns[j]``; column order is the
    DAG's deterministic topological order.  Identical (sem, n, seed) inputs
    give bit-identical panels.
    """

    draws: np.ndarray
    columns: tuple[NodeRef, ...]
    seed: int

    def column(self, node: NodeRef) -> np.ndarray:
        return self.draws[:, self.columns.index(node)]


def _shock_seq(seed: int, name: str, time_offset: int, block: int) -> np.random.SeedSequence:
    """Independent, reproducible stream key for one node's shock block."""
    digest = hashlib.blake2b(f"{name}@{time_offset}".encode("utf-8"), digest_size=16).digest()
    return np.random.SeedSequence(
        [
            seed % (1 << 64),
            int.from_bytes(digest[:8], "little"),
            int.from_bytes(digest[8:], "little"),
            block,
        ]
    )


def _draw_shocks(seed: int, name: str, time_offset: int, std: float, n: int, workers: int) -> np.ndarray:
    """Draw ``n`` N(0, std^2) values in fixed-size blocks.

    Each block has its own derived stream, so the result is identical no
    matter how many workers evaluate the blocks.
    """
    out = np.empty(n, dtype=np.float64)

    def fill(block: int) -> None:
        lo = block * _BLOCK
        hi = min(lo + _BLOCK, n)
        rng = np.random.default_rng(_shock_seq(seed, name, time_offset, block))
        out[lo:hi] = rng.standard_normal(hi - lo)

    blocks = range((n + _BLOCK - 1) // _BLOCK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, blocks))
    else:
        for b in blocks:
            fill(b)
    if std != 1.0:
        out *= std
    return out


def simulate(sem: LinearSem, n_samples: int, seed: int, workers: int = 1) -> SamplePanel:
    """Draw ``n_samples`` independent realizations of the whole template.

    Each node equals the coefficient-weighted sum of its parents plus its own
    Gaussian shock; parentless nodes are pure shocks.  Shock streams are
    derived per (seed, node), so every node's noise is independent and the
    draws do not depend on ``workers``.
    """
    if n_samples <= 0:
        raise ValidationError("bad_sample_count", f"n_samples must be positive, got {n_samples}")
    verdict = validate_dag(sem.dag)
    if not verdict.ok:
        raise ValidationError("invalid_dag", "; ".join(v.detail for v in verdict.violations))

    order = sem.dag.topological_order()
    values: dict[NodeRef, np.ndarray] = {}
    for node in order:
        col = _draw_shocks(seed, node.name, node.time_offset, sem.noise_std[node.name], n_samples, workers)
        shift = sem.shift_of(node.name)
        if shift != 0.0:
            col += shift
        for parent in sem.dag.parents[node]:
            col += sem.coefficients[(parent, node)] * values[parent]
        values[node] = col
    draws = np.column_stack([values[n] for n in order])
    return SamplePanel(draws=draws, columns=order, seed=seed)


def simulate_series(sem: LinearSem, n_periods: int, seed: int, workers: int = 1) -> dict[str, np.ndarray]:
    """Unroll the template into stationary time series, one per node name.

    Each edge becomes a lagged dependency with lag = offset difference; the
    template is required to place every name at a single offset so the
    unrolled equations are unambiguous.  Enough pre-sample periods are
    simulated that the returned window is exactly stationary.
    """
    if n_periods <= 0:
        raise ValidationError("bad_sample_count", f"n_periods must be positive, got {n_periods}")
    verdict = validate_dag(sem.dag)
    if not verdict.ok:
        raise ValidationError("invalid_dag", "; ".join(v.detail for v in verdict.violations))
    offsets: dict[str, int] = {}
    for node in sem.dag.sorted_nodes:
        if node.name in offsets and offsets[node.name] != node.time_offset:
            raise ValidationError(
                "ambiguous_template",
                f"name {node.name!r} appears at offsets {offsets[node.name]} and {node.time_offset}; "
                "series unrolling needs one offset per name",
            )
        offsets[node.name] = node.time_offset

    order = sem.dag.topological_order()
    # periods of history each name needs before its first stationary value
    depth: dict[NodeRef, int] = {}
    for node in order:
        depth[node] = max(
            (depth[p] + (node.time_offset - p.time_offset) for p in sem.dag.parents[node]),
            default=0,
        )
    lead = max(depth.values())
    total = n_periods + lead

    series: dict[str, np.ndarray] = {}
    for node in order:
        vals = _draw_shocks(seed, node.name, node.time_offset, sem.noise_std[node.name], total, workers)
        shift = sem.shift_of(node.name)
        if shift != 0.0:
            vals += shift
        for parent in sem.dag.parents[node]:
            lag = node.time_offset - parent.time_offset
            coef = sem.coefficients[(parent, node)]
            if lag == 0:
                vals += coef * series[parent.name]
            else:
                vals[lag:] += coef * series[parent.name][:-lag]
        series[node.name] = vals
    return {name: vals[lead:] for name, vals in series.items()}


def causal_effect_slope(sem: LinearSem, treatment: NodeRef, outcome: NodeRef) -> float:
    """d E[outcome | do(treatment=r)] / dr via the linear-SEM path rule.

    Sums the coefficient product over every directed path treatment->outcome;
    zero when no directed path exists.
    """
    if treatment == outcome:
        raise ValidationError("bad_query", "treatment and outcome must differ")
    for node in (treatment, outcome):
        if node not in sem.dag.nodes:
            raise ValidationError("unknown_node", f"{node} is not in the graph")
    verdict = validate_dag(sem.dag)
    if not verdict.ok:
        raise ValidationError("invalid_dag", "; ".join(v.detail for v in verdict.violations))

    # total effect onto `outcome`, accumulated over a reverse topological sweep
    effect: dict[NodeRef, float] = {outcome: 1.0}
    for node in reversed(sem.dag.topological_order()):
        if node == outcome:
            continue
        effect[node] = sum(
            sem.coefficients[(node, child)] * effect.get(child, 0.0) for child in sem.dag.children[node]
        )
    return float(effect.get(treatment, 0.0))


def population_covariance(sem: LinearSem) -> tuple[np.ndarray, tuple[NodeRef, ...]]:
    """Exact covariance matrix of the template window.

    With values v = A v + shock, the covariance is (I-A)^-1 D (I-A)^-T where
    D is the diagonal of shock variances; no sampling involved.
    """
    verdict = validate_dag(sem.dag)
    if not verdict.ok:
        raise ValidationError("invalid_dag", "; ".join(v.detail for v in verdict.violations))
    order = sem.dag.topological_order()
    idx = {n: i for i, n in enumerate(order)}
    size = len(order)
    coef_matrix = np.zeros((size, size))
    for (s, t), coef in sem.coefficients.items():
        coef_matrix[idx[t], idx[s]] = coef
    shock_var = np.diag([sem.noise_std[n.name] ** 2 for n in order])
    propagate = np.linalg.inv(np.eye(size) - coef_matrix)
    return propagate @ shock_var @ propagate.T, order


def population_ols_slope(sem: LinearSem, x: NodeRef, y: NodeRef) -> float:
    """Exact Cov(x, y)/Var(x) under the model; what OLS converges to."""
    cov, order = population_covariance(sem)
    idx = {n: i for i, n in enumerate(order)}
    for node in (x, y):
        if node not in idx:
            raise ValidationError("unknown_node", f"{node} is not in the graph")
    var_x = cov[idx[x], idx[x]]
    if var_x <= 0.0:
        raise ValidationError("degenerate_regressor", f"{x} has zero variance under the model")
    return float(cov[idx[x], idx[y]] / var_x)


def intervene(sem: LinearSem, node: NodeRef, value: float) -> LinearSem:
    """Graph surgery for do(node=value); returns a new SEM, input unchanged.

    Incoming edges are removed, the node's shock variance is zeroed, and the
    constant is carried as a shift, making the node a clamped root.
    """
    if node not in sem.dag.nodes:
        raise ValidationError("unknown_node", f"{node} is not in the graph")
    kept_edges = [e for e in sem.dag.edges if e[1] != node]
    dag = TimeIndexedDag(sem.dag.nodes, kept_edges)
    coefficients = {e: sem.coefficients[e] for e in kept_edges}
    noise_std = dict(sem.noise_std)
    noise_std[node.name] = 0.0
    shifts = dict(sem.shifts)
    shifts[node.name] = float(value)
    return LinearSem(dag=dag, coefficients=coefficients, noise_std=noise_std, shifts=shifts)


# --- JSON spec format -------------------------------------------------------
#
# {"nodes": [{"name": "Z", "offset": 0}, ...],
#  "edges": [{"from": "Z@0", "to": "X@1", "coef": 1.0}, ...],
#  "noise": {"Z": 1.0, ...}}
#
# Node references in edges may be bare names when the name appears at a
# single offset.  Unknown fields are rejected at every level.

_TOP_FIELDS = {"nodes", "edges", "noise"}
_AGGREGATOR_FIELDS = {"weights", "target"}


def sem_from_dict(spec: dict, extra_fields: frozenset = frozenset()) -> LinearSem:
    """Build a LinearSem from the JSON spec structure."""
    unknown = set(spec) - _TOP_FIELDS - set(extra_fields)
    if unknown:
        raise ValidationError("unknown_field", f"unknown top-level fields: {sorted(unknown)}")
    for key in _TOP_FIELDS:
        if key not in spec:
            raise ValidationError("missing_field", f"spec is missing required field {key!r}")

    nodes: list[NodeRef] = []
    for entry in spec["nodes"]:
        unknown = set(entry) - {"name", "offset"}
        if unknown:
            raise ValidationError("unknown_field", f"unknown node fields: {sorted(unknown)}")
        nodes.append(NodeRef(str(entry["name"]), int(entry.get("offset", 0))))
    by_name: dict[str, list[NodeRef]] = {}
    for n in nodes:
        by_name.setdefault(n.name, []).append(n)

    def resolve(text: str) -> NodeRef:
        ref = NodeRef.parse(str(text))
        if "@" not in str(text):
            matches = by_name.get(ref.name, [])
            if len(matches) == 1:
                return matches[0]
            raise ValidationError("ambiguous_node", f"{text!r} is ambiguous; use name@offset")
        if ref not in set(nodes):
            raise ValidationError("unknown_node", f"edge references undeclared node {text!r}")
        return ref

    edges: dict[Edge, float] = {}
    for entry in spec["edges"]:
        unknown = set(entry) - {"from", "to", "coef"}
        if unknown:
            raise ValidationError("unknown_field", f"unknown edge fields: {sorted(unknown)}")
        edge = (resolve(entry["from"]), resolve(entry["to"]))
        if edge in edges:
            raise ValidationError("duplicate_edge", f"edge {entry['from']}->{entry['to']} declared twice")
        edges[edge] = float(entry["coef"])

    noise = {str(k): float(v) for k, v in spec["noise"].items()}
    dag = TimeIndexedDag(nodes, edges)
    return LinearSem(dag=dag, coefficients=edges, noise_std=noise)


def load_sem_json(path: str | Path) -> LinearSem:
    with open(path, "r", encoding="utf-8") as fh:
        return sem_from_dict(json.load(fh))


def sem_to_dict(sem: LinearSem) -> dict:
    nodes = sem.dag.sorted_nodes
    return {
        "nodes": [{"name": n.name, "offset": n.time_offset} for n in nodes],
        "edges": [
            {"from": str(s), "to": str(t), "coef": sem.coefficients[(s, t)]}
            for s, t in sorted(sem.dag.edges, key=lambda e: (str(e[0]), str(e[1])))
        ],
        "noise": {name: sem.noise_std[name] for name in sorted(sem.noise_std)},
    }
