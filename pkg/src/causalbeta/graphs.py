"""Graph-level reasoning: what an OLS slope can mean under a hypothesized DAG.

Four tools live here: d-separation and the back-door check (the workhorses),
a necessary-conditions checklist for a single proposed edge, an admissibility
test for same-period index->constituent effects when the index aggregates its
own constituents, and a pattern classifier mapping three-node hypotheses onto
a small taxonomy with an interpretation of the regression slope under each.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .errors import ValidationError
from .scm import NodeRef, TimeIndexedDag, validate_dag

# Weight vectors must sit on the simplex up to numerical dust.
_SIMPLEX_TOL = 1e-12

COLLIDER_WARNING = "conditioning on Z opens collider path"


def _require_query_nodes(dag: TimeIndexedDag, x: NodeRef, y: NodeRef, conditioning: frozenset[NodeRef]) -> None:
    if x == y:
        raise ValidationError("bad_query", "the two query nodes must differ")
    for node in (x, y):
        if node not in dag.nodes:
            raise ValidationError("unknown_node", f"{node} is not in the graph")
        if node in conditioning:
            raise ValidationError("bad_query", f"query node {node} may not appear in the conditioning set")
    for node in conditioning:
        if node not in dag.nodes:
            raise ValidationError("unknown_node", f"conditioning node {node} is not in the graph")


def d_separated(dag: TimeIndexedDag, x: NodeRef, y: NodeRef, conditioning: set[NodeRef] | frozenset[NodeRef]) -> bool:
    """True iff every path between x and y is blocked by the conditioning set.

    Chains and forks are blocked when their middle node is conditioned on;
    colliders are blocked unless the collider or one of its descendants is
    conditioned on.  Implemented as reachability over (node, direction)
    states rather than path enumeration, so it stays linear in graph size.
    The dag is assumed valid (see :func:`causalbeta.scm.validate_dag`).
    """
    conditioning = frozenset(conditioning)
    _require_query_nodes(dag, x, y, conditioning)

    parents = dag.parents
    children = dag.children

    # conditioned nodes and their ancestors: the nodes at which a collider is open
    collider_open: set[NodeRef] = set(conditioning)
    stack = list(conditioning)
    while stack:
        for p in parents[stack.pop()]:
            if p not in collider_open:
                collider_open.add(p)
                stack.append(p)

    # states: (node, arrived_along_edge_into_node)
    start_down = (x, True)  # virtual arrival; from x we may go anywhere
    start_up = (x, False)
    visited = {start_down, start_up}
    queue = deque((start_down, start_up))
    while queue:
        node, arrived_down = queue.popleft()
        if arrived_down:
            # came in via an edge pointing at `node`
            if node not in conditioning:
                nxt = [(c, True) for c in children[node]]
            else:
                nxt = []
            if node in collider_open:
                nxt += [(p, False) for p in parents[node]]
        else:
            # came in via an edge pointing away from `node`
            if node in conditioning:
                nxt = []
            else:
                nxt = [(p, False) for p in parents[node]] + [(c, True) for c in children[node]]
        for state in nxt:
            if state not in visited:
                if state[0] == y:
                    return False
                visited.add(state)
                queue.append(state)
    return True


def backdoor_clear(
    dag: TimeIndexedDag, treatment: NodeRef, outcome: NodeRef, conditioning: set[NodeRef] | frozenset[NodeRef]
) -> bool:
    """Back-door criterion for reading the treatment->outcome slope causally.

    True iff the conditioning set contains no descendant of the treatment and
    blocks every path into the treatment.  The second part is checked as
    d-separation in the surgically pruned graph with the treatment's outgoing
    edges removed; given the no-descendant condition the two are equivalent,
    because any collider-opening descendant route through the treatment would
    itself violate that condition.
    """
    conditioning = frozenset(conditioning)
    _require_query_nodes(dag, treatment, outcome, conditioning)
    if dag.descendants(treatment) & conditioning:
        return False
    pruned = TimeIndexedDag(dag.nodes, [e for e in dag.edges if e[0] != treatment])
    return d_separated(pruned, treatment, outcome, conditioning)


# --- aggregator admissibility ------------------------------------------------


class AdmissibilityStatus(Enum):
    ADMISSIBLE = "admissible"
    CONTRADICTION = "contradiction"
    DEGENERATE = "degenerate"


class AdmissibilityRationale(Enum):
    BETA_ZERO = "beta_zero"
    LEAVE_ONE_OUT = "leave_one_out"
    SINGLE_ASSET_MARKET = "single_asset_market"
    CYCLE_DETECTED = "cycle_detected"


class Corollary(Enum):
    LAGGED_INDEX = "i"
    LEAVE_ONE_OUT = "ii"
    SINGLE_ASSET = "iii"


@dataclass(frozen=True)
class AggregatorSpec:
    """A value-weighted index over named constituents, one of which is studied.

    Weights are previous-period index weights: nonnegative, summing to one.
    """

    constituents: tuple[str, ...]
    weights: dict[str, float]
    target_asset: str

    def __init__(self, constituents, weights, target_asset):
        object.__setattr__(self, "constituents", tuple(constituents))
        object.__setattr__(self, "weights", {str(k): float(v) for k, v in dict(weights).items()})
        object.__setattr__(self, "target_asset", str(target_asset))
        if len(set(self.constituents)) != len(self.constituents):
            raise ValidationError("duplicate_constituent", "constituent labels must be unique")
        if set(self.weights) != set(self.constituents):
            raise ValidationError(
                "weight_mismatch", "weights must be given for exactly the declared constituents"
            )
        if self.target_asset not in self.constituents:
            raise ValidationError("unknown_target", f"target asset {self.target_asset!r} is not a constituent")
        if any(w < 0 for w in self.weights.values()):
            raise ValidationError("negative_weight", "weights must be nonnegative")
        total = sum(self.weights.values())
        if abs(total - 1.0) > _SIMPLEX_TOL:
            raise ValidationError("weights_not_normalized", f"weights sum to {total!r}, expected 1")

    def weight_of(self, asset: str) -> float:
        return self.weights[asset]


@dataclass(frozen=True)
class AdmissibilityVerdict:
    status: AdmissibilityStatus
    rationale: AdmissibilityRationale
    corollary: Corollary | None

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "rationale": self.rationale.value,
            "corollary": self.corollary.value if self.corollary is not None else None,
        }


def check_aggregator_contradiction(agg: AggregatorSpec, beta: float) -> AdmissibilityVerdict:
    """Can a same-period index->target effect of size beta coexist with the index
    being a weighted aggregate that includes the target?

    Substituting the aggregate into the structural equation shows the target
    would enter its own assignment whenever beta is nonzero, its own weight is
    positive, and at least one other constituent has positive weight: that is
    a same-period cycle, hence a contradiction.  The remaining cases are
    admissible (beta = 0, or the target is excluded from the index) or
    degenerate (the index IS the target).
    """
    beta = float(beta)
    if not math.isfinite(beta):
        raise ValidationError("bad_beta", f"beta must be finite, got {beta!r}")
    w_target = agg.weight_of(agg.target_asset)
    if beta == 0.0:
        return AdmissibilityVerdict(AdmissibilityStatus.ADMISSIBLE, AdmissibilityRationale.BETA_ZERO, None)
    if w_target == 0.0:
        return AdmissibilityVerdict(
            AdmissibilityStatus.ADMISSIBLE, AdmissibilityRationale.LEAVE_ONE_OUT, Corollary.LEAVE_ONE_OUT
        )
    if all(w == 0.0 for asset, w in agg.weights.items() if asset != agg.target_asset):
        return AdmissibilityVerdict(
            AdmissibilityStatus.DEGENERATE, AdmissibilityRationale.SINGLE_ASSET_MARKET, Corollary.SINGLE_ASSET
        )
    return AdmissibilityVerdict(
        AdmissibilityStatus.CONTRADICTION, AdmissibilityRationale.CYCLE_DETECTED, None
    )


# --- necessary-conditions checklist ------------------------------------------


@dataclass(frozen=True)
class ChecklistReport:
    """Four named yes/no judgments about a single proposed causal edge.

    Two are computed from the graph (temporal priority, acyclicity); the
    other two record the caller's domain judgments, because no algorithm can
    decide whether an economic mechanism exists or whether the implied
    intervention is well-posed.
    """

    temporal_priority: bool
    acyclicity: bool
    mechanism: bool
    causal_elimination: bool
    warnings: tuple[str, ...] = ()

    @property
    def overall(self) -> bool:
        return self.temporal_priority and self.acyclicity and self.mechanism and self.causal_elimination

    def to_dict(self) -> dict:
        return {
            "temporal_priority": self.temporal_priority,
            "acyclicity": self.acyclicity,
            "mechanism": self.mechanism,
            "causal_elimination": self.causal_elimination,
            "overall": self.overall,
            "warnings": list(self.warnings),
        }


def necessary_conditions_checklist(
    dag: TimeIndexedDag,
    edge: tuple[NodeRef, NodeRef],
    mechanism_declared: bool,
    intervention_wellposed: bool,
    allow_same_period: bool = False,
) -> ChecklistReport:
    """Evaluate the four necessary conditions for one proposed edge.

    temporal_priority passes when the source strictly precedes the target;
    same-period edges pass only under ``allow_same_period`` and then carry a
    warning.  acyclicity asks whether the graph with the edge added remains
    acyclic.  The last two booleans echo the caller.
    """
    source, target = edge
    for node in (source, target):
        if node not in dag.nodes:
            raise ValidationError("unknown_node", f"{node} is not in the graph")
    warnings: list[str] = []
    if source.time_offset < target.time_offset:
        temporal = True
    elif source.time_offset == target.time_offset and source != target:
        temporal = allow_same_period
        if allow_same_period:
            warnings.append(f"same-period edge {source} -> {target} allowed by caller")
    else:
        temporal = False

    augmented = TimeIndexedDag(dag.nodes, set(dag.edges) | {edge})
    acyclic = not any(v.kind == "cycle" for v in validate_dag(augmented).violations)

    return ChecklistReport(
        temporal_priority=temporal,
        acyclicity=acyclic,
        mechanism=bool(mechanism_declared),
        causal_elimination=bool(intervention_wellposed),
        warnings=tuple(warnings),
    )


# --- three-node taxonomy ------------------------------------------------------


class DagCase(Enum):
    A_FORK = "a_fork"
    B_CHAIN_VIA_MARKET = "b_chain_via_market"
    C_CHAIN_VIA_ASSET = "c_chain_via_asset"
    D_COLLIDER_AT_Z = "d_collider_at_Z"
    E_MARKET_CAUSES_ASSET = "e_market_causes_asset"
    F_ASSET_CAUSES_MARKET = "f_asset_causes_market"
    G_LATENT_CONFOUNDER = "g_latent_confounder"
    UNCLASSIFIED = "unclassified"


class BetaReading(Enum):
    PROXY = "proxy"
    CAUSAL_DIRECT = "causal_direct"
    BACKWARD_LOOKING = "backward_looking"
    UNBIASED_BUT_COLLIDER_RISK = "unbiased_but_collider_risk"
    LATENT_SHADOW = "latent_shadow"


@dataclass(frozen=True)
class DagClass:
    case_label: DagCase
    beta_reading: BetaReading | None
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "case_label": self.case_label.value,
            "beta_reading": self.beta_reading.value if self.beta_reading is not None else None,
            "warnings": list(self.warnings),
        }


# name-level edge pattern -> (case, slope reading); Z observed assumed,
# the latent variant of the fork is resolved separately below
_PATTERNS: dict[frozenset[tuple[str, str]], tuple[DagCase, BetaReading]] = {
    frozenset({("Z", "X"), ("Z", "Y")}): (DagCase.A_FORK, BetaReading.PROXY),
    frozenset({("Z", "X"), ("X", "Y")}): (DagCase.B_CHAIN_VIA_MARKET, BetaReading.CAUSAL_DIRECT),
    frozenset({("Z", "Y"), ("Y", "X")}): (DagCase.C_CHAIN_VIA_ASSET, BetaReading.BACKWARD_LOOKING),
    frozenset({("X", "Z"), ("Y", "Z")}): (DagCase.D_COLLIDER_AT_Z, BetaReading.UNBIASED_BUT_COLLIDER_RISK),
    frozenset({("X", "Y"), ("Z", "Y")}): (DagCase.E_MARKET_CAUSES_ASSET, BetaReading.CAUSAL_DIRECT),
    frozenset({("Y", "X"), ("Z", "X")}): (DagCase.F_ASSET_CAUSES_MARKET, BetaReading.BACKWARD_LOOKING),
}

_UNCLASSIFIED = DagClass(DagCase.UNCLASSIFIED, None, ())


def classify_dag(dag: TimeIndexedDag, latent_names: frozenset[str] | set[str] = frozenset()) -> DagClass:
    """Match a three-node {Z, X, Y} hypothesis against the slope taxonomy.

    Matching keys on the name-level edge pattern; absolute offsets are
    ignored except that every edge must point strictly forward in time (the
    taxonomy is about admissibly timed graphs).  A fork with Z declared in
    ``latent_names`` is the latent-confounder case: same topology, different
    reading.  Anything else, including mixed or same-period structures,
    returns the unclassified verdict rather than an error.
    """
    names = sorted(n.name for n in dag.nodes)
    if names != ["X", "Y", "Z"]:
        return _UNCLASSIFIED
    if any(s.time_offset >= t.time_offset for s, t in dag.edges):
        return _UNCLASSIFIED
    pattern = frozenset((s.name, t.name) for s, t in dag.edges)
    if pattern not in _PATTERNS:
        return _UNCLASSIFIED
    case, reading = _PATTERNS[pattern]
    if case is DagCase.A_FORK and "Z" in latent_names:
        return DagClass(DagCase.G_LATENT_CONFOUNDER, BetaReading.LATENT_SHADOW, ())
    warnings = (COLLIDER_WARNING,) if case is DagCase.D_COLLIDER_AT_Z else ()
    return DagClass(case, reading, warnings)
