"""Tour of the three-node slope taxonomy and the index-aggregator check.

Each candidate structure over a driver Z, a market proxy X and an asset Y is
classified, and the reading of the regression slope "beta of Y on X" changes
with the structure even though the regression itself never does.  The second
half checks whether a same-period market claim survives substitution when
the market is itself a weighted average that includes the asset.

Run:  python3 demos/graph_taxonomy.py
"""

import logging

from causalbeta.graphs import (
    AggregatorSpec,
    check_aggregator_contradiction,
    classify_dag,
    necessary_conditions_checklist,
)
from causalbeta.scm import NodeRef, TimeIndexedDag

log = logging.getLogger("graph_taxonomy")

Z0, X1, Y1, Y2, X2 = (
    NodeRef("Z", 0),
    NodeRef("X", 1),
    NodeRef("Y", 1),
    NodeRef("Y", 2),
    NodeRef("X", 2),
)

STRUCTURES = (
    ("common driver (fork)", TimeIndexedDag([Z0, X1, Y1], [(Z0, X1), (Z0, Y1)]), frozenset()),
    ("driver -> market -> asset", TimeIndexedDag([Z0, X1, Y2], [(Z0, X1), (X1, Y2)]), frozenset()),
    ("driver -> asset -> market", TimeIndexedDag([Z0, Y1, X2], [(Z0, Y1), (Y1, X2)]), frozenset()),
    ("market and asset -> driver (collider)", TimeIndexedDag([X1, Y1, NodeRef("Z", 2)], [(X1, NodeRef("Z", 2)), (Y1, NodeRef("Z", 2))]), frozenset()),
    ("market -> asset direct (driver too)", TimeIndexedDag([Z0, X1, Y2], [(X1, Y2), (Z0, Y2)]), frozenset()),
    ("asset -> market direct (driver too)", TimeIndexedDag([Z0, Y1, X2], [(Y1, X2), (Z0, X2)]), frozenset()),
    ("unobserved common driver", TimeIndexedDag([Z0, X1, Y1], [(Z0, X1), (Z0, Y1)]), frozenset({"Z"})),
)


def show_taxonomy() -> None:
    log.info("%-40s  %-22s  %s", "structure", "case", "slope reading")
    for label, dag, latents in STRUCTURES:
        verdict = classify_dag(dag, latent_names=latents)
        reading = verdict.beta_reading.value if verdict.beta_reading is not None else "-"
        log.info("%-40s  %-22s  %s", label, verdict.case_label.value, reading)
        for warning in verdict.warnings:
            log.info("%-40s  note: %s", "", warning)


def show_checklist() -> None:
    # the claim under scrutiny: same-period X -> Y inside a fork
    fork = TimeIndexedDag([Z0, X1, Y1], [(Z0, X1), (Z0, Y1)])
    report = necessary_conditions_checklist(
        fork, (X1, Y1), mechanism_declared=True, intervention_wellposed=True
    )
    log.info("")
    log.info("necessary conditions for adding a same-period X@1 -> Y@1 edge to the fork:")
    for key, value in report.to_dict().items():
        log.info("  %-20s %s", key, value)


def show_aggregator() -> None:
    log.info("")
    log.info("same-period 'asset follows its own index' claims under substitution:")
    cases = (
        ("asset holds 30%% of the index", {"A": 0.3, "B": 0.5, "C": 0.2}, "A", 1.0),
        ("asset not in the index", {"A": 0.0, "B": 0.6, "C": 0.4}, "A", 1.0),
        ("index IS the asset", {"A": 1.0}, "A", 1.0),
        ("no claim at all (beta = 0)", {"A": 0.3, "B": 0.7}, "A", 0.0),
    )
    for label, weights, target, beta in cases:
        spec = AggregatorSpec(constituents=sorted(weights), weights=weights, target_asset=target)
        verdict = check_aggregator_contradiction(spec, beta=beta)
        rationale = verdict.rationale.value if verdict.rationale is not None else "-"
        log.info("  %-34s -> %-13s (%s)", label % (), verdict.status.value, rationale)


def main() -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    show_taxonomy()
    show_checklist()
    show_aggregator()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
