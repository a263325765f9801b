"""Shared fixture builders for the test suite."""

from __future__ import annotations

import json

from rcnet import Network, parse_network

# Ternary-gate fixture: binary A and B feed a ternary C whose table mixes
# hard 0/1 rows with soft rows.  Flat table rows (A,B varying, B fastest):
#   A=1,B=1: [1, 0, 0]     A=1,B=2: [0, 1, 0]
#   A=2,B=1: [.2, .8, 0]   A=2,B=2: [.7, .3, 0]
GATE_TABLE = [1, 0, 0, 0, 1, 0, 0.2, 0.8, 0, 0.7, 0.3, 0]


def gate_doc() -> dict:
    return {
        "variables": [
            {"name": "A", "states": ["1", "2"]},
            {"name": "B", "states": ["1", "2"]},
            {"name": "C", "states": ["1", "2", "3"]},
        ],
        "cpts": [
            {"child": "A", "parents": [], "kind": "table", "table": [0.6, 0.4]},
            {"child": "B", "parents": [], "kind": "table", "table": [0.5, 0.5]},
            {"child": "C", "parents": ["A", "B"], "kind": "table", "table": GATE_TABLE},
        ],
    }


def gate_network() -> Network:
    return parse_network(json.dumps(gate_doc()))


def chain_doc() -> dict:
    """Binary chain A -> B -> C with strictly positive tables."""
    return {
        "variables": [
            {"name": "A", "states": ["0", "1"]},
            {"name": "B", "states": ["0", "1"]},
            {"name": "C", "states": ["0", "1"]},
        ],
        "cpts": [
            {"child": "A", "parents": [], "kind": "table", "table": [0.6, 0.4]},
            {"child": "B", "parents": ["A"], "kind": "table",
             "table": [0.7, 0.3, 0.2, 0.8]},
            {"child": "C", "parents": ["B"], "kind": "table",
             "table": [0.9, 0.1, 0.4, 0.6]},
        ],
    }


def chain_network() -> Network:
    return parse_network(json.dumps(chain_doc()))


def star_doc(n: int, kind: str = "noisy_or", parent_card: int = 3) -> dict:
    """X1..Xn all parents of a binary Y; Y noisy-or (or tabular for tiny n)."""
    states = [str(i) for i in range(parent_card)]
    variables = [{"name": f"X{i}", "states": states} for i in range(1, n + 1)]
    variables.append({"name": "Y", "states": ["f", "t"]})
    prior = [round(1.0 / parent_card, 12)] * (parent_card - 1)
    prior.append(1.0 - sum(prior))
    cpts = [
        {"child": f"X{i}", "parents": [], "kind": "table", "table": list(prior)}
        for i in range(1, n + 1)
    ]
    parents = [f"X{i}" for i in range(1, n + 1)]
    if kind == "noisy_or":
        cpts.append(
            {
                "child": "Y",
                "parents": parents,
                "kind": "noisy_or",
                "trigger": [states[-1]] * n,
                "inhibitor": [0.4] * n,
                "leak": 0.1,
            }
        )
    else:
        rows = parent_card ** n
        table = []
        for _ in range(rows):
            table.extend([0.25, 0.75])
        cpts.append({"child": "Y", "parents": parents, "kind": "table", "table": table})
    return {"variables": variables, "cpts": cpts}


def star_network(n: int, **kwargs) -> Network:
    return parse_network(json.dumps(star_doc(n, **kwargs)))


def right_linear_shape(n: int):
    """Spine X1, X2, ..., Xn with the Y-family leaf at the bottom."""
    shape: object = "Y"
    for i in range(n, 0, -1):
        shape = [f"X{i}", shape]
    return shape
