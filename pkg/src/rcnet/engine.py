"""Probability-of-evidence queries by recursive conditioning.

A query walks the dtree: a leaf answers from its CPT (or 1 when its
variable is unobserved and unconditioned); an internal node sums, over
the instantiations of its not-yet-assigned cutset variables, the
product of its two subtree values, recording each instantiation around
the recursion.  Results at an internal node are cached per context
instantiation, so caching trades memory for repeated work; any subset
of caches may be enabled without affecting the returned probability.

With a knowledge base attached, every cutset instantiation is asserted
before recursing; a contradiction proves the branch carries zero
probability and it is skipped outright.  Only recorded assignments are
visible to leaf lookups; KB-implied values never are, which keeps the
unobserved-leaf sum-to-1 shortcut exact.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, field
from typing import Mapping

from .dtree import DtreeNode, DISABLED, LIVE, iter_nodes
from .kb import KnowledgeBase, Literal
from .model import Network, validate_evidence

LOG_ZERO = float("-inf")

# dense cache tables above this many cells switch to keyed storage
DENSE_CACHE_LIMIT = 1 << 20

__all__ = [
    "LOG_ZERO",
    "Recorder",
    "CachePolicy",
    "QueryResult",
    "apply_policy",
    "lookup",
    "rc_query",
    "brute_force_probability",
]


class Recorder:
    """Per-query assignment state consulted by leaf lookups and cache keys.

    Recording is strictly reversible: a variable holds at most one value,
    evidence is never overwritten, and unrecord restores 'unassigned'.
    """

    UNASSIGNED = -1

    def __init__(self, cards):
        n = len(cards)
        self.assign = [Recorder.UNASSIGNED] * n
        self.provenance: list[str | None] = [None] * n

    def record(self, var: int, state: int, provenance: str = "cutset") -> None:
        if self.assign[var] != Recorder.UNASSIGNED:
            raise RuntimeError(f"variable {var} is already recorded")
        self.assign[var] = state
        self.provenance[var] = provenance

    def unrecord(self, var: int) -> None:
        if self.provenance[var] == "evidence":
            raise RuntimeError(f"refusing to unrecord evidence on variable {var}")
        self.assign[var] = Recorder.UNASSIGNED
        self.provenance[var] = None

    def is_assigned(self, var: int) -> bool:
        return self.assign[var] != Recorder.UNASSIGNED


@dataclass(frozen=True)
class CachePolicy:
    """Which caches a query may fill: all live ones, none, or a cell budget."""

    mode: str  # "full" | "none" | "budget"
    max_cells: int | None = None

    @classmethod
    def full(cls) -> "CachePolicy":
        return cls("full")

    @classmethod
    def none(cls) -> "CachePolicy":
        return cls("none")

    @classmethod
    def budget(cls, max_cells: int) -> "CachePolicy":
        if max_cells < 0:
            raise ValueError("cache budget must be non-negative")
        return cls("budget", max_cells)

    @classmethod
    def parse(cls, text: str) -> "CachePolicy":
        if text == "full":
            return cls.full()
        if text == "none":
            return cls.none()
        if text.startswith("budget:"):
            return cls.budget(int(text.split(":", 1)[1]))
        raise ValueError(f"unknown cache policy {text!r} (use full, none, or budget:N)")


@dataclass
class QueryResult:
    probability: float
    rc_calls: int
    cache_hits: int
    cache_misses: int
    entries_written: int
    kb_enabled: bool = False
    kb_skips: int = 0
    kb_evidence_contradiction: bool = False
    log_domain: bool = False
    log_value: float | None = None  # natural log, kept exact in log-domain runs
    per_node_misses: dict[int, int] = field(default_factory=dict)

    @property
    def log10(self) -> float | None:
        if self.log_value is not None:
            return None if self.log_value == LOG_ZERO else self.log_value / math.log(10)
        if self.probability <= 0.0:
            return None
        return math.log10(self.probability)

    def to_json_dict(self) -> dict:
        return {
            "probability": self.probability,
            "log10": self.log10,
            "rc_calls": self.rc_calls,
            "cache": {
                "hits": self.cache_hits,
                "misses": self.cache_misses,
                "written": self.entries_written,
            },
            "kb": {"enabled": self.kb_enabled, "skips": self.kb_skips},
            "kb_evidence_contradiction": self.kb_evidence_contradiction,
        }


def apply_policy(root: DtreeNode, policy: CachePolicy) -> dict[int, str]:
    """Resolve per-node cache states for one query.

    Dead caches stay dead under every policy.  A budget enables live
    candidates in ascending cell-count order (ties by node id) while
    they fit.  The dtree itself is left untouched.
    """
    states = {node.id: node.cache_state for node in iter_nodes(root)}
    live = [node for node in iter_nodes(root) if states[node.id] == LIVE]
    if policy.mode == "full":
        return states
    if policy.mode == "none":
        for node in live:
            states[node.id] = DISABLED
        return states
    if policy.mode != "budget":
        raise ValueError(f"unknown cache policy mode {policy.mode!r}")
    allocated = 0
    for node in sorted(live, key=lambda t: (t.cells, t.id)):
        if allocated + node.cells <= policy.max_cells:
            allocated += node.cells
        else:
            states[node.id] = DISABLED
    return states


def lookup(network: Network, leaf: DtreeNode, recorder: Recorder,
           log_domain: bool = False) -> float:
    """Leaf value: Pr(x|u) when the leaf variable is assigned, else 1.

    All parents must be assigned whenever the variable is; anything
    else means the dtree does not cover the family and is malformed.
    """
    assign = recorder.assign
    x = assign[leaf.var]
    if x == Recorder.UNASSIGNED:
        return 0.0 if log_domain else 1.0
    cpt = network.cpts[leaf.var]
    parent_states = []
    for p in cpt.parents:
        s = assign[p]
        if s == Recorder.UNASSIGNED:
            raise RuntimeError(
                f"parent {network.variables[p].name!r} unassigned at leaf lookup "
                f"for {network.variables[leaf.var].name!r}; malformed dtree"
            )
        parent_states.append(s)
    p = cpt.prob(x, parent_states)
    if log_domain:
        return math.log(p) if p > 0.0 else LOG_ZERO
    return p


class _Counters:
    __slots__ = ("rc_calls", "hits", "misses", "written", "kb_skips")

    def __init__(self):
        self.rc_calls = 0
        self.hits = 0
        self.misses = 0
        self.written = 0
        self.kb_skips = 0


def _tree_height(root: DtreeNode) -> int:
    depth = {root.id: 1}
    best = 1
    for node in iter_nodes(root):
        d = depth[node.id]
        best = max(best, d)
        if not node.is_leaf:
            depth[node.left.id] = d + 1
            depth[node.right.id] = d + 1
    return best


def _log_sum(terms: list[float]) -> float:
    """Shifted exponent-sum of natural-log terms; empty or all-zero -> LOG_ZERO."""
    finite = [t for t in terms if t != LOG_ZERO]
    if not finite:
        return LOG_ZERO
    m = max(finite)
    return m + math.log(sum(math.exp(t - m) for t in finite))


def rc_query(
    network: Network,
    root: DtreeNode,
    evidence: Mapping[int, int],
    policy: CachePolicy | None = None,
    kb: KnowledgeBase | None = None,
    log_domain: bool = False,
) -> QueryResult:
    """Probability of the evidence under the dtree's decomposition.

    The dtree must be annotated (and normally dead-cache marked) for
    this network.  The cache policy defaults to full.  A supplied KB is
    used only to skip provably-zero cutset instantiations; it is
    restored to its entry state before returning.
    """
    validate_evidence(network, evidence)
    states = apply_policy(root, policy or CachePolicy.full())

    caches: dict[int, list | dict] = {}
    for node in iter_nodes(root):
        if states[node.id] == LIVE:
            if node.cells <= DENSE_CACHE_LIMIT:
                caches[node.id] = [None] * node.cells
            else:
                caches[node.id] = {}

    # context strides under the ascending-id, last-fastest convention
    ctx_strides: dict[int, list[tuple[int, int]]] = {}
    for node in iter_nodes(root):
        if node.id in caches:
            ordered = sorted(node.context)
            strides = []
            stride = 1
            for v in reversed(ordered):
                strides.append((v, stride))
                stride *= network.cards[v]
            ctx_strides[node.id] = strides

    recorder = Recorder(network.cards)
    for var, state in evidence.items():
        recorder.record(var, state, "evidence")

    counters = _Counters()
    per_node_misses: dict[int, int] = {}
    assign = recorder.assign
    provenance = recorder.provenance
    cards = network.cards
    cutset_order = {
        node.id: sorted(node.cutset) for node in iter_nodes(root) if not node.is_leaf
    }

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * _tree_height(root) + 100))

    def rc(t: DtreeNode) -> float:
        counters.rc_calls += 1
        if t.is_leaf:
            return lookup(network, t, recorder, log_domain)

        cache = caches.get(t.id)
        key = 0
        if cache is not None:
            for v, stride in ctx_strides[t.id]:
                key += assign[v] * stride
            value = cache[key] if isinstance(cache, list) else cache.get(key)
            if value is not None:
                counters.hits += 1
                return value
            counters.misses += 1
            per_node_misses[t.id] = per_node_misses.get(t.id, 0) + 1

        open_vars = [v for v in cutset_order[t.id] if assign[v] == Recorder.UNASSIGNED]
        terms: list[float] = []
        total = 0.0
        for combo in itertools.product(*(range(cards[v]) for v in open_vars)):
            for v, s in zip(open_vars, combo):
                assign[v] = s
                provenance[v] = "cutset"
            if kb is not None and open_vars:
                token = kb.checkpoint()
                ok = True
                for v, s in zip(open_vars, combo):
                    if not kb.assert_literal(Literal(v, s, True)):
                        ok = False
                        break
                if not ok:
                    kb.retract_to(token)
                    counters.kb_skips += 1
                    for v in open_vars:
                        assign[v] = Recorder.UNASSIGNED
                        provenance[v] = None
                    continue
            if log_domain:
                term = rc(t.left) + rc(t.right)
                if term != LOG_ZERO:
                    terms.append(term)
            else:
                total += rc(t.left) * rc(t.right)
            if kb is not None and open_vars:
                kb.retract_to(token)
            for v in open_vars:
                assign[v] = Recorder.UNASSIGNED
                provenance[v] = None
        value = _log_sum(terms) if log_domain else total

        if cache is not None:
            cache[key] = value
            counters.written += 1
        return value

    kb_token = kb.checkpoint() if kb is not None else None
    try:
        if kb is not None:
            for var, state in sorted(evidence.items()):
                if not kb.assert_literal(Literal(var, state, True)):
                    return QueryResult(
                        probability=0.0,
                        rc_calls=0,
                        cache_hits=0,
                        cache_misses=0,
                        entries_written=0,
                        kb_enabled=True,
                        kb_skips=0,
                        kb_evidence_contradiction=True,
                        log_domain=log_domain,
                        log_value=LOG_ZERO if log_domain else None,
                    )
        value = rc(root)
    finally:
        if kb_token is not None:
            kb.retract_to(kb_token)

    for var in range(network.n):
        expected = "evidence" if var in evidence else None
        if provenance[var] != expected:
            raise RuntimeError(f"recorder leaked an assignment on variable {var}")

    if log_domain:
        probability = 0.0 if value == LOG_ZERO else math.exp(value)
        log_value = value
    else:
        probability = value
        log_value = None
    return QueryResult(
        probability=probability,
        rc_calls=counters.rc_calls,
        cache_hits=counters.hits,
        cache_misses=counters.misses,
        entries_written=counters.written,
        kb_enabled=kb is not None,
        kb_skips=counters.kb_skips,
        log_domain=log_domain,
        log_value=log_value,
        per_node_misses=per_node_misses,
    )


def brute_force_probability(
    network: Network,
    evidence: Mapping[int, int],
    max_instantiations: int = 10**7,
) -> float:
    """Probability of evidence by complete enumeration (oracle)."""
    validate_evidence(network, evidence)
    if network.joint_size() > max_instantiations:
        raise ValueError(
            f"state space of {network.joint_size()} exceeds the enumeration "
            f"limit of {max_instantiations}"
        )
    free = [v for v in range(network.n) if v not in evidence]
    assign = [0] * network.n
    for var, state in evidence.items():
        assign[var] = state
    cpts = network.cpts
    total = 0.0
    for combo in itertools.product(*(range(network.cards[v]) for v in free)):
        for v, s in zip(free, combo):
            assign[v] = s
        p = 1.0
        for cpt in cpts:
            p *= cpt.prob(assign[cpt.child], [assign[q] for q in cpt.parents])
            if p == 0.0:
                break
        total += p
    return total
