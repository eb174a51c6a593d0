"""CTL* model checking with atomic constraints over finite graphs.

Constraints look ahead along a path, so paths are tracked through
windows: tuples of d+1 consecutive nodes, where d is the formula's
maximal register offset.  Infinite paths of the graph correspond exactly
to infinite window paths, constraints become ordinary propositions on
windows, and each existential subformula reduces to Buechi non-emptiness
of a tableau product with the window graph.  Truth of a state formula
depends only on a window's first component, which realizes the semantics
where a nested path quantifier ranges over all paths from the current
state rather than the committed future of the enclosing path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .domains import Z_DOMAIN
from .formulas import (
    And,
    BoolConst,
    Constraint,
    Exists,
    All,
    Formula,
    Next,
    Not,
    Or,
    Prop,
    Release,
    Until,
    constraints_of,
    is_state_formula,
    max_constraint_depth,
    negate,
    propositions_of,
    subformulas,
    to_nnf,
)
from .structures import ConstraintKripke

WINDOW_LIMIT = 50_000
MAX_TRACKED_PROPS = 14


class ModelCheckError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Window expansion


@dataclass
class WindowModel:
    base: ConstraintKripke
    depth: int
    windows: list  # tuples of d+1 nodes
    index: dict  # window -> position
    succ: list  # adjacency by position
    labels: list  # frozenset of propositions per window
    constraint_prop: dict  # Constraint -> derived proposition name


def expand_windows(model: ConstraintKripke, depth: int, constraints=(), dom=Z_DOMAIN) -> WindowModel:
    """All length-(depth+1) paths as nodes of a derived graph; labels
    carry the first component's propositions plus one derived proposition
    per atomic constraint, evaluated on the window's registers."""
    if model.is_tree:
        raise ModelCheckError("model checking runs on graph-shaped models")
    adjacency = {v: [] for v in model.nodes}
    for a, b in sorted(model.edges):
        adjacency[a].append(b)
    windows = [(v,) for v in model.nodes]
    for _ in range(depth):
        grown = []
        for w in windows:
            for s in adjacency[w[-1]]:
                grown.append(w + (s,))
                if len(grown) > WINDOW_LIMIT:
                    raise ModelCheckError(
                        f"window expansion exceeds {WINDOW_LIMIT} windows; reduce depth or model size"
                    )
        windows = grown
    index = {w: i for i, w in enumerate(windows)}
    succ = []
    for w in windows:
        succ.append([index[w[1:] + (s,)] for s in adjacency[w[-1]]])

    constraint_prop = {}
    for i, c in enumerate(constraints):
        constraint_prop[c] = f"__c{i}"
    labels = []
    for w in windows:
        props = set(model.label(w[0]))
        for c, prop in constraint_prop.items():
            values = tuple(model.gamma(w[off], var) for off, var in c.args)
            if dom.eval_relation(c.relation, values):
                props.add(prop)
        labels.append(frozenset(props))
    return WindowModel(model, depth, windows, index, succ, labels, constraint_prop)


# ---------------------------------------------------------------------------
# LTL tableau to generalized Buechi


@dataclass
class BuchiAutomaton:
    propositions: tuple  # tracked propositions
    alphabet: tuple  # all valuations as frozensets
    states: list  # (obligations, marks) pairs
    initial: tuple  # one-element tuple with the initial state
    transitions: dict  # (state, letter) -> tuple of successor states
    acceptance: tuple  # one frozenset of states per Until subformula
    untils: tuple

    def step(self, state, letter):
        return self.transitions.get((state, letter), ())


def _expand_obligations(obligations):
    """Branches of one tableau expansion step: each branch is a tuple
    (positive literals, negative literals, next obligations, fulfilled
    Until subformulas)."""
    branches = []
    seen = set()

    def go(todo, pos, neg, nexts, fulfilled):
        while todo:
            f = todo.pop()
            if isinstance(f, BoolConst):
                if not f.value:
                    return
                continue
            if isinstance(f, Prop):
                if f.name in neg:
                    return
                pos = pos | {f.name}
                continue
            if isinstance(f, Not):
                if not isinstance(f.sub, Prop):
                    raise ModelCheckError(f"tableau input not in negation normal form: {f}")
                if f.sub.name in pos:
                    return
                neg = neg | {f.sub.name}
                continue
            if isinstance(f, Next):
                nexts = nexts | {f.sub}
                continue
            if isinstance(f, And):
                todo = todo + [f.left, f.right]
                continue
            if isinstance(f, Or):
                go(todo + [f.left], pos, neg, nexts, fulfilled)
                go(todo + [f.right], pos, neg, nexts, fulfilled)
                return
            if isinstance(f, Until):
                go(todo + [f.right], pos, neg, nexts, fulfilled | {f})
                go(todo + [f.left], pos, neg, nexts | {f}, fulfilled)
                return
            if isinstance(f, Release):
                go(todo + [f.left, f.right], pos, neg, nexts, fulfilled)
                go(todo + [f.right], pos, neg, nexts | {f}, fulfilled)
                return
            raise ModelCheckError(f"unsupported node in tableau input: {f!r}")
        branch = (frozenset(pos), frozenset(neg), frozenset(nexts), frozenset(fulfilled))
        if branch not in seen:
            seen.add(branch)
            branches.append(branch)

    go(list(obligations), frozenset(), frozenset(), frozenset(), frozenset())
    return branches


def ltl_to_buchi(formula: Formula) -> BuchiAutomaton:
    """Tableau construction for proposition-only path formulas in NNF;
    one generalized acceptance set per Until subformula."""
    for sub in subformulas(formula):
        if isinstance(sub, (Constraint, Exists, All)):
            raise ModelCheckError("tableau input must be over propositions only")
        if isinstance(sub, Not) and not isinstance(sub.sub, Prop):
            raise ModelCheckError("tableau input must be in negation normal form")
    props = tuple(propositions_of(formula))
    if len(props) > MAX_TRACKED_PROPS:
        raise ModelCheckError(f"too many propositions for an explicit alphabet: {len(props)}")
    alphabet = []
    for mask in range(1 << len(props)):
        alphabet.append(frozenset(p for i, p in enumerate(props) if (mask >> i) & 1))
    untils = []
    for sub in subformulas(formula):
        if isinstance(sub, Until) and sub not in untils:
            untils.append(sub)

    initial = (frozenset([formula]), frozenset())
    states = [initial]
    known = {initial}
    transitions = {}
    expand_cache = {}
    todo = [initial]
    while todo:
        state = todo.pop()
        obligations = state[0]
        branches = expand_cache.get(obligations)
        if branches is None:
            branches = _expand_obligations(obligations)
            expand_cache[obligations] = branches
        for letter in alphabet:
            targets = []
            for pos, neg, nexts, fulfilled in branches:
                if pos <= letter and not (neg & letter):
                    target = (nexts, fulfilled)
                    if target not in targets:
                        targets.append(target)
            transitions[(state, letter)] = tuple(targets)
            for target in targets:
                if target not in known:
                    known.add(target)
                    states.append(target)
                    todo.append(target)
    acceptance = tuple(
        frozenset(s for s in states if u not in s[0] or u in s[1]) for u in untils
    )
    return BuchiAutomaton(props, tuple(alphabet), states, (initial,), transitions, acceptance, tuple(untils))


@lru_cache(maxsize=512)
def _buchi_cached(formula: Formula) -> BuchiAutomaton:
    return ltl_to_buchi(formula)


# ---------------------------------------------------------------------------
# Product emptiness


def _accepted_start_windows(wm: WindowModel, aut: BuchiAutomaton, letters) -> set:
    """Positions i such that some accepting run reads a window path
    starting at window i."""
    start = aut.initial[0]
    node_id = {}
    nodes = []
    adj = []

    def intern(q, wi):
        key = (q, wi)
        nid = node_id.get(key)
        if nid is None:
            nid = len(nodes)
            node_id[key] = nid
            nodes.append(key)
            adj.append(None)
        return nid

    roots = [intern(start, wi) for wi in range(len(wm.windows))]
    frontier = list(range(len(nodes)))
    while frontier:
        nid = frontier.pop()
        if adj[nid] is not None:
            continue
        q, wi = nodes[nid]
        out = []
        for target in aut.step(q, letters[wi]):
            for wj in wm.succ[wi]:
                tid = intern(target, wj)
                out.append(tid)
                if adj[tid] is None:
                    frontier.append(tid)
        adj[nid] = out

    # Tarjan, iterative; SCCs come out with successors first
    n = len(nodes)
    comp = [-1] * n
    low = [0] * n
    num = [0] * n
    on_stack = [False] * n
    visited = [False] * n
    stack = []
    counter = 0
    comp_count = 0
    comp_order: list = []

    for root in range(n):
        if visited[root]:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                visited[v] = True
                num[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(adj[v]):
                w = adj[v][pi]
                pi += 1
                if not visited[w]:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], num[w])
            if advanced:
                continue
            work.pop()
            if low[v] == num[v]:
                members = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = comp_count
                    members.append(w)
                    if w == v:
                        break
                comp_order.append(members)
                comp_count += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])

    acc_sets = aut.acceptance
    good = [False] * comp_count
    for ci, members in enumerate(comp_order):
        internal = False
        reaches_good = False
        for v in members:
            for w in adj[v]:
                if comp[w] == ci:
                    internal = True
                elif good[comp[w]]:
                    reaches_good = True
        accepting = internal
        if accepting:
            for acc in acc_sets:
                if not any(nodes[v][0] in acc for v in members):
                    accepting = False
                    break
        good[ci] = accepting or reaches_good

    return {wi for wi, nid in enumerate(roots) if good[comp[nid]]}


# ---------------------------------------------------------------------------
# CTL* checking


def _rewrite_path_formula(psi: Formula, wm: WindowModel, state_props: dict, sat_state):
    """Replace maximal state subformulas and constraints by propositions.

    state_props maps fresh proposition names to node sets and is extended
    in place; sat_state evaluates a state formula to its node set.
    """

    def go(f: Formula) -> Formula:
        if isinstance(f, BoolConst):
            return f
        if is_state_formula(f):
            key = ("state", f)
            name = state_props.get(key)
            if name is None:
                name = f"__s{len([k for k in state_props if k[0] == 'state'])}"
                state_props[key] = name
                state_props[("nodes", name)] = sat_state(f)
            return Prop(name)
        if isinstance(f, Constraint):
            return Prop(wm.constraint_prop[f])
        if isinstance(f, Not):
            if isinstance(f.sub, Constraint):
                return Not(Prop(wm.constraint_prop[f.sub]))
            raise ModelCheckError(f"unexpected negation in path formula: {f}")
        if isinstance(f, Next):
            return Next(go(f.sub))
        if isinstance(f, (And, Or, Until, Release)):
            return type(f)(go(f.left), go(f.right))
        raise ModelCheckError(f"unsupported formula node {f!r}")

    return go(psi)


def check_ctlstar(model: ConstraintKripke, formula: Formula, dom=Z_DOMAIN) -> frozenset:
    """Nodes satisfying the state formula; the formula is normalized to
    NNF first, so negated constraints are fine and never need witnesses."""
    if not is_state_formula(formula):
        raise ModelCheckError("model checking expects a state formula")
    formula = to_nnf(formula)
    depth = max_constraint_depth(formula)
    constraints = constraints_of(formula)
    wm = expand_windows(model, depth, constraints, dom)
    all_nodes = frozenset(model.nodes)
    memo: dict = {}

    def sat_state(f: Formula) -> frozenset:
        if f in memo:
            return memo[f]
        if isinstance(f, Prop):
            res = frozenset(v for v in model.nodes if f.name in model.label(v))
        elif isinstance(f, BoolConst):
            res = all_nodes if f.value else frozenset()
        elif isinstance(f, Not):
            res = all_nodes - sat_state(f.sub)
        elif isinstance(f, And):
            res = sat_state(f.left) & sat_state(f.right)
        elif isinstance(f, Or):
            res = sat_state(f.left) | sat_state(f.right)
        elif isinstance(f, Exists):
            res = _exists_nodes(f.sub)
        elif isinstance(f, All):
            res = all_nodes - _exists_nodes(negate(f.sub))
        else:
            raise ModelCheckError(f"not a state formula: {f}")
        memo[f] = res
        return res

    def _exists_nodes(psi: Formula) -> frozenset:
        state_props: dict = {}
        rewritten = _rewrite_path_formula(psi, wm, state_props, sat_state)
        tracked = tuple(propositions_of(rewritten))
        node_props = {
            name: state_props[("nodes", name)]
            for key, name in state_props.items()
            if key[0] == "state"
        }
        letters = []
        for wi, w in enumerate(wm.windows):
            letter = set()
            for p in tracked:
                if p in node_props:
                    if w[0] in node_props[p]:
                        letter.add(p)
                elif p in wm.labels[wi]:
                    letter.add(p)
            letters.append(frozenset(letter))
        aut = _buchi_cached(rewritten)
        accepted = _accepted_start_windows(wm, aut, letters)
        return frozenset(wm.windows[wi][0] for wi in accepted)

    return sat_state(formula)


# ---------------------------------------------------------------------------
# Independent CTL oracle: classical fixpoints on the window graph


def _is_ctl_arg(f: Formula) -> bool:
    if isinstance(f, Constraint):
        return True
    if isinstance(f, Not) and isinstance(f.sub, Constraint):
        return True
    return is_state_formula(f)


def check_ctl_oracle(model: ConstraintKripke, formula: Formula, dom=Z_DOMAIN) -> frozenset:
    """EX/EU/EG-style fixpoint evaluation for CTL-shaped formulas, kept
    free of the tableau machinery so the two checkers can disagree."""
    formula = to_nnf(formula)
    depth = max_constraint_depth(formula)
    constraints = constraints_of(formula)
    wm = expand_windows(model, depth, constraints, dom)
    nwin = len(wm.windows)
    all_windows = frozenset(range(nwin))
    all_nodes = frozenset(model.nodes)
    preds = [[] for _ in range(nwin)]
    for wi in range(nwin):
        for wj in wm.succ[wi]:
            preds[wj].append(wi)

    def pre_exists(S: frozenset) -> frozenset:
        return frozenset(wi for wi in range(nwin) if any(wj in S for wj in wm.succ[wi]))

    def project(S) -> frozenset:
        return frozenset(wm.windows[wi][0] for wi in S)

    def windows_of_nodes(nodes) -> frozenset:
        return frozenset(wi for wi in range(nwin) if wm.windows[wi][0] in nodes)

    def arg_windows(f: Formula) -> frozenset:
        if isinstance(f, Constraint):
            prop = wm.constraint_prop[f]
            return frozenset(wi for wi in range(nwin) if prop in wm.labels[wi])
        if isinstance(f, Not) and isinstance(f.sub, Constraint):
            return all_windows - arg_windows(f.sub)
        return windows_of_nodes(ctl(f))

    def e_until(a: frozenset, b: frozenset) -> frozenset:
        sat = set(b)
        frontier = list(b)
        while frontier:
            wj = frontier.pop()
            for wi in preds[wj]:
                if wi in a and wi not in sat:
                    sat.add(wi)
                    frontier.append(wi)
        return frozenset(sat)

    def e_release(a: frozenset, b: frozenset) -> frozenset:
        sat = set(b)
        while True:
            keep = {wi for wi in sat if wi in a or any(wj in sat for wj in wm.succ[wi])}
            if keep == sat:
                return frozenset(keep)
            sat = keep

    def ctl(f: Formula) -> frozenset:
        if isinstance(f, Prop):
            return frozenset(v for v in model.nodes if f.name in model.label(v))
        if isinstance(f, BoolConst):
            return all_nodes if f.value else frozenset()
        if isinstance(f, Not):
            return all_nodes - ctl(f.sub)
        if isinstance(f, And):
            return ctl(f.left) & ctl(f.right)
        if isinstance(f, Or):
            return ctl(f.left) | ctl(f.right)
        if isinstance(f, (Exists, All)):
            psi = f.sub
            universal = isinstance(f, All)
            if isinstance(psi, Next) and _is_ctl_arg(psi.sub):
                S = arg_windows(psi.sub)
                if universal:
                    return all_nodes - project(pre_exists(all_windows - S))
                return project(pre_exists(S))
            if isinstance(psi, Until) and _is_ctl_arg(psi.left) and _is_ctl_arg(psi.right):
                a, b = arg_windows(psi.left), arg_windows(psi.right)
                if universal:
                    return all_nodes - project(e_release(all_windows - a, all_windows - b))
                return project(e_until(a, b))
            if isinstance(psi, Release) and _is_ctl_arg(psi.left) and _is_ctl_arg(psi.right):
                a, b = arg_windows(psi.left), arg_windows(psi.right)
                if universal:
                    return all_nodes - project(e_until(all_windows - a, all_windows - b))
                return project(e_release(a, b))
            if _is_ctl_arg(psi):
                S = arg_windows(psi)
                if universal:
                    return all_nodes - project(all_windows - S)
                return project(S)
            raise ModelCheckError(f"not in the CTL fragment: {f}")
        raise ModelCheckError(f"not in the CTL fragment: {f}")

    if not is_state_formula(formula):
        raise ModelCheckError("model checking expects a state formula")
    return ctl(formula)
