"""Deciding whether a finite sigma-structure maps homomorphically into
the integer domain (or N, negZ, Q), with an explicit witness or a
machine-readable failure reason.

Pipeline for target Z: quotient by the equivalence closure of I(=),
reject constant clashes, pairwise-incompatible congruences, and cycles;
split the quotient into the bounded part B (between two constants), the
part G above B, the part S below B, and the rest R; solve B greedily
inside the constant window; build order-preserving potentials for the
free parts; glue with offsets that clear the window on both sides.  A
final verification pass re-checks every tuple, so a returned witness is
always sound.

On finite structures, acyclicity already bounds every strict-order path
by the element count, which is why no separate path-length condition
appears here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd, prod

from .domains import ConcreteDomain, DomainError, domain_by_name
from .formulas import CONSTANT, EQUAL, LESS, MODULO, RelationSymbol
from .structures import SigmaStructure

TARGET_DOMAINS = ("Z", "N", "negZ", "Q")


@dataclass(frozen=True)
class HomReason:
    kind: str
    details: dict

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind}
        for key in sorted(self.details):
            out[key] = _jsonable(self.details[key])
        return out


@dataclass(frozen=True)
class HomDecision:
    verdict: bool
    witness: dict | None
    reason: HomReason | None

    def to_json(self, element_order: list | None = None) -> str:
        witness = None
        if self.witness is not None:
            order = element_order if element_order is not None else sorted(self.witness)
            witness = {e: _jsonable(self.witness[e]) for e in order}
        payload = {
            "reason": self.reason.to_json_dict() if self.reason else None,
            "verdict": "yes" if self.verdict else "no",
            "witness": witness,
        }
        return json.dumps(payload, indent=2)


def _jsonable(value):
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, list):
        return [_jsonable(v) for v in value]
    return value


def _yes(witness: dict) -> HomDecision:
    return HomDecision(True, witness, None)


def _no(kind: str, **details) -> HomDecision:
    return HomDecision(False, None, HomReason(kind, details))


# ---------------------------------------------------------------------------
# Quotient under the equivalence closure of I(=)


@dataclass
class Quotient:
    classes: list  # list[list[element]], each in declaration order
    class_of: dict  # element -> class index
    edges: set  # lifted I(<) as (ci, cj)
    constants: list  # per class: sorted constant parameters
    modulos: list  # per class: sorted (a, b) pairs


def sim_closure(structure: SigmaStructure) -> dict:
    """Union-find roots for the equivalence closure of I(=)."""
    parent = {e: e for e in structure.elements}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    index = {e: i for i, e in enumerate(structure.elements)}
    for rel, tuples in structure.interpretation.items():
        if rel.kind != EQUAL:
            continue
        for a, b in tuples:
            ra, rb = find(a), find(b)
            if ra != rb:
                # keep the earliest-declared element as representative
                if index[ra] > index[rb]:
                    ra, rb = rb, ra
                parent[rb] = ra
    return {e: find(e) for e in structure.elements}


def build_quotient(structure: SigmaStructure) -> Quotient:
    roots = sim_closure(structure)
    order: list = []
    members: dict = {}
    for e in structure.elements:
        r = roots[e]
        if r not in members:
            members[r] = []
            order.append(r)
        members[r].append(e)
    class_of = {}
    classes = []
    for i, r in enumerate(order):
        classes.append(members[r])
        for e in members[r]:
            class_of[e] = i

    edges = set()
    constants = [set() for _ in classes]
    modulos = [set() for _ in classes]
    for rel, tuples in structure.interpretation.items():
        if rel.kind == LESS:
            for a, b in tuples:
                edges.add((class_of[a], class_of[b]))
        elif rel.kind == CONSTANT:
            for (a,) in tuples:
                constants[class_of[a]].add(rel.params[0])
        elif rel.kind == MODULO:
            for (a,) in tuples:
                modulos[class_of[a]].add(rel.params)
    return Quotient(
        classes,
        class_of,
        edges,
        [sorted(c, key=lambda v: (Fraction(v), str(v))) for c in constants],
        [sorted(ms) for ms in modulos],
    )


def check_cycle(quotient: Quotient):
    """A list of class indices forming a strict-order cycle, or None."""
    succs = {i: [] for i in range(len(quotient.classes))}
    for a, b in sorted(quotient.edges):
        succs[a].append(b)
    WHITE, GREY, BLACK = 0, 1, 2
    color = [WHITE] * len(quotient.classes)
    stack_path: list = []

    def dfs(v):
        color[v] = GREY
        stack_path.append(v)
        for w in succs[v]:
            if color[w] == GREY:
                return stack_path[stack_path.index(w):]
            if color[w] == WHITE:
                found = dfs(w)
                if found is not None:
                    return found
        stack_path.pop()
        color[v] = BLACK
        return None

    for v in range(len(quotient.classes)):
        if color[v] == WHITE:
            found = dfs(v)
            if found is not None:
                return list(found)
    return None


def crt_pair(a1: int, b1: int, a2: int, b2: int):
    """Least nonnegative x with x = a1 (mod b1) and x = a2 (mod b2), with
    the combined modulus; None when the pair is incompatible."""
    g = gcd(b1, b2)
    if (a2 - a1) % g != 0:
        return None
    lcm = b1 // g * b2
    step = b2 // g
    t = ((a2 - a1) // g * pow(b1 // g, -1, step)) % step if step > 1 else 0
    return ((a1 + b1 * t) % lcm, lcm)


def check_modulo_contradiction(quotient: Quotient):
    """First class whose congruences are pairwise incompatible."""
    for ci, ms in enumerate(quotient.modulos):
        for i in range(len(ms)):
            for j in range(i + 1, len(ms)):
                a1, b1 = ms[i]
                a2, b2 = ms[j]
                if (a2 - a1) % gcd(b1, b2) != 0:
                    return (ci, ms[i], ms[j])
    return None


def class_residue(quotient: Quotient, ci: int):
    """Fold the class congruences with CRT; None if incompatible."""
    value, modulus = 0, 1
    for a, b in quotient.modulos[ci]:
        merged = crt_pair(value, modulus, a, b)
        if merged is None:
            return None
        value, modulus = merged
    return value, modulus


# ---------------------------------------------------------------------------
# The bounded / greater / smaller / rest partition


def partition_bgsr(structure: SigmaStructure):
    """Split elements by reachability between constants along <, =, =^-1.

    Returns (B, G, S, R) as frozensets.  With no constants in the
    signature everything lands in R.
    """
    quotient = build_quotient(structure)
    n = len(quotient.classes)
    succs = {i: set() for i in range(n)}
    preds = {i: set() for i in range(n)}
    for a, b in quotient.edges:
        succs[a].add(b)
        preds[b].add(a)

    pinned = {i for i in range(n) if quotient.constants[i]}

    def reach(seed: set, step) -> set:
        seen = set(seed)
        todo = list(seed)
        while todo:
            v = todo.pop()
            for w in step[v]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return seen

    from_const = reach(pinned, succs)
    to_const = reach(pinned, preds)
    bounded = from_const & to_const
    greater = reach(bounded, succs) - bounded
    smaller = reach(bounded, preds) - bounded

    def expand(class_set) -> frozenset:
        out = []
        for ci in class_set:
            out.extend(quotient.classes[ci])
        return frozenset(out)

    rest = set(range(n)) - bounded - greater - smaller
    return expand(bounded), expand(greater), expand(smaller), expand(rest)


def restrict_structure(structure: SigmaStructure, keep) -> SigmaStructure:
    keep = set(keep)
    elements = [e for e in structure.elements if e in keep]
    interp = {}
    for rel, tuples in structure.interpretation.items():
        interp[rel] = [t for t in tuples if all(e in keep for e in t)]
    return SigmaStructure(elements, interp)


# ---------------------------------------------------------------------------
# Solving the bounded part inside the constant window


def _solve_bounded_quotient(quotient: Quotient, m: int, M: int):
    """Greedy minimal assignment in topological order; complete because
    every constraint (strict order below, congruence, pinned constant)
    is monotone: raising predecessors never helps a stuck class."""
    n = len(quotient.classes)
    for ci in range(n):
        if len(quotient.constants[ci]) > 1:
            return ("constant_clash", ci)
    indeg = {i: 0 for i in range(n)}
    succs = {i: [] for i in range(n)}
    for a, b in sorted(quotient.edges):
        succs[a].append(b)
        indeg[b] += 1
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    topo = []
    while ready:
        v = ready.pop(0)
        topo.append(v)
        for w in succs[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
                ready.sort()
    if len(topo) != n:
        return ("cycle", None)

    values: dict = {}
    preds = {i: [] for i in range(n)}
    for a, b in quotient.edges:
        preds[b].append(a)
    for ci in topo:
        lower = m
        for p in preds[ci]:
            lower = max(lower, values[p] + 1)
        residue = class_residue(quotient, ci)
        if residue is None:
            return ("modulo_contradiction", ci)

        def fits(v: int) -> bool:
            return v % residue[1] == residue[0] % residue[1]

        if quotient.constants[ci]:
            c = quotient.constants[ci][0]
            if not isinstance(c, int) or c < lower or c > M or not fits(c):
                return ("bounded_infeasible", ci)
            values[ci] = c
        else:
            v = lower
            while v <= M and not fits(v):
                v += 1
            if v > M:
                return ("bounded_infeasible", ci)
            values[ci] = v
    return ("ok", values)


def solve_bounded(structure: SigmaStructure, window: tuple):
    """Assign every element of the (assumed bounded) structure a value in
    [window[0], window[1]]; returns a value map or a HomReason."""
    m, M = window
    quotient = build_quotient(structure)
    status, payload = _solve_bounded_quotient(quotient, m, M)
    if status != "ok":
        rep = quotient.classes[payload][0] if payload is not None else None
        if status == "cycle":
            return HomReason("cycle", {"elements": []})
        if status == "constant_clash":
            return HomReason("constant_clash", {"element": rep, "constants": quotient.constants[payload][:2]})
        if status == "modulo_contradiction":
            return HomReason("modulo_contradiction", {"element": rep})
        return HomReason("bounded_infeasible", {"element": rep})
    return {e: payload[quotient.class_of[e]] for e in structure.elements}


# ---------------------------------------------------------------------------
# Free parts: order potentials scaled to respect congruences


def _synthesize_free(structure: SigmaStructure, mode: str, delta: int) -> dict:
    """Homomorphism for a constant-free structure known to be acyclic.

    The potential g is the longest strict-order path ending at a class
    (for Z and N) or the negated longest path starting from it (negZ, so
    values stay below zero); h = delta * g + least CRT residue.
    """
    quotient = build_quotient(structure)
    n = len(quotient.classes)
    succs = {i: [] for i in range(n)}
    preds = {i: [] for i in range(n)}
    indeg = {i: 0 for i in range(n)}
    for a, b in sorted(quotient.edges):
        succs[a].append(b)
        preds[b].append(a)
        indeg[b] += 1
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    topo = []
    while ready:
        v = ready.pop(0)
        topo.append(v)
        for w in succs[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
                ready.sort()
    if len(topo) != n:
        raise DomainError("synthesis requires an acyclic quotient")

    g = {}
    if mode in ("Z", "N"):
        for v in topo:
            g[v] = max((g[p] + 1 for p in preds[v]), default=0)
    elif mode == "negZ":
        # negated longest outgoing path keeps every value at or below -1
        for v in reversed(topo):
            g[v] = -(max((-g[s] for s in succs[v]), default=0) + 1)
    else:
        raise DomainError(f"unknown synthesis mode {mode!r}")

    values = {}
    for ci in range(n):
        residue = class_residue(quotient, ci)
        if residue is None:
            raise DomainError("synthesis requires pairwise-compatible congruences")
        m_c = residue[0] % residue[1]
        values[ci] = delta * g[ci] + m_c
    return {e: values[quotient.class_of[e]] for e in structure.elements}


# ---------------------------------------------------------------------------
# Verification and the main decisions


def _signature_check(structure: SigmaStructure, target: str) -> None:
    for rel in structure.interpretation:
        if rel.kind == LESS or rel.kind == EQUAL:
            continue
        if rel.kind == CONSTANT:
            c = rel.params[0]
            if target == "Z" and isinstance(c, int):
                continue
            if target == "Q" and isinstance(c, (int, Fraction)):
                continue
            raise DomainError(f"target {target} does not accept {rel.name}")
        if rel.kind == MODULO and target in ("Z", "N", "negZ"):
            continue
        raise DomainError(f"target {target} does not accept {rel.name}")


def verify_hom(structure: SigmaStructure, h: dict, target: str, explain: bool = False):
    """Check h element-wise and tuple-wise against the target domain."""
    dom = domain_by_name(target)
    for e in structure.elements:
        if e not in h:
            return (False, ("missing", e)) if explain else False
        if not dom.check_value(h[e]):
            return (False, ("value", e)) if explain else False
    for rel, tuples in structure.interpretation.items():
        for t in tuples:
            if not dom.eval_relation(rel, tuple(h[e] for e in t)):
                return (False, (rel.name, t)) if explain else False
    return (True, None) if explain else True


def witness_bound(structure: SigmaStructure) -> int:
    """Magnitude bound delta * (n + |m| + |M| + 3) that a synthesized
    witness never exceeds; also the sweep radius for the brute-force
    oracle to be a complete refutation."""
    moduli = structure.moduli()
    delta = prod(moduli) if moduli else 1
    consts = structure.constants()
    m = min(0, floor(min(consts))) if consts else 0
    M = max(0, ceil(max(consts))) if consts else 0
    return delta * (len(structure.elements) + abs(m) + abs(M) + 3)


def decide_hom(structure: SigmaStructure, target: str = "Z") -> HomDecision:
    """Decide mappability into the target and produce witness or reason."""
    if target not in TARGET_DOMAINS:
        raise DomainError(f"unknown target {target!r}")
    _signature_check(structure, target)
    if target == "Q":
        return _decide_hom_q(structure)
    if target in ("N", "negZ"):
        return _decide_hom_free(structure, target)
    return _decide_hom_z(structure)


def _reason_constant_clash(quotient: Quotient, ci: int) -> HomDecision:
    return _no(
        "constant_clash",
        element=quotient.classes[ci][0],
        constants=quotient.constants[ci][:2],
    )


def _reason_cycle(quotient: Quotient, cycle: list) -> HomDecision:
    return _no("cycle", elements=[quotient.classes[ci][0] for ci in cycle])


def _decide_hom_free(structure: SigmaStructure, target: str) -> HomDecision:
    quotient = build_quotient(structure)
    clash = check_modulo_contradiction(quotient)
    if clash is not None:
        ci, first, second = clash
        return _no("modulo_contradiction", element=quotient.classes[ci][0], first=first, second=second)
    cycle = check_cycle(quotient)
    if cycle is not None:
        return _reason_cycle(quotient, cycle)
    delta = prod(structure.moduli()) if structure.moduli() else 1
    h = _synthesize_free(structure, target, delta)
    assert verify_hom(structure, h, target), "internal: synthesized witness failed verification"
    return _yes(h)


def _decide_hom_z(structure: SigmaStructure) -> HomDecision:
    quotient = build_quotient(structure)
    for ci in range(len(quotient.classes)):
        if len(quotient.constants[ci]) > 1:
            return _reason_constant_clash(quotient, ci)
    clash = check_modulo_contradiction(quotient)
    if clash is not None:
        ci, first, second = clash
        return _no("modulo_contradiction", element=quotient.classes[ci][0], first=first, second=second)
    cycle = check_cycle(quotient)
    if cycle is not None:
        return _reason_cycle(quotient, cycle)

    constants = structure.constants()
    moduli = structure.moduli()
    delta = prod(moduli) if moduli else 1
    m = min([0] + [c for c in constants])
    M = max([0] + [c for c in constants])

    bounded, greater, smaller, rest = partition_bgsr(structure)

    h: dict = {}
    if bounded:
        sub = restrict_structure(structure, bounded)
        solved = solve_bounded(sub, (m, M))
        if isinstance(solved, HomReason):
            return HomDecision(False, None, solved)
        h.update(solved)

    free_part = greater | smaller | rest
    if free_part:
        sub = restrict_structure(structure, free_part)
        h_r = _synthesize_free(sub, "Z", delta)
        h_g = _synthesize_free(restrict_structure(structure, greater), "N", delta) if greater else {}
        h_s = _synthesize_free(restrict_structure(structure, smaller), "negZ", delta) if smaller else {}
        shift_up = delta * (M + 1)
        shift_down = delta * (m - 1)
        for e in rest:
            h[e] = h_r[e]
        for e in greater:
            h[e] = max(h_r[e], h_g[e]) + shift_up
        for e in smaller:
            h[e] = min(h_r[e], h_s[e]) + shift_down

    assert verify_hom(structure, h, "Z"), "internal: glued witness failed verification"
    return _yes({e: h[e] for e in structure.elements})


def _decide_hom_q(structure: SigmaStructure) -> HomDecision:
    quotient = build_quotient(structure)
    for ci in range(len(quotient.classes)):
        if len(quotient.constants[ci]) > 1:
            return _reason_constant_clash(quotient, ci)
    cycle = check_cycle(quotient)
    if cycle is not None:
        return _reason_cycle(quotient, cycle)

    n = len(quotient.classes)
    succs = {i: set() for i in range(n)}
    for a, b in quotient.edges:
        succs[a].add(b)

    def downstream(start: int) -> set:
        seen = set()
        todo = list(succs[start])
        while todo:
            v = todo.pop()
            if v not in seen:
                seen.add(v)
                todo.extend(succs[v])
        return seen

    pinned = {i: quotient.constants[i][0] for i in range(n) if quotient.constants[i]}
    down = {i: downstream(i) for i in range(n)}
    for a in sorted(pinned):
        for b in sorted(down[a] & pinned.keys()):
            if Fraction(pinned[b]) <= Fraction(pinned[a]):
                return _no(
                    "order_constant_conflict",
                    lower=quotient.classes[a][0],
                    upper=quotient.classes[b][0],
                    lower_constant=pinned[a],
                    upper_constant=pinned[b],
                )

    # assign in topological order: pinned classes take their constant,
    # others the midpoint of known neighbors (density of Q)
    indeg = {i: 0 for i in range(n)}
    for a, b in quotient.edges:
        indeg[b] += 1
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    topo = []
    while ready:
        v = ready.pop(0)
        topo.append(v)
        for w in sorted(succs[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
                ready.sort()

    preds = {i: [] for i in range(n)}
    for a, b in quotient.edges:
        preds[b].append(a)
    upper_pin = {}
    for ci in range(n):
        candidates = [Fraction(pinned[p]) for p in down[ci] if p in pinned]
        upper_pin[ci] = min(candidates) if candidates else None

    values: dict = {}
    for ci in topo:
        if ci in pinned:
            values[ci] = Fraction(pinned[ci])
            continue
        lower = max((values[p] for p in preds[ci]), default=None)
        upper = upper_pin[ci]
        if lower is None and upper is None:
            values[ci] = Fraction(0)
        elif lower is None:
            values[ci] = upper - 1
        elif upper is None:
            values[ci] = lower + 1
        else:
            values[ci] = (lower + upper) / 2
    h = {e: values[quotient.class_of[e]] for e in structure.elements}
    assert verify_hom(structure, h, "Q"), "internal: rational witness failed verification"
    return _yes(h)


# ---------------------------------------------------------------------------
# Independent brute-force oracle


def brute_force_hom(structure: SigmaStructure, bound: int, target: str = "Z"):
    """First verifying map (lexicographic in declaration order, values
    ascending) with values in [-bound, bound], or None.

    Chronological backtracking over equality classes with unary filters
    and difference-bound tightening; the pruning removes only values that
    extend to no complete map, so the enumeration order is preserved.
    """
    _signature_check(structure, target)
    elements = structure.elements
    n = len(elements)
    if n == 0:
        return {}

    # local union-find over I(=); deliberately separate from the pipeline
    parent = list(range(n))
    index = {e: i for i, e in enumerate(elements)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    lt_pairs = []
    const_of: dict = {}
    mods_of: dict = {}
    for rel, tuples in structure.interpretation.items():
        if rel.kind == EQUAL:
            for a, b in tuples:
                ra, rb = find(index[a]), find(index[b])
                if ra != rb:
                    if ra > rb:
                        ra, rb = rb, ra
                    parent[rb] = ra
        elif rel.kind == LESS:
            for a, b in tuples:
                lt_pairs.append((index[a], index[b]))
        elif rel.kind == CONSTANT:
            for (a,) in tuples:
                const_of.setdefault(index[a], set()).add(rel.params[0])
        elif rel.kind == MODULO:
            for (a,) in tuples:
                mods_of.setdefault(index[a], set()).add(rel.params)

    roots = [find(i) for i in range(n)]
    class_order: list = []
    class_idx: dict = {}
    for i in range(n):
        r = roots[i]
        if r not in class_idx:
            class_idx[r] = len(class_order)
            class_order.append(r)
    cls = [class_idx[roots[i]] for i in range(n)]
    k = len(class_order)

    edges = set()
    for a, b in lt_pairs:
        edges.add((cls[a], cls[b]))
    consts = [set() for _ in range(k)]
    mods = [set() for _ in range(k)]
    for i, cs in const_of.items():
        consts[cls[i]] |= cs
    for i, ms in mods_of.items():
        mods[cls[i]] |= ms

    if target == "Q":
        return _brute_force_q(structure, bound, cls, k, edges, consts)

    if target == "Z":
        lo, hi = -bound, bound
    elif target == "N":
        lo, hi = 0, bound
    else:
        lo, hi = -bound, -1
    if lo > hi:
        return None

    lower = [lo] * k
    upper = [hi] * k
    for ci in range(k):
        if len(consts[ci]) > 1:
            return None
        if consts[ci]:
            c = next(iter(consts[ci]))
            if not isinstance(c, int):
                return None
            lower[ci] = max(lower[ci], c)
            upper[ci] = min(upper[ci], c)

    # difference-bound tightening to fixpoint; a cycle drives bounds apart
    for _ in range(k + 1):
        changed = False
        for a, b in edges:
            if a == b:
                return None
            if lower[a] + 1 > lower[b]:
                lower[b] = lower[a] + 1
                changed = True
            if upper[b] - 1 < upper[a]:
                upper[a] = upper[b] - 1
                changed = True
        if any(lower[ci] > upper[ci] for ci in range(k)):
            return None
        if not changed:
            break
    else:
        # still tightening after k full passes: strict-order cycle
        return None

    candidates = []
    for ci in range(k):
        vals = [v for v in range(lower[ci], upper[ci] + 1) if all(v % b == a for a, b in mods[ci])]
        if not vals:
            return None
        candidates.append(vals)

    # classes are assigned in index order, so each class only needs its
    # order constraints against earlier classes
    checks = [[] for _ in range(k)]
    for a, b in edges:
        if a < b:
            checks[b].append((a, True))  # h[a] < h[current]
        elif a > b:
            checks[a].append((b, False))  # h[current] < h[b]

    assignment = [None] * k

    def backtrack(ci: int):
        if ci == k:
            return list(assignment)
        for v in candidates[ci]:
            ok = True
            for other, from_earlier in checks[ci]:
                if from_earlier:
                    if not assignment[other] < v:
                        ok = False
                        break
                else:
                    if not v < assignment[other]:
                        ok = False
                        break
            if ok:
                assignment[ci] = v
                result = backtrack(ci + 1)
                if result is not None:
                    return result
                assignment[ci] = None
        return None

    solution = backtrack(0)
    if solution is None:
        return None
    return {e: solution[cls[index[e]]] for e in elements}


def _brute_force_q(structure: SigmaStructure, bound: int, cls, k, edges, consts):
    n = len(structure.elements)
    grid = sorted(
        {Fraction(p, q) for q in range(1, n + 2) for p in range(-bound * q, bound * q + 1)}
    )
    for a, b in edges:
        if a == b:
            return None
    candidates = []
    for ci in range(k):
        if len(consts[ci]) > 1:
            return None
        if consts[ci]:
            c = Fraction(next(iter(consts[ci])))
            if c < -bound or c > bound:
                return None
            candidates.append([c])
        else:
            candidates.append(grid)
    checks = [[] for _ in range(k)]
    for a, b in edges:
        if a < b:
            checks[b].append((a, True))
        else:
            checks[a].append((b, False))

    assignment = [None] * k

    def backtrack(ci: int):
        if ci == k:
            return list(assignment)
        for v in candidates[ci]:
            ok = True
            for other, from_earlier in checks[ci]:
                if from_earlier:
                    if not assignment[other] < v:
                        ok = False
                        break
                else:
                    if not v < assignment[other]:
                        ok = False
                        break
            if ok:
                assignment[ci] = v
                result = backtrack(ci + 1)
                if result is not None:
                    return result
                assignment[ci] = None
        return None

    solution = backtrack(0)
    if solution is None:
        return None
    index = {e: i for i, e in enumerate(structure.elements)}
    return {e: solution[cls[index[e]]] for e in structure.elements}
