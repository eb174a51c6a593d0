"""Brute-force semantics for the MSO layer on small finite structures.

Subformulas evaluate to boolean arrays whose axes are their unassigned
free variables (size n for a first-order axis, 2^n for a set axis), so
connectives are elementwise operations and quantifiers are any/all
reductions.  A quantifier whose body would exceed the cell budget falls
back to looping over the quantified variable's values.  The bounding
quantifier is constantly true here: a finite structure has only finitely
many subsets, so a bound always exists; the evaluator still reports the
largest satisfying set when asked.
"""

from __future__ import annotations

import numpy as np

from .mso import (
    Atom,
    BoundSet,
    Conj,
    Disj,
    ExistsFO,
    ExistsSet,
    ForallFO,
    ForallSet,
    Implies,
    In,
    MsoBool,
    MsoError,
    MsoFormula,
    Neg,
    Subset,
    VarEq,
)
from .structures import SigmaStructure

MAX_ELEMENTS = 12
CELL_LIMIT = 1 << 24
MEMO_CELL_LIMIT = 1 << 18


def _relation_map(structure: SigmaStructure, index: dict) -> dict:
    out: dict = {}
    for rel, tuples in structure.interpretation.items():
        out[rel.name] = [tuple(index[e] for e in t) for t in tuples]
    return out


def _free_vars(formula: MsoFormula, cache: dict):
    """(first-order names, set names) free in the subformula, cached by identity."""
    key = id(formula)
    if key in cache:
        return cache[key]
    if isinstance(formula, MsoBool):
        res = (frozenset(), frozenset())
    elif isinstance(formula, Atom):
        res = (frozenset(formula.args), frozenset())
    elif isinstance(formula, VarEq):
        res = (frozenset((formula.left, formula.right)), frozenset())
    elif isinstance(formula, In):
        res = (frozenset((formula.element,)), frozenset((formula.container,)))
    elif isinstance(formula, Subset):
        res = (frozenset(), frozenset((formula.left, formula.right)))
    elif isinstance(formula, Neg):
        res = _free_vars(formula.sub, cache)
    elif isinstance(formula, (Conj, Disj, Implies)):
        lf, ls = _free_vars(formula.left, cache)
        rf, rs = _free_vars(formula.right, cache)
        res = (lf | rf, ls | rs)
    elif isinstance(formula, (ExistsFO, ForallFO)):
        bf, bs = _free_vars(formula.body, cache)
        res = (bf - {formula.var}, bs)
    elif isinstance(formula, (ExistsSet, ForallSet, BoundSet)):
        bf, bs = _free_vars(formula.body, cache)
        res = (bf, bs - {formula.var})
    else:
        raise MsoError(f"unknown node {formula!r}")
    cache[key] = res
    return res


def _children(formula: MsoFormula):
    if isinstance(formula, Neg):
        return (formula.sub,)
    if isinstance(formula, (Conj, Disj, Implies)):
        return (formula.left, formula.right)
    if isinstance(formula, (ExistsFO, ForallFO, ExistsSet, ForallSet, BoundSet)):
        return (formula.body,)
    return ()


class _Evaluator:
    def __init__(self, structure: SigmaStructure, diagnostics):
        if len(structure.elements) > MAX_ELEMENTS:
            raise MsoError(
                f"structure has {len(structure.elements)} elements; the evaluator handles at most {MAX_ELEMENTS}"
            )
        self.n = len(structure.elements)
        self.nsets = 1 << self.n
        self.index = {e: i for i, e in enumerate(structure.elements)}
        self.relations = _relation_map(structure, self.index)
        self.diagnostics = diagnostics
        self.var_cache: dict = {}
        self.memo: dict = {}
        self.keep = []  # pins subformula ids used as memo keys
        masks = np.zeros((self.n, self.nsets), dtype=bool)
        for i in range(self.n):
            masks[i] = (np.arange(self.nsets) >> i) & 1
        self.member = masks
        sets = np.arange(self.nsets)
        self.subset = (sets[:, None] & ~sets[None, :]) == 0

    def axis_size(self, axis) -> int:
        return self.n if axis[0] == "fo" else self.nsets

    def cells(self, formula: MsoFormula, env: dict) -> int:
        fo, so = _free_vars(formula, self.var_cache)
        total = 1
        for v in fo:
            if v not in env:
                total *= self.n
        for v in so:
            if v not in env:
                total *= self.nsets
        return total

    def max_cells(self, formula: MsoFormula, env: dict) -> int:
        """Largest array, in cells, that evaluating the subformula under this
        environment can materialize.  Inner quantified variables become axes
        before they are reduced away, so the peak is taken over every
        descendant, not just the node itself."""
        best = self.cells(formula, env)
        for child in _children(formula):
            if best > CELL_LIMIT:
                break
            best = max(best, self.max_cells(child, env))
        return best

    def run(self, formula: MsoFormula, env: dict) -> bool:
        fo, so = _free_vars(formula, self.var_cache)
        missing = sorted((fo | so) - env.keys())
        if missing:
            raise MsoError(f"free variables without assignment: {missing}")
        arr, axes = self.eval(formula, env)
        assert axes == ()
        return bool(arr.item() if isinstance(arr, np.ndarray) else arr)

    # -- array plumbing

    def expand(self, arr, arr_axes, axes):
        if arr_axes == axes:
            return arr
        order = sorted(range(len(arr_axes)), key=lambda i: axes.index(arr_axes[i]))
        arr = np.transpose(arr, order)
        shape = tuple(self.axis_size(ax) if ax in arr_axes else 1 for ax in axes)
        return arr.reshape(shape)

    def combine(self, left, right, op):
        la, laxes = left
        ra, raxes = right
        axes = tuple(list(laxes) + [ax for ax in raxes if ax not in laxes])
        la = self.expand(la, laxes, axes)
        ra = self.expand(ra, raxes, axes)
        return op(la, ra), axes

    # -- evaluation

    def eval(self, formula: MsoFormula, env: dict):
        self.keep.append(formula)
        fo, so = _free_vars(formula, self.var_cache)
        relevant = tuple(sorted((v, env[v]) for v in (fo | so) if v in env))
        key = (id(formula), relevant)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        res = self._eval(formula, env)
        arr = res[0]
        if not isinstance(arr, np.ndarray) or arr.size <= MEMO_CELL_LIMIT:
            self.memo[key] = res  # caching big arrays per env value would hoard memory
        return res

    def _eval(self, formula: MsoFormula, env: dict):
        n = self.n
        if isinstance(formula, MsoBool):
            return np.bool_(formula.value), ()
        if isinstance(formula, Atom):
            tuples = self.relations.get(formula.relation, [])
            return self._table(tuples, formula.args, env)
        if isinstance(formula, VarEq):
            return self._table([(i, i) for i in range(n)], (formula.left, formula.right), env)
        if isinstance(formula, In):
            x, X = formula.element, formula.container
            if x in env and X in env:
                return np.bool_(bool((env[X] >> env[x]) & 1)), ()
            if X in env:
                s = env[X]
                return np.array([(s >> i) & 1 for i in range(n)], dtype=bool), (("fo", x),)
            if x in env:
                return self.member[env[x]], (("set", X),)
            return self.member, (("fo", x), ("set", X))
        if isinstance(formula, Subset):
            X, Y = formula.left, formula.right
            if X in env and Y in env:
                return np.bool_((env[X] & ~env[Y]) == 0), ()
            if X in env:
                return (env[X] & ~np.arange(self.nsets)) == 0, (("set", Y),)
            if Y in env:
                return (np.arange(self.nsets) & ~env[Y]) == 0, (("set", X),)
            if X == Y:
                return np.ones(self.nsets, dtype=bool), (("set", X),)
            return self.subset, (("set", X), ("set", Y))
        if isinstance(formula, Neg):
            arr, axes = self.eval(formula.sub, env)
            return ~arr, axes
        # A constant function may be represented with fewer axes than its
        # free variables, so a decisive left operand can stand for the whole
        # connective without touching the right subtree.
        if isinstance(formula, Conj):
            la, laxes = self.eval(formula.left, env)
            if not np.any(la):
                return la, laxes
            return self.combine((la, laxes), self.eval(formula.right, env), np.logical_and)
        if isinstance(formula, Disj):
            la, laxes = self.eval(formula.left, env)
            if np.all(la):
                return la, laxes
            return self.combine((la, laxes), self.eval(formula.right, env), np.logical_or)
        if isinstance(formula, Implies):
            la, laxes = self.eval(formula.left, env)
            if not np.any(la):
                return ~la, laxes
            return self.combine((~la, laxes), self.eval(formula.right, env), np.logical_or)
        if isinstance(formula, (ExistsFO, ForallFO, ExistsSet, ForallSet)):
            return self._quantifier(formula, env)
        if isinstance(formula, BoundSet):
            return self._bound(formula, env)
        raise MsoError(f"unknown node {formula!r}")

    def _table(self, tuples, args, env):
        axis_vars = []
        for a in args:
            if a not in env and ("fo", a) not in axis_vars:
                axis_vars.append(("fo", a))
        arr = np.zeros(tuple(self.n for _ in axis_vars), dtype=bool)
        for t in tuples:
            if len(t) != len(args):
                raise MsoError("atom arity does not match the relation")
            coord: dict = {}
            ok = True
            for value, a in zip(t, args):
                if a in env:
                    if env[a] != value:
                        ok = False
                        break
                else:
                    ax = ("fo", a)
                    if ax in coord and coord[ax] != value:
                        ok = False
                        break
                    coord[ax] = value
            if ok:
                arr[tuple(coord[ax] for ax in axis_vars)] = True
        return arr, tuple(axis_vars)

    def _quantifier(self, formula, env):
        over_sets = isinstance(formula, (ExistsSet, ForallSet))
        existential = isinstance(formula, (ExistsFO, ExistsSet))
        var = formula.var
        axis = ("set", var) if over_sets else ("fo", var)
        size = self.nsets if over_sets else self.n
        if self.max_cells(formula.body, env) <= CELL_LIMIT:
            arr, axes = self.eval(formula.body, env)
            if axis not in axes:
                return arr, axes
            k = axes.index(axis)
            reduced = arr.any(axis=k) if existential else arr.all(axis=k)
            return reduced, axes[:k] + axes[k + 1:]
        # body too large to vectorize: loop over the quantified values
        acc = None
        acc_axes = None
        inner = dict(env)
        for value in range(size):
            inner[var] = value
            arr, axes = self.eval(formula.body, inner)
            if acc is None:
                acc, acc_axes = arr.copy() if isinstance(arr, np.ndarray) else arr, axes
            else:
                combined, acc_axes = self.combine(
                    (acc, acc_axes), (arr, axes), np.logical_or if existential else np.logical_and
                )
                acc = combined
            if np.all(acc) if existential else not np.any(acc):
                break  # every cell decided, further values cannot change it
        return acc, acc_axes

    def _bound(self, formula, env):
        var = formula.var
        axis = ("set", var)
        if self.diagnostics is None:
            # Truth does not depend on the body here, so only a diagnostics
            # request justifies sweeping the subsets for the largest witness.
            fo, so = _free_vars(formula, self.var_cache)
            remaining = tuple(("fo", v) for v in sorted(fo) if v not in env)
            remaining += tuple(("set", v) for v in sorted(so) if v not in env)
            shape = tuple(self.axis_size(ax) for ax in remaining)
            return np.ones(shape, dtype=bool) if shape else np.bool_(True), remaining
        max_size = None
        if self.max_cells(formula.body, env) <= CELL_LIMIT:
            arr, axes = self.eval(formula.body, env)
            if axis in axes:
                k = axes.index(axis)
                other = tuple(i for i in range(arr.ndim) if i != k)
                witness = arr.any(axis=other) if other else arr
                sizes = [bin(s).count("1") for s in np.nonzero(witness)[0]]
                max_size = max(sizes) if sizes else None
            remaining = tuple(ax for ax in axes if ax != axis)
        else:
            inner = dict(env)
            remaining = None
            for value in range(self.nsets):
                inner[var] = value
                arr, axes = self.eval(formula.body, inner)
                if remaining is None:
                    remaining = axes
                if bool(np.any(arr)):
                    size = bin(value).count("1")
                    if max_size is None or size > max_size:
                        max_size = size
            if remaining is None:
                remaining = ()
        if self.diagnostics is not None:
            self.diagnostics.setdefault("bounded_sets", []).append({"var": var, "max_size": max_size})
        shape = tuple(self.axis_size(ax) for ax in remaining)
        return np.ones(shape, dtype=bool) if shape else np.bool_(True), remaining


def _convert_assignment(assignment, index, nsets) -> dict:
    env: dict = {}
    if not assignment:
        return env
    for var, value in assignment.items():
        if isinstance(value, str):
            if value not in index:
                raise MsoError(f"unknown element {value!r} in assignment")
            env[var] = index[value]
        else:
            mask = 0
            for e in value:
                if e not in index:
                    raise MsoError(f"unknown element {e!r} in assignment")
                mask |= 1 << index[e]
            env[var] = mask
    return env


def eval_finite(
    formula: MsoFormula,
    structure: SigmaStructure,
    assignment: dict | None = None,
    diagnostics: dict | None = None,
) -> bool:
    """Evaluate on a finite structure; first-order assignment values are
    element ids, set values are iterables of element ids."""
    ev = _Evaluator(structure, diagnostics)
    env = _convert_assignment(assignment, ev.index, ev.nsets)
    return ev.run(formula, env)


def eval_finite_slow(
    formula: MsoFormula, structure: SigmaStructure, assignment: dict | None = None
) -> bool:
    """Reference evaluator: plain recursion, no arrays, no sharing."""
    if len(structure.elements) > MAX_ELEMENTS:
        raise MsoError("structure too large")
    n = len(structure.elements)
    index = {e: i for i, e in enumerate(structure.elements)}
    relations = _relation_map(structure, index)
    env = _convert_assignment(assignment, index, 1 << n)

    def member(i, mask):
        return bool((mask >> i) & 1)

    def rec(f, env):
        if isinstance(f, MsoBool):
            return f.value
        if isinstance(f, Atom):
            try:
                point = tuple(env[a] for a in f.args)
            except KeyError as exc:
                raise MsoError(f"free variable without assignment: {exc.args[0]}")
            return point in set(relations.get(f.relation, []))
        if isinstance(f, VarEq):
            return env[f.left] == env[f.right]
        if isinstance(f, In):
            return member(env[f.element], env[f.container])
        if isinstance(f, Subset):
            return (env[f.left] & ~env[f.right]) == 0
        if isinstance(f, Neg):
            return not rec(f.sub, env)
        if isinstance(f, Conj):
            return rec(f.left, env) and rec(f.right, env)
        if isinstance(f, Disj):
            return rec(f.left, env) or rec(f.right, env)
        if isinstance(f, Implies):
            return (not rec(f.left, env)) or rec(f.right, env)
        if isinstance(f, ExistsFO):
            return any(rec(f.body, {**env, f.var: i}) for i in range(n))
        if isinstance(f, ForallFO):
            return all(rec(f.body, {**env, f.var: i}) for i in range(n))
        if isinstance(f, ExistsSet):
            return any(rec(f.body, {**env, f.var: s}) for s in range(1 << n))
        if isinstance(f, ForallSet):
            return all(rec(f.body, {**env, f.var: s}) for s in range(1 << n))
        if isinstance(f, BoundSet):
            return True
        raise MsoError(f"unknown node {f!r}")

    return rec(formula, env)
