"""Register-labeled Kripke structures, sigma-structures, and file formats.

A ConstraintKripke is a total directed graph (or a finite tree, nodes
being words over 1..d) whose nodes carry proposition labels and one
register value per constraint variable.  A SigmaStructure is a plain
relational structure over a declared signature; it is what the
homomorphism checker consumes.

Tree nodes are spelled as digit words ("1", "12", ...) with the root as
the empty word, written `eps` in files; branching degree is capped at 9
so the word notation stays unambiguous.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .domains import ConcreteDomain
from .formulas import (
    CONSTANT,
    MODULO,
    AbstractionTable,
    FormulaError,
    RelationSymbol,
    RESERVED_PREFIX,
    relation_from_name,
)


class StructureError(ValueError):
    """Malformed structure or model data."""


GRAPH_SHAPE = ("graph",)


def tree_shape(d: int, k: int) -> tuple:
    return ("tree", d, k)


@dataclass
class ConstraintKripke:
    nodes: list
    edges: set  # set[tuple[node, node]]
    labels: dict  # node -> frozenset[str]
    registers: dict  # (node, var) -> value
    variables: list
    shape: tuple = GRAPH_SHAPE

    @property
    def is_tree(self) -> bool:
        return self.shape[0] == "tree"

    def label(self, node) -> frozenset:
        return self.labels.get(node, frozenset())

    def gamma(self, node, var):
        return self.registers[(node, var)]

    def successors(self, node) -> list:
        return [b for (a, b) in sorted(self.edges) if a == node]


def _check_identifier(text: str, what: str, allow_reserved: bool) -> None:
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", text):
        raise StructureError(f"bad {what} {text!r}")
    if not allow_reserved and text.startswith(RESERVED_PREFIX):
        raise StructureError(f"{what} {text!r} uses the reserved prefix")


def validate_model(model: ConstraintKripke, allow_reserved: bool = False) -> None:
    """Check shape, totality, label and register well-formedness."""
    if not model.nodes:
        raise StructureError("model needs at least one node")
    if len(set(model.nodes)) != len(model.nodes):
        raise StructureError("duplicate node ids")
    node_set = set(model.nodes)

    if len(set(model.variables)) != len(model.variables):
        raise StructureError("duplicate variables")
    for var in model.variables:
        _check_identifier(var, "variable", allow_reserved)

    if model.shape[0] == "graph":
        for node in model.nodes:
            if not isinstance(node, str):
                raise StructureError(f"graph node ids must be strings, got {node!r}")
            _check_identifier(node, "node id", allow_reserved)
        for a, b in model.edges:
            if a not in node_set or b not in node_set:
                raise StructureError(f"edge ({a}, {b}) mentions an unknown node")
        without = [n for n in model.nodes if not any(a == n for a, _ in model.edges)]
        if without:
            raise StructureError(f"graph is not total: node {without[0]!r} has no successor")
    elif model.shape[0] == "tree":
        _, d, k = model.shape
        if not (1 <= d <= 9):
            raise StructureError("tree branching degree must be between 1 and 9")
        if k < 0:
            raise StructureError("tree depth must be nonnegative")
        for node in model.nodes:
            if not isinstance(node, str) or not re.fullmatch(r"[1-9]*", node):
                raise StructureError(f"tree node must be a word over 1..{d}, got {node!r}")
            if any(int(ch) > d for ch in node):
                raise StructureError(f"tree node {node!r} exceeds branching degree {d}")
            if len(node) > k:
                raise StructureError(f"tree node {node!r} deeper than {k}")
            if node and node[:-1] not in node_set:
                raise StructureError(f"tree nodes must be prefix closed; {node!r} lacks its parent")
        if "" not in node_set:
            raise StructureError("tree is missing its root")
        derived = {(n, n + str(i)) for n in model.nodes for i in range(1, d + 1) if n + str(i) in node_set}
        if model.edges and set(model.edges) != derived:
            raise StructureError("tree edges must be exactly the parent-child pairs")
    else:
        raise StructureError(f"unknown shape {model.shape!r}")

    for node, props in model.labels.items():
        if node not in node_set:
            raise StructureError(f"label on unknown node {node!r}")
        for p in props:
            _check_identifier(p, "proposition", allow_reserved)

    for node in model.nodes:
        for var in model.variables:
            if (node, var) not in model.registers:
                raise StructureError(f"missing register value for ({node!r}, {var!r})")
    for key in model.registers:
        node, var = key
        if node not in node_set or var not in model.variables:
            raise StructureError(f"register entry {key!r} outside nodes x variables")


@dataclass
class SigmaStructure:
    elements: list
    interpretation: dict  # RelationSymbol -> list[tuple]

    @property
    def signature(self) -> list:
        return list(self.interpretation.keys())

    def tuples(self, rel: RelationSymbol) -> list:
        return self.interpretation.get(rel, [])

    def constants(self) -> list:
        """Constant parameters declared in the signature, sorted."""
        return sorted({r.params[0] for r in self.interpretation if r.kind == CONSTANT})

    def moduli(self) -> list:
        """Distinct moduli b declared in the signature, sorted."""
        return sorted({r.params[1] for r in self.interpretation if r.kind == MODULO})


def validate_structure(structure: SigmaStructure, allow_reserved: bool = False) -> None:
    if len(set(structure.elements)) != len(structure.elements):
        raise StructureError("duplicate elements")
    element_set = set(structure.elements)
    for e in structure.elements:
        if not isinstance(e, str):
            raise StructureError(f"element ids must be strings, got {e!r}")
    for rel, tuples in structure.interpretation.items():
        for t in tuples:
            if len(t) != rel.arity:
                raise StructureError(f"{rel.name} is {rel.arity}-ary, got tuple {t!r}")
            for e in t:
                if e not in element_set:
                    raise StructureError(f"{rel.name} tuple {t!r} mentions an unknown element")


# ---------------------------------------------------------------------------
# File formats (line oriented; see docs/formats.md)


def _format_value(value) -> str:
    if isinstance(value, tuple):
        return "(" + ",".join(str(v) for v in value) + ")"
    return str(value)


def _parse_value(text: str):
    if text.startswith("(") and text.endswith(")"):
        parts = text[1:-1].split(",")
        return tuple(_parse_scalar(p) for p in parts)
    return _parse_scalar(text)


def _parse_scalar(text: str):
    text = text.strip()
    if re.fullmatch(r"-?\d+", text):
        return int(text)
    if re.fullmatch(r"-?\d+/\d+", text):
        return Fraction(text)
    raise StructureError(f"bad register value {text!r}")


_TREE_NODE_FILE_RE = re.compile(r"eps|[1-9]+")


def _node_to_file(node: str) -> str:
    return node if node else "eps"


def _node_from_file(text: str, is_tree: bool) -> str:
    if is_tree:
        if not _TREE_NODE_FILE_RE.fullmatch(text):
            raise StructureError(f"bad tree node id {text!r}")
        return "" if text == "eps" else text
    return text


def model_to_text(model: ConstraintKripke) -> str:
    lines = []
    if model.shape[0] == "graph":
        lines.append("SHAPE graph")
    else:
        lines.append(f"SHAPE tree {model.shape[1]} {model.shape[2]}")
    lines.append("VARS " + " ".join(model.variables))
    lines.append("NODES")
    for n in model.nodes:
        lines.append(_node_to_file(n))
    if model.shape[0] == "graph":
        lines.append("EDGES")
        for a, b in sorted(model.edges):
            lines.append(f"{_node_to_file(a)} {_node_to_file(b)}")
    labeled = [n for n in model.nodes if model.label(n)]
    if labeled:
        lines.append("LABELS")
        for n in labeled:
            lines.append(_node_to_file(n) + " " + " ".join(sorted(model.label(n))))
    lines.append("REGISTERS")
    for n in model.nodes:
        for var in model.variables:
            lines.append(f"{_node_to_file(n)} {var} {_format_value(model.registers[(n, var)])}")
    return "\n".join(lines) + "\n"


def _content_lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def model_from_text(text: str, allow_reserved: bool = False) -> ConstraintKripke:
    lines = list(_content_lines(text))
    if not lines or not lines[0].startswith("SHAPE"):
        raise StructureError("model file must start with a SHAPE line")
    shape_parts = lines[0].split()
    if shape_parts[1:] == ["graph"]:
        shape = GRAPH_SHAPE
    elif len(shape_parts) == 4 and shape_parts[1] == "tree":
        try:
            shape = tree_shape(int(shape_parts[2]), int(shape_parts[3]))
        except ValueError:
            raise StructureError(f"bad SHAPE line {lines[0]!r}") from None
    else:
        raise StructureError(f"bad SHAPE line {lines[0]!r}")
    is_tree = shape[0] == "tree"

    if len(lines) < 2 or not lines[1].startswith("VARS"):
        raise StructureError("model file needs a VARS line after SHAPE")
    variables = lines[1].split()[1:]

    nodes: list = []
    edges: set = set()
    labels: dict = {}
    registers: dict = {}
    section = None
    for line in lines[2:]:
        if line in ("NODES", "EDGES", "LABELS", "REGISTERS"):
            section = line
            continue
        if section == "NODES":
            nodes.append(_node_from_file(line, is_tree))
        elif section == "EDGES":
            parts = line.split()
            if len(parts) != 2:
                raise StructureError(f"bad edge line {line!r}")
            edges.add((_node_from_file(parts[0], is_tree), _node_from_file(parts[1], is_tree)))
        elif section == "LABELS":
            parts = line.split()
            node = _node_from_file(parts[0], is_tree)
            labels[node] = frozenset(parts[1:])
        elif section == "REGISTERS":
            parts = line.split()
            if len(parts) != 3:
                raise StructureError(f"bad register line {line!r}")
            node = _node_from_file(parts[0], is_tree)
            registers[(node, parts[1])] = _parse_value(parts[2])
        else:
            raise StructureError(f"unexpected line {line!r} before any section")

    if is_tree and not edges:
        d = shape[1]
        node_set = set(nodes)
        edges = {(n, n + str(i)) for n in nodes for i in range(1, d + 1) if n + str(i) in node_set}
    model = ConstraintKripke(nodes, edges, labels, registers, variables, shape)
    validate_model(model, allow_reserved=allow_reserved)
    return model


def structure_to_text(structure: SigmaStructure) -> str:
    lines = ["ELEMENTS"]
    lines.extend(structure.elements)
    for rel, tuples in structure.interpretation.items():
        lines.append(f"REL {rel.name}")
        for t in tuples:
            lines.append(" ".join(t))
    return "\n".join(lines) + "\n"


def structure_from_text(text: str, allow_reserved: bool = False) -> SigmaStructure:
    lines = list(_content_lines(text))
    if not lines or lines[0] != "ELEMENTS":
        raise StructureError("structure file must start with ELEMENTS")
    elements: list = []
    interpretation: dict = {}
    current: RelationSymbol | None = None
    arities: dict = {}
    for line in lines[1:]:
        if line.startswith("REL "):
            name = line[4:].strip()
            try:
                rel = relation_from_name(name)
            except FormulaError as exc:
                raise StructureError(str(exc)) from None
            current = rel
            if rel not in interpretation:
                interpretation[rel] = []
            continue
        if current is None:
            if " " in line:
                raise StructureError(f"element ids cannot contain spaces: {line!r}")
            elements.append(line)
        else:
            t = tuple(line.split())
            if current.kind == "interpreted" and current not in arities:
                # fix the arity of an interpreted symbol from its first tuple
                fixed = RelationSymbol(current.name, len(t), current.kind, current.params)
                interpretation[fixed] = interpretation.pop(current)
                current = fixed
                arities[current] = len(t)
            interpretation[current].append(t)
    structure = SigmaStructure(elements, interpretation)
    validate_structure(structure, allow_reserved=allow_reserved)
    return structure


# ---------------------------------------------------------------------------
# Abstraction of a register tree and extraction of the constraint graph


def element_id(node: str, var: str) -> str:
    """Stable id for the (node, variable) element of the constraint graph."""
    return f"{_node_to_file(node)}.{var}"


def gamma_map(model: ConstraintKripke) -> dict:
    """Register valuation keyed by element_id."""
    return {element_id(n, v): model.registers[(n, v)] for n in model.nodes for v in model.variables}


def abstract_model(model: ConstraintKripke, table: AbstractionTable, dom: ConcreteDomain) -> ConstraintKripke:
    """Label each node whose upward window satisfies a constraint.

    For a table entry (R_i, p_i, d_i) with R_i = r(X^j1 x1, ..., X^jk xk),
    the proposition p_i is placed on node s.u (|u| = d_i) exactly when
    (gamma(s.u[:j1], x1), ..., gamma(s.u[:jk], xk)) is in I(r).  Nodes
    closer than d_i to the root carry no p_i: their window is truncated.
    """
    if not model.is_tree:
        raise StructureError("abstract_model expects a tree model")
    table_props = {entry.prop for entry in table}
    for node in model.nodes:
        clash = model.label(node) & table_props
        if clash:
            raise StructureError(f"node {node!r} already carries table proposition {sorted(clash)[0]!r}")
    for entry in table:
        for _, var in entry.constraint.args:
            if var not in model.variables:
                raise StructureError(f"constraint variable {var!r} has no register")

    new_labels = {n: set(model.label(n)) for n in model.nodes}
    for entry in table:
        d_i = entry.depth
        rel = entry.constraint.relation
        for v in model.nodes:
            if len(v) < d_i:
                continue
            s = v[: len(v) - d_i]
            u = v[len(v) - d_i:]
            values = tuple(model.registers[(s + u[:off], var)] for off, var in entry.constraint.args)
            if dom.eval_relation(rel, values):
                new_labels[v].add(entry.prop)
    labels = {n: frozenset(ps) for n, ps in new_labels.items() if ps}
    return ConstraintKripke(
        list(model.nodes), set(model.edges), labels, dict(model.registers), list(model.variables), model.shape
    )


def extract_constraint_graph(model: ConstraintKripke, table: AbstractionTable, variables: list | None = None) -> SigmaStructure:
    """Read the sigma-structure off a labeled tree.

    Elements are (node, variable) pairs; a table proposition p_i at node
    s.u contributes the tuple of its constraint's argument positions.
    The declared signature is exactly the table's relation set, so
    downstream constant/modulus extraction matches the formula.
    """
    if not model.is_tree:
        raise StructureError("extract_constraint_graph expects a tree model")
    if variables is None:
        variables = list(model.variables)
    elements = [element_id(n, v) for n in model.nodes for v in variables]

    interpretation: dict = {}
    for entry in table:
        interpretation.setdefault(entry.constraint.relation, [])

    for entry in table:
        d_i = entry.depth
        rel = entry.constraint.relation
        rows = interpretation[rel]
        for v in model.nodes:
            if entry.prop not in model.label(v):
                continue
            if len(v) < d_i:
                raise StructureError(
                    f"proposition {entry.prop!r} at node {_node_to_file(v)!r} needs {d_i} ancestors"
                )
            s = v[: len(v) - d_i]
            u = v[len(v) - d_i:]
            row = tuple(element_id(s + u[:off], var) for off, var in entry.constraint.args)
            if row not in rows:
                rows.append(row)
    return SigmaStructure(elements, interpretation)
