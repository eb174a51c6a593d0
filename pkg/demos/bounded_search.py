"""Bounded satisfiability search: enumerate small models in a fixed
order and return the first one the checker accepts.

Run:  python3 demos/bounded_search.py
"""

from ctlz import Z_DOMAIN, find_model, model_to_text, parse_formula, to_snnf
from ctlz.satsearch import candidate_values


def main():
    f = parse_formula("E (lt(x, X^1 y) U eqc[100](y))")
    print("register candidates at range 100:", candidate_values(f, 100))
    model, node = find_model(f, register_range=100)
    print(f"first model (satisfying node {node}):")
    print(model_to_text(model))

    # negated constraints are eliminated up front; the rewritten formula
    # searches the same candidate pool and succeeds iff the original does
    g = parse_formula("E F ~eq(x, X^1 x)")
    h = to_snnf(g, Z_DOMAIN)
    print("rewritten:", h)
    for name, formula in (("original", g), ("rewritten", h)):
        found = find_model(formula, max_nodes=2)
        verdict = "sat" if found else "no model within bounds"
        print(f"  {name:9s}: {verdict}")

    # unsatisfiable patterns exhaust their bounds instead
    for text in ("E lt(x, x)", "E G lt(x, X^1 x)"):
        print(f"{text:20s} ->", find_model(parse_formula(text)))


if __name__ == "__main__":
    main()
