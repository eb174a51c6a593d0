"""Why the target domain matters: the same chain of order constraints
has a rational solution but no integer one.

Run:  python3 demos/gap_between_integers.py
"""

from ctlz import LT, SigmaStructure, const_rel, decide_hom, verify_hom
from ctlz.homcheck import brute_force_hom, witness_bound


def main():
    # a < x < b with a pinned to 0 and b pinned to 1
    chain = SigmaStructure(
        ["a", "x", "b"],
        {
            LT: [("a", "x"), ("x", "b")],
            const_rel(0): [("a",)],
            const_rel(1): [("b",)],
        },
    )

    over_z = decide_hom(chain, "Z")
    print("target Z :", "yes" if over_z.verdict else "no", "-", over_z.reason.kind)

    # the exhaustive search inside the small-witness bound agrees
    bound = witness_bound(chain)
    print("brute force within", bound, ":", brute_force_hom(chain, bound, "Z"))

    over_q = decide_hom(chain, "Q")
    print("target Q :", "yes" if over_q.verdict else "no", "-", over_q.witness)
    assert verify_hom(chain, over_q.witness, "Q")

    # drop the constants and integers work again: 0 < x < 2 leaves room
    relaxed = SigmaStructure(
        ["a", "x", "b"],
        {
            LT: [("a", "x"), ("x", "b")],
            const_rel(0): [("a",)],
            const_rel(2): [("b",)],
        },
    )
    widened = decide_hom(relaxed, "Z")
    print("widened  :", "yes" if widened.verdict else "no", "-", widened.witness)


if __name__ == "__main__":
    main()
