"""Shared state between the acceptance tests and the terminal summary."""

RESULTS: dict[int, tuple[bool, str]] = {}
QF_OUTPUTS: list = []

TITLES = {
    1: "witness completeness",
    2: "integral rounding bound",
    3: "cone generator bound",
    4: "elimination soundness",
    5: "bounded form polynomial size",
    6: "S_n smallest period",
    7: "period bound",
    8: "multiplication gadget",
    9: "hardness encodings",
    10: "determinism",
}


def record(n: int, passed: bool, detail: str = "") -> None:
    RESULTS[n] = (passed, detail)
    print(f"ACCEPTANCE {n} {'PASS' if passed else 'FAIL'}: {TITLES[n]} {detail}".rstrip())
