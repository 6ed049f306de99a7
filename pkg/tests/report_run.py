"""Emit a deterministic report of CLI runs and seeded computations.

Run as a script; the determinism check runs it twice in fresh interpreters
with different hash seeds and compares the bytes.
"""

from __future__ import annotations

import contextlib
import io
import random
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

from oracles import rand_epa, rand_matrix  # noqa: E402

from presqe.cli import main  # noqa: E402
from presqe.parser import format_matrix_csv, print_formula  # noqa: E402
from presqe.polyhedra import enumerate_witness_candidates  # noqa: E402
from presqe.qe import eliminate_block  # noqa: E402


def cli(out, *argv: str) -> None:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(argv))
    out.write(f"$ presqe {' '.join(Path(a).name if a.endswith(('.pa', '.csv')) else a for a in argv)}\n")
    out.write(buf.getvalue())
    out.write(f"# exit {code}\n")


def run(out, workdir: Path, seed: int = 0) -> None:
    corpus = sorted((HERE / "corpus").glob("*.pa"))
    for path in corpus:
        cli(out, "eliminate", "--input", str(path))
        cli(out, "eliminate", "--input", str(path), "--mode", "bepa")
    for a, b in zip(corpus, corpus[1:]):
        cli(out, "check-equiv", str(a), str(b), "--seed", str(seed))
    for n in (2, 3):
        cli(out, "period", "--sn", str(n))
    A = workdir / "A.csv"
    b = workdir / "b.csv"
    A.write_text("1\n-1\n")
    b.write_text("3,-1\n")
    cli(out, "witness", "--matrix", str(A), "--rhs", str(b))
    cli(out, "witness", "--matrix", str(A), "--enumerate")
    gamma = workdir / "gamma.pa"
    gamma.write_text("(forall (y) (exists (x) (= (+ x x) y)))\n")
    cli(out, "encode", "--wqo", str(gamma))
    cli(out, "encode", "--mondec", str(gamma))

    rng = random.Random(seed)
    for i in range(60):
        f = rand_epa(rng)
        res = eliminate_block(f)
        out.write(f"qe {i} {print_formula(f)} => {print_formula(res.formula)}\n")
    rng = random.Random(seed)
    for i in range(40):
        A = rand_matrix(rng, rng.randint(1, 3), rng.randint(1, 3))
        cands = enumerate_witness_candidates(A, len(A[0]))
        out.write(f"witness {i} {A} count={len(cands)}\n")
        for w in cands[:5]:
            out.write(format_matrix_csv(w.D.entries) + format_matrix_csv([w.d]))


if __name__ == "__main__":
    import tempfile

    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    with tempfile.TemporaryDirectory() as tmp:
        run(sys.stdout, Path(tmp), seed)
