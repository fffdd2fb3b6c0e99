"""Regenerate the golden TSV suite: python3 tools/make_golden.py [directory]."""

import sys
from pathlib import Path

from plocal.cli import render

PRIMES = (2, 3, 5, 7)


def golden_commands():
    for p in PRIMES:
        yield f"em_n3_p{p}", ["em", "--n", "3", "--prime", str(p), "--max-degree", str(2 * p + 4)]
        yield f"em_n4_p{p}", ["em", "--n", "4", "--prime", str(p), "--max-degree", str(2 * p + 5)]
        if p in (3, 5):
            for n in (5, 6):
                yield f"em_n{n}_p{p}", ["em", "--n", str(n), "--prime", str(p),
                                        "--max-degree", str(2 * p + n + 1)]
        yield f"postnikov_bsl{p}_p{p}", ["postnikov", "--space", "bsl", "--rank", str(p),
                                         "--prime", str(p), "--truncate", str(2 * p)]
        yield f"kinv_p{p}", ["k-invariant", "--prime", str(p)]
        yield f"selfmap_p{p}", ["selfmap", "--prime", str(p)]
    yield "betti_sl4_sl6", ["betti", "--parts", "2..4,2..6", "--max-degree", "24"]
    yield "dimgap_2_6", ["dim-gap", "--m", "2", "--n", "6"]


def main(directory="golden"):
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, argv in golden_commands():
        code, text, msg = render(argv + ["--format", "tsv"])
        if code:
            raise SystemExit(f"{name}: {msg}")
        (out / f"{name}.tsv").write_text(text, encoding="utf-8")
        print(f"wrote {name}.tsv")


if __name__ == "__main__":
    main(*sys.argv[1:])
