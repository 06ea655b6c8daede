"""Write the knot tables used by the tests and batch runs.

Needs snappy/spherogram (diagrams) and knot_floer_homology (genus and
thinness annotations).  These are only imported here; the package itself
reads the generated flat files.

    python scripts/build_census.py [--out src/vnpoly/data/census] [--max-htw 13]
"""
from __future__ import annotations

import argparse
import csv
import warnings
from pathlib import Path

warnings.filterwarnings("ignore")

import snappy  # noqa: E402
import spherogram  # noqa: E402
from knot_floer_homology import pd_to_hfk  # noqa: E402

ROLFSEN_COUNTS = {3: 1, 4: 1, 5: 2, 6: 3, 7: 7, 8: 21, 9: 49, 10: 165}
LOOSE11 = ["11n34", "11n42", "11n45", "11n67", "11n73", "11n97", "11n152"]


def pd_text(link) -> str:
    rows = ",".join("X[{},{},{},{}]".format(*(a + 1 for a in c)) for c in link.PD_code())
    return f"PD[{rows}]"


def annotate(link) -> tuple[int, bool, bool]:
    h = pd_to_hfk(link.PD_code())
    deltas = {a - m for (a, m) in h["ranks"]}
    return h["seifert_genus"], link.is_alternating(), len(deltas) == 1


def write_tsv(path: Path, rows) -> None:
    with path.open("w") as f:
        f.write("name\tpd_code\n")
        for name, pd in rows:
            f.write(f"{name}\t{pd}\n")


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/vnpoly/data/census"))
    ap.add_argument("--max-htw", type=int, default=13)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    small, notes = [], []
    for c, count in ROLFSEN_COUNTS.items():
        for i in range(1, count + 1):
            name = f"{c}_{i}"
            link = spherogram.Link(name)
            small.append((name, pd_text(link)))
            notes.append((name, *annotate(link)))
    write_tsv(out / "rolfsen_upto10.tsv", small)

    loose = []
    for name in LOOSE11:
        link = snappy.Link("K" + name)
        loose.append((name, pd_text(link)))
        notes.append((name, *annotate(link)))
    write_tsv(out / "loose11.tsv", loose)

    with (out / "annotations.csv").open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["name", "genus", "alternating", "thin"])
        for name, g, alt, thin in notes:
            w.writerow([name, g, int(alt), int(thin)])

    for c in range(12, args.max_htw + 1):
        table = snappy.HTLinkExteriors(knots_vs_links="knots", crossings=c)
        rows = [(M.name()[1:], pd_text(M.link())) for M in table]
        write_tsv(out / f"htw{c}.tsv", rows)
        print(f"htw{c}: {len(rows)} knots")
    print(f"rolfsen: {len(small)} knots, loose11: {len(loose)}")


if __name__ == "__main__":
    main()
