"""Every verification suite over the validation grid (or a grid file), in parallel."""

from _common import parser, save

from confext.cli import SWEEP_COLUMNS, read_grid
from confext.verifier import SUITES, grid_records, sweep_grid


def main() -> None:
    p = parser(__doc__)
    p.add_argument("--grid", default=None)
    p.add_argument("--suite", default="all", choices=SUITES + ("all",))
    p.add_argument("--jobs", type=int, default=4)
    args = p.parse_args()
    grid = read_grid(args.grid) if args.grid else None
    reports = sweep_grid(grid, args.suite, args.jobs)
    save(grid_records(reports), SWEEP_COLUMNS, args.out_dir, f"verify_{args.suite}.csv")
    for rep in reports:
        bad = [c.name for c in rep.checks if not c.passed]
        print(f"{rep.params}: {len(rep.checks) - len(bad)}/{len(rep.checks)} passed{'  failed: ' + ', '.join(bad) if bad else ''}")


if __name__ == "__main__":
    main()
