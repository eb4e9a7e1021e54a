"""Deficit, orbit distance and their ratios along the three test families."""

from _common import parser, save

from confext.cli import DEFICIT_COLUMNS
from confext.params import Params
from confext.stability import FAMILIES, optimality_sweep, quadratic_limit


def main() -> None:
    p = parser(__doc__)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--eps", type=str, default="0.2,0.1,0.05,0.025,0.0125")
    args = p.parse_args()
    prm = Params(args.n, args.alpha, args.beta).require_valid()
    eps = [float(e) for e in args.eps.split(",")]
    tag = f"n{prm.n}_a{prm.alpha:g}_b{prm.beta:g}"
    for family in FAMILIES:
        rows = optimality_sweep(prm, family, eps)
        save([r.record() for r in rows], DEFICIT_COLUMNS, args.out_dir, f"sweep_{family}_{tag}.csv")
        for r in rows:
            print(f"{family:12s} eps={r.eps:<8g} deficit={r.deficit:.4e} ratio2={r.ratio2:.4f} ratiop={r.ratiop:.4e}")
    print(f"quadratic limit of deficit/eps^2: {quadratic_limit(prm):.6e}")


if __name__ == "__main__":
    main()
