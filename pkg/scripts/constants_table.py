"""Sharp constants, A_0..A_10 and both gap margins over the validation grid."""

from _common import parser, save

from confext.constants import VALIDATION_GRID, constant_set, gap_check
from confext.stability import dual_gap_check


def main() -> None:
    args = parser(__doc__).parse_args()
    consts, gaps = [], []
    for prm in VALIDATION_GRID:
        consts.append(constant_set(prm).record())
        g, dg = gap_check(prm), dual_gap_check(prm)
        gaps.append(
            {
                "n": prm.n,
                "alpha": prm.alpha,
                "beta": prm.beta,
                "K_inv": g.K_inv,
                "gap_rhs": g.rhs,
                "gap_margin": g.margin,
                "A1_route_rel": g.A1_lhs / g.rhs - 1.0,
                "dual_lhs": dg.lhs_bracket,
                "dual_rhs": dg.rhs,
                "dual_margin": dg.margin,
            }
        )
    save(consts, list(consts[0]), args.out_dir, "constants.csv")
    save(gaps, list(gaps[0]), args.out_dir, "gap_margins.csv")


if __name__ == "__main__":
    main()
