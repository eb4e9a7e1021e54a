"""Minimum residual and estimated c_kappa of the scalar Figalli-Zhang inequalities."""

import numpy as np
from _common import parser, save

from confext.stability import FZParams, estimate_c_kappa, fz_check, fz_nonnegativity


def main() -> None:
    p = parser(__doc__)
    p.add_argument("--step", type=float, default=1e-3)
    args = p.parse_args()
    grid = np.round(np.arange(-10.0, 10.0 + args.step / 2, args.step), 10)
    rows = []
    for r in (1.2, 1.5, 2.0, 3.0, 4.0):
        for kappa in (0.1, 0.5):
            res = fz_check(FZParams(r, kappa, grid))
            rows.append(
                {
                    "r": r,
                    "kappa": kappa,
                    "min_residual": float(np.min(res)),
                    "argmin_a": float(grid[np.argmin(np.where(grid == 0, np.inf, res))]),
                    "c_kappa": estimate_c_kappa(r, kappa, grid),
                    "min_quadratic_part": float(np.min(fz_nonnegativity(r, grid))) if r < 2 else float("nan"),
                }
            )
    save(rows, list(rows[0]), args.out_dir, "fz_grid.csv")


if __name__ == "__main__":
    main()
