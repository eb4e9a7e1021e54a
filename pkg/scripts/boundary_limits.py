"""Scaled boundary values of the half-space extension E at decreasing x_n."""

import numpy as np
from _common import parser, save

from confext.cli import EXTENSION_COLUMNS
from confext.operators import boundary_limit_check
from confext.params import Params


def bump(y):
    return np.exp(-np.sum(np.atleast_2d(y) ** 2, axis=1) / (2 * 0.3**2))


CASES = [(3, 0.0, 1.0), (3, 0.3, 0.5), (3, 0.5, 0.6), (3, -0.3, 1.4), (4, 0.3, 0.5), (3, 1.0, 0.5), (4, 1.0, 0.5)]


def main() -> None:
    args = parser(__doc__).parse_args()
    xn = tuple(10.0 ** -k for k in np.arange(1.0, 6.01, 0.5))
    rows = []
    for trip in CASES:
        prm = Params(*trip)
        res = boundary_limit_check(prm, bump, np.full(prm.n - 1, 0.05), 3.0, xn)
        for h, s in zip(res.xn, res.scaled):
            rows.append(
                {
                    "n": prm.n,
                    "alpha": prm.alpha,
                    "beta": prm.beta,
                    "xn": h,
                    "scaled": s,
                    "extrapolated": res.extrapolated,
                    "stated_constant": res.stated_constant,
                    "derived_constant": res.derived_constant,
                    "ratio_stated": s / res.stated_constant,
                    "ratio_derived": s / res.derived_constant,
                    "richardson_change": res.richardson_change,
                }
            )
        print(f"{prm}: ratio at x_n={res.xn[-1]:.0e} stated {res.ratio_stated:.5f} derived {res.ratio_derived:.5f}")
    save(rows, EXTENSION_COLUMNS, args.out_dir, "boundary_limits.csv")


if __name__ == "__main__":
    main()
