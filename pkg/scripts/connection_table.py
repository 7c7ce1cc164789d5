"""Fitted connection constants next to their closed forms.

Integrates the sigma form from t0 to 1 - x_end for each (N, lambda) and prints
the fit against sigma(lambda), shat(N, sigma) and K(N; sigma) as CSV.

    python scripts/connection_table.py --N 0,1,2 --lambda 0.3,0.5,0.7071067811865476
"""
import argparse
import csv
import sys
import time

from mpmath import mp, mpf

from ilc import connection as cx
from ilc import numerics
from ilc import painleve as pv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", default="0,1,2")
    ap.add_argument("--lambda", dest="lam", default="0.3,0.5,0.7071067811865476")
    ap.add_argument("--t0", default="0.05")
    ap.add_argument("--x-end", dest="x_end", default="1e-5")
    ap.add_argument("--precision", type=int, default=50)
    args = ap.parse_args()

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["N", "lambda", "sigma_fit", "sigma_rel_err", "shat_rel_err", "K_rel_err", "seconds"])
    with numerics.precision(args.precision):
        for N in (int(s) for s in args.N.split(",")):
            for lam in (mpf(s) for s in args.lam.split(",")):
                start = time.perf_counter()
                _, fit = pv.connect(N, lam, t0=args.t0, x_end=args.x_end)
                cc = cx.ConnectionConstants.from_lambda(N, lam)
                w.writerow([N, mp.nstr(lam, 16), mp.nstr(fit.sigma_est, 20),
                            mp.nstr(abs(fit.sigma_est / cc.sigma - 1), 3),
                            mp.nstr(abs(fit.shat_est / cc.shat - 1), 3),
                            mp.nstr(abs(fit.K_est / cc.bigK - 1), 3),
                            f"{time.perf_counter() - start:.2f}"])


if __name__ == "__main__":
    main()
