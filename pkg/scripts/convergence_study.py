"""Fredholm truncation study against the theta closed form.

For each t the Laurent truncation size L is swept and the error against
theta_corr is printed, together with the size the automatic rule picks.

    python scripts/convergence_study.py --N 1 --lambda 0.6 --t 0.3,0.6,0.9
"""
import argparse

from mpmath import mp, mpf

from ilc import correlators as cr
from ilc import numerics


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=1, choices=[0, 1])
    ap.add_argument("--lambda", dest="lam", default="0.6")
    ap.add_argument("--t", default="0.3,0.6,0.9")
    ap.add_argument("--sizes", default="8,16,32,64,128")
    ap.add_argument("--precision", type=int, default=50)
    args = ap.parse_args()

    with numerics.precision(args.precision):
        lam = mpf(args.lam)
        for t in (mpf(s) for s in args.t.split(",")):
            exact = cr.theta_corr(args.N, t, lam).value
            auto = cr.fredholm_corr(args.N, t, lam)
            print(f"t={mp.nstr(t, 6)}  theta={mp.nstr(exact, 30)}")
            for L in (int(s) for s in args.sizes.split(",")):
                v = cr.fredholm_corr(args.N, t, lam, cr.FredholmConfig(M=L)).value
                print(f"  L={L:5d}  |fredholm - theta| = {mp.nstr(abs(v - exact), 3)}")
            print(f"  auto L={auto.diagnostics.get('size')}  error={mp.nstr(abs(auto.value - exact), 3)}"
                  f"  est_error={mp.nstr(auto.est_error, 3)}")


if __name__ == "__main__":
    main()
