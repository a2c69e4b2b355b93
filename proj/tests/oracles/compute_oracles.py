"""Independent high-precision oracle for the frozen values in the C++ tests.

Uses mpmath (50 digits) with direct sums, library incomplete gamma and
adaptive quadrature over the nuisance prior. Shares no code with the C++
library. Run: python3 tests/oracles/compute_oracles.py
"""
import mpmath as mp

mp.mp.dps = 50


def pmf(n, nu):
    return mp.power(nu, n) * mp.exp(-nu) / mp.factorial(n)


def cdf(n, nu):
    return mp.fsum(pmf(k, nu) for k in range(n + 1))


def Q(a, x):
    return mp.gammainc(a, x, mp.inf, regularized=True)


def bisect(f, target, lo, hi, iters=200):
    # f decreasing
    for _ in range(iters):
        mid = (lo + hi) / 2
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def phi(x):
    return mp.exp(-x * x / 2) / mp.sqrt(2 * mp.pi)


def main():
    print("log_poisson_pmf(3,1.5) =", mp.nstr(mp.log(pmf(3, mp.mpf('1.5'))), 20))
    print("poisson_cdf(3,1.5)     =", mp.nstr(cdf(3, mp.mpf('1.5')), 20))
    print("gamma_q(4,1.5)         =", mp.nstr(Q(4, mp.mpf('1.5')), 20))

    s, b, n = 1, mp.mpf('1.5'), 3
    cls = lambda mu: cdf(n, mu * s + b) / cdf(n, b)
    print("cls_value(1,1.5,3; mu=6.356) =", mp.nstr(cls(mp.mpf('6.356')), 20))
    print("cls limit (1,1.5,3) a=0.05 =", mp.nstr(bisect(cls, mp.mpf('0.05'), 0, 100), 20))

    s, b, n = 1, 5, 1
    bay = lambda mu: Q(n + 1, mu * s + b) / Q(n + 1, b)
    print("bayes limit (1,5,1) a=0.1 =", mp.nstr(bisect(bay, mp.mpf('0.1'), 0, 100), 20))

    s, b, n = 1, mp.mpf('1.5'), 3
    print("posterior p(0) (1,1.5,3) =", mp.nstr(s * pmf(n, b) / Q(n + 1, b), 20))

    # 2-node Gauss-Hermite for the standard normal: nodes +-1, weights 1/2.
    k = mp.mpf('1.2')
    b1, b2 = mp.mpf('1.5') * k, mp.mpf('1.5') / k
    for N in (0, 3):
        print(f"L_m(mu=0,N={N}) 2-node kappa=1.2 =", mp.nstr((pmf(N, b1) + pmf(N, b2)) / 2, 20))
    k = mp.mpf('1.3')
    b1, b2 = mp.mpf('1.5') * k, mp.mpf('1.5') / k
    num = (cdf(3, 2 + b1) + cdf(3, 2 + b2)) / 2
    den = (cdf(3, b1) + cdf(3, b2)) / 2
    print("hybrid_cls(mu=2) 2-node kappa=1.3 =", mp.nstr(num / den, 20))

    # Signal systematic: s(eta) = 1.2^eta, b = 1.5, N = 3, alpha = 0.05, continuous prior.
    k = mp.mpf('1.2')
    sy = lambda e: mp.power(k, e)
    lim = [-12, -4, 0, 4, 12]  # standard-normal mass outside is below 1e-32
    clb = mp.quad(lambda e: phi(e) * cdf(3, b), lim)
    hcls = lambda mu: mp.quad(lambda e: phi(e) * cdf(3, mu * sy(e) + b), lim) / clb
    bn = mp.quad(lambda e: phi(e) * Q(4, b) / sy(e), lim)
    btail = lambda mu: mp.quad(lambda e: phi(e) * Q(4, mu * sy(e) + b) / sy(e), lim) / bn
    mp.mp.dps = 30
    mu_c = bisect(hcls, mp.mpf('0.05'), 0, 20, iters=80)
    mu_b = bisect(btail, mp.mpf('0.05'), 0, 20, iters=80)
    print("signal-syst hybrid CLs limit =", mp.nstr(mu_c, 17))
    print("signal-syst bayes limit      =", mp.nstr(mu_b, 17))
    print("signal-syst rel gap          =", mp.nstr(abs(mu_c - mu_b) / max(mu_c, mu_b), 17))

    # Background log-normal 20% systematic, Gaussian prior: continuous hybrid CLs limit.
    k = mp.mpf('1.2')
    by = lambda e: mp.mpf('1.5') * mp.power(k, e)
    clb = mp.quad(lambda e: phi(e) * cdf(3, by(e)), lim)
    hcls = lambda mu: mp.quad(lambda e: phi(e) * cdf(3, mu + by(e)), lim) / clb
    print("bkg-syst hybrid CLs limit    =", mp.nstr(bisect(hcls, mp.mpf('0.05'), 0, 20, iters=80), 17))


if __name__ == "__main__":
    main()
