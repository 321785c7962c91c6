"""Independent high-precision values for the tail analytics tests (mpmath)."""
import mpmath as mp

mp.mp.dps = 40


def H_weibull2(t):
    # int_0^inf e^{tx} 2x e^{-x^2} dx = 1 + t sqrt(pi)/2 e^{t^2/4} (1 + erf(t/2))
    return mp.log(1 + t * mp.sqrt(mp.pi) / 2 * mp.e ** (t * t / 4) * (1 + mp.erf(t / 2)))


def H_weibull(rho, t):
    f = lambda x: mp.e ** (t * x - x ** rho) * rho * x ** (rho - 1)
    return mp.log(mp.quad(f, sorted({0, 1, t, 2 * t + 5}) + [mp.inf]))


def H_doubleexp(rho, t):
    return mp.loggamma(1 + rho * t)


def H_frechet1(t):
    # E[exp(-t/E)], E ~ Exp(1) = 2 sqrt(t) K_1(2 sqrt(t))
    if t == 0:
        return mp.mpf(0)
    return mp.log(2 * mp.sqrt(t) * mp.besselk(1, 2 * mp.sqrt(t)))


def H_sqdexp(t):
    # atom 1 - e^{-1} at 0; density on x > 0: 2x e^{x^2} exp(-e^{x^2})
    f = lambda x: mp.e ** (t * x + x * x - mp.e ** (x * x)) * 2 * x
    return mp.log(1 - mp.e ** -1 + mp.quad(f, [0, 0.5, 1, 1.5, 2, 2.5, 3.5]))


def rate_I(y):
    return y * mp.asinh(y) - mp.sqrt(1 + y * y) + 1


if __name__ == "__main__":
    for t in [0.5, 1, 2, 2.5, 3, 6, 10, 40]:
        print("weibull2", t, mp.nstr(H_weibull2(t), 20), mp.nstr(H_weibull(2, t), 20))
    for t in [1, 3]:
        print("weibull3", t, mp.nstr(H_weibull(3, t), 20))
    for t in [0.5, 2, 7]:
        print("doubleexp1", t, mp.nstr(H_doubleexp(1, t), 20))
        print("doubleexp2.5", t, mp.nstr(H_doubleexp(2.5, t), 20))
    for t in [0.5, 1, 4, 20]:
        print("frechet1", t, mp.nstr(H_frechet1(t), 20))
    for t in [0.5, 1, 3, 8]:
        print("sqdexp", t, mp.nstr(H_sqdexp(t), 20))
    print("I(1)", mp.nstr(rate_I(1), 20), mp.nstr(mp.log(1 + mp.sqrt(2)) - mp.sqrt(2) + 1, 20))
    print("I(2.5)", mp.nstr(rate_I(2.5), 20))
    print("aW(0.5)", mp.nstr(2 * mp.sqrt(0.5) - 0.5, 20))
    # G_{0.01}(10) and t H'(t) - H(t) at t=10, weibull rho=2
    th = mp.mpf("0.01")
    G = (H_weibull2(10 * (1 + th)) - (1 + th) * H_weibull2(10)) / th
    dH = mp.diff(H_weibull2, 10)
    print("G001(10)", mp.nstr(G, 20), "tH'-H", mp.nstr(10 * dH - H_weibull2(10), 20))
    print("G0.5(2) w2", mp.nstr((H_weibull2(3) - 1.5 * H_weibull2(2)) / 0.5, 20))
    # truncated moment: log E[e^{tv}; L <= 4] for weibull 2, level L = v^2
    f = lambda x: mp.e ** (3 * x - x * x) * 2 * x
    print("trunc w2 t=3 Lmax=4", mp.nstr(mp.log(mp.quad(f, [0, 1, 2])), 20))
    # Frechet rho=1 d=1: alpha with -H(t a^-1) a^3 = t at t=50
    for t in [10, 50]:
        g = lambda u: mp.log(-H_frechet1(t * mp.e ** (-u))) + 3 * u - mp.log(t)
        u = mp.findroot(g, 0.5)
        print("frechet alpha d=1 t=", t, mp.nstr(mp.e ** u, 20), "J", mp.nstr(t / mp.e ** (2 * u), 20))
