"""Reference kernel values by Jacobi-function inversion.

w(r) = (1/2pi) int_0^inf m(s) phi_{2s}(r/2) |c(2s)|^{-2} ds
with alpha = (n-2)/2, beta = (m_z-1)/2, rho = alpha+beta+1 and
phi_l(t) = 2F1((rho+il)/2, (rho-il)/2; alpha+1; -sinh^2 t).

Usage: python3 jacobi_oracle.py
"""
import mpmath as mp

mp.mp.dps = 30


def c_fn(l, alpha, beta):
    rho = alpha + beta + 1
    il = 1j * l
    return (2 ** (rho - il) * mp.gamma(alpha + 1) * mp.gamma(il)
            / (mp.gamma((il + rho) / 2) * mp.gamma((il + alpha - beta + 1) / 2)))


def phi(l, t, alpha, beta):
    rho = alpha + beta + 1
    return mp.re(mp.hyp2f1((rho + 1j * l) / 2, (rho - 1j * l) / 2, alpha + 1, -mp.sinh(t) ** 2))


def gauss_annular(s):
    x = 2 * (abs(s) - mp.mpf(3) / 2)
    if abs(x) >= 1:
        return mp.mpf(0)
    return mp.e * mp.exp(-1 / (1 - x * x))


def w_profile(m_v, m_z, lam, t, r):
    n = m_v + m_z + 1
    alpha = mp.mpf(n - 2) / 2
    beta = mp.mpf(m_z - 1) / 2

    def f(s):
        m = gauss_annular(s / lam) * mp.cos(t / lam * s)
        return m * phi(2 * s, r / 2, alpha, beta) / abs(c_fn(2 * s, alpha, beta)) ** 2

    pts = [lam + k * lam / 16 for k in range(17)]
    return mp.quad(f, pts) / (2 * mp.pi)


if __name__ == "__main__":
    for (mv, mz) in [(2, 1), (4, 2)]:
        for (lam, t, r) in [(4, 2, 1.5), (2, 1, 0.7)]:
            print(mv, mz, lam, t, r, mp.nstr(w_profile(mv, mz, lam, t, r), 15))
