"""Independent reference values for the unit tests.

Everything here is computed with mpmath/scipy straight from the defining
integrals and formulas, without any of the library's algorithms (no binning,
no Gauss-Kronrod, no Bernstein coefficient recursions). Run it to regenerate
the constants frozen in tests/*.cpp.
"""

import math

import mpmath as mp
import numpy as np
from scipy import optimize, stats

mp.mp.dps = 30


def show(name, value):
    print(f"{name:40s} {float(value):.15g}")


def ncdf(x):
    return mp.ncdf(x)


def nppf(p):
    return mp.sqrt(2) * mp.erfinv(2 * mp.mpf(p) - 1)


print("# standard normal")
show("pdf(1)", mp.npdf(1))
show("cdf(1.96)", ncdf(1.96))
show("sf(1)", 1 - ncdf(1))
show("cdf(-8)", ncdf(-8))
show("q(0.03)", nppf(0.03))
show("q(0.02)", nppf(0.02))
show("q(0.05)", nppf(0.05))
show("q(1e-10)", nppf(mp.mpf("1e-10")))
show("q(0.975)", nppf(0.975))

print("# stage-1 closed form")
for a1 in (0.03, 0.07):
    ga, gr = nppf(0.02), nppf(0.05)
    z = nppf(a1) - nppf(1 - a1)
    n1 = math.ceil(float(z * z / (ga - gr) ** 2))
    show(f"n1 alpha1={a1}", n1)
    show(f"c1 alpha1={a1}", -mp.sqrt(n1) / 2 * (ga + gr))

print("# risk allocation")
a2 = 1 - (1 - mp.mpf("0.1")) / (1 - mp.mpf("0.03"))
show("alpha2", a2)
show("beta implied", mp.mpf("0.03") * a2)
show("sqrt(0.1)", mp.sqrt(mp.mpf("0.1")))
show("equal split alpha_i", 1 - mp.sqrt(mp.mpf("0.9")))


def oc2_exact(n1, c1, n2, c2, g, rho):
    a = c1 + mp.sqrt(n1) * g
    b = c2 + (mp.sqrt(n1) + mp.sqrt(n2)) * g
    s = mp.sqrt(1 - rho * rho)
    num = mp.quad(lambda z: (1 - ncdf((b - z - rho * z) / s)) * mp.npdf(z), [a, a + 2, a + 6, mp.inf])
    return num / (1 - ncdf(a))


print("# OC2 by direct integration")
g02 = nppf(0.02)
for rho in (0, 0.3, 0.6, -0.5):
    show(f"oc2 (85,17.05),(30,26) p=.02 rho={rho}", oc2_exact(85, 17.05, 30, 26, g02, mp.mpf(rho)))
show("oc1 (85,17.0497152625527) p=.02", 1 - ncdf(17.0497152625527 + mp.sqrt(85) * g02))
# Cross-check with the bivariate normal cdf: P(Z1 > a, (Z1+Z2)/sqrt2 > b/sqrt2).
a = 17.05 + math.sqrt(85) * float(g02)
b = 26 + (math.sqrt(85) + math.sqrt(30)) * float(g02)
biv = stats.multivariate_normal(mean=[0, 0], cov=[[1, 1 / math.sqrt(2)], [1 / math.sqrt(2), 1]])
joint = 1 - stats.norm.cdf(a) - stats.norm.cdf(b / math.sqrt(2)) + biv.cdf([a, b / math.sqrt(2)])
show("oc2 rho=0 via bivariate cdf", joint / stats.norm.sf(a))
show("orthant ratio a=b=0", (mp.mpf(1) / 4 + mp.asin(1 / mp.sqrt(2)) / (2 * mp.pi)) / mp.mpf("0.5"))

print("# stage-2 continuous solution for the normal spec")
a2f = float(a2)
ga = float(nppf(0.02))
gr = float(nppf(0.05))
c1 = float(-mp.sqrt(85) / 2 * (nppf(0.02) + nppf(0.05)))


def oc2_fast(n2, c2, g):
    aa = c1 + math.sqrt(85) * g
    bb = c2 + (math.sqrt(85) + math.sqrt(n2)) * g
    num = biv.cdf([aa, bb / math.sqrt(2)])
    joint = 1 - stats.norm.cdf(aa) - stats.norm.cdf(bb / math.sqrt(2)) + num
    return joint / stats.norm.sf(aa)


sol = optimize.fsolve(lambda v: [oc2_fast(v[0], v[1], ga) - (1 - a2f), oc2_fast(v[0], v[1], gr) - a2f], [23, 27],
                      xtol=1e-12)
show("continuous n2", sol[0])
show("continuous c2", sol[1])
res = optimize.minimize_scalar(lambda c: (oc2_fast(24, c, ga) - (1 - a2f)) ** 2 + (oc2_fast(24, c, gr) - a2f) ** 2,
                               bounds=(24, 30), method="bounded", options={"xatol": 1e-10})
show("c2 at n2=24", res.x)
show("oc2(aql) at n2=24", oc2_fast(24, res.x, ga))
show("oc2(rql) at n2=24", oc2_fast(24, res.x, gr))


print("# kernel estimators on the deterministic 60-point sample")
n = 60
data = np.array([float(nppf((i - 0.5) / n)) + 0.3 * math.sin(i) for i in range(1, n + 1)])


def kde_q(p, h):
    return optimize.brentq(lambda x: np.mean(stats.norm.cdf((x - data) / h)) - p, -20, 20, xtol=1e-14)


for p in (0.02, 0.5, 0.9):
    show(f"kde_quantile h=0.4 p={p}", kde_q(p, 0.4))

diffs = (data[:, None] - data[None, :])[np.triu_indices(n, 1)]


def bcv_exact(h):
    d = (diffs / h) ** 2
    s = np.sum(np.exp(-d / 4) * (d * d - 12 * d + 12))
    return (1 + s / (32 * n)) / (2 * n * h * math.sqrt(math.pi))


def phi4_exact(h):
    d = (diffs / h) ** 2
    s = 2 * np.sum(np.exp(-d / 2) * (d * d - 6 * d + 3)) + 3 * n
    return s / (n * (n - 1) * h ** 5 * math.sqrt(2 * math.pi))


def phi6_exact(h):
    d = (diffs / h) ** 2
    s = 2 * np.sum(np.exp(-d / 2) * (d ** 3 - 15 * d * d + 45 * d - 15)) - 15 * n
    return s / (n * (n - 1) * h ** 7 * math.sqrt(2 * math.pi))


sd = np.std(data, ddof=1)
grid = np.exp(np.linspace(math.log(sd / n), math.log(5 * sd * n ** -0.2), 4000))
k = int(np.argmin([bcv_exact(h) for h in grid]))
hb = optimize.minimize_scalar(bcv_exact, bounds=(grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]),
                              method="bounded", options={"xatol": 1e-12}).x
show("bcv bandwidth (unbinned)", hb)
iqr = np.quantile(data, 0.75) - np.quantile(data, 0.25)
scale = min(sd, iqr / 1.349)
aa = 1.24 * scale * n ** (-1 / 7)
bb = 1.23 * scale * n ** (-1 / 9)
c1k = 1 / (2 * math.sqrt(math.pi) * n)
td = -phi6_exact(bb)
alph2 = 1.357 * (phi4_exact(aa) / td) ** (1 / 7)
hs = optimize.brentq(lambda h: (c1k / phi4_exact(alph2 * h ** (5 / 7))) ** 0.2 - h, 0.01, 3, xtol=1e-14)
show("sj bandwidth (unbinned)", hs)


print("# Bernstein-Durrmeyer by direct integration")
ys = sorted([0.1 + 0.8 * ((i * 7) % 20) / 19 + 0.01 * math.cos(i) for i in range(20)])
m = len(ys)
lo, hi = 0.0, 1.0
N = 5


def basis(i, u):
    return mp.binomial(N, i) * u ** i * (1 - u) ** (N - i)


def a_coef(i):
    return sum(mp.quad(lambda u: ys[k - 1] * basis(i, u), [mp.mpf(k - 1) / m, mp.mpf(k) / m]) for k in range(1, m + 1))


def emp_cdf(u):
    return sum(1 for y in ys if y <= u) / m


def b_coef(i):
    pts = [0] + sorted(ys) + [1]
    return sum(mp.quad(lambda u: emp_cdf((pts[j] + pts[j + 1]) / 2) * basis(i, u), [pts[j], pts[j + 1]])
               for j in range(len(pts) - 1))


A = [a_coef(i) for i in range(N + 1)]
B = [b_coef(i) for i in range(N + 1)]
for p in (0.1, 0.5, 0.9):
    show(f"bd quantile N=5 p={p}", (N + 1) * sum(A[i] * basis(i, mp.mpf(p)) for i in range(N + 1)))
for x in (0.25, 0.6):
    show(f"bd cdf N=5 x={x}", (N + 1) * sum(B[i] * basis(i, mp.mpf(x)) for i in range(N + 1)))
show("bd N=0 constant", sum(mp.mpf(y) for y in ys) / m)
show("bd tolerance m=250", 1 / (2 * mp.sqrt(250) / mp.sqrt(2 * mp.log(mp.log(250)))))


print("# mixtures (variance reading)")
models = {
    1: [(1.0, 220, 4)],
    2: [(0.9, 220, 4), (0.1, 230, 8)],
    3: [(0.2, 200, 4), (0.6, 220, 4), (0.2, 230, 8)],
    4: [(0.2, 212, 4), (0.6, 220, 8), (0.2, 228, 6)],
}
for mid, comps in models.items():
    mean = sum(w * mu for w, mu, _ in comps)
    var = sum(w * (v + (mu - mean) ** 2) for w, mu, v in comps)
    F = lambda x, c=comps: sum(w * ncdf((x - mu) / mp.sqrt(v)) for w, mu, v in c)
    q = mp.findroot(lambda x: F(x) - mp.mpf("0.02"), mean - 2 * mp.sqrt(var))
    show(f"model {mid} mean", mean)
    show(f"model {mid} variance", var)
    show(f"model {mid} q(0.02)", q)
    show(f"model {mid} G^-1(0.02)", (q - mean) / mp.sqrt(var))
