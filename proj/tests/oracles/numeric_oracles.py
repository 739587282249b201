"""Independent high-precision oracles for values frozen into the C++ tests.

Run: python3 tests/oracles/numeric_oracles.py
"""
from mpmath import mp, mpf, log10, pi, ceil

mp.dps = 40
C = mpf(299792458)


def fspl(d, f):
    return 20 * log10(4 * pi * mpf(d) * mpf(f) / C)


def noise(bw):
    return -174 + 10 * log10(mpf(bw))


print("fspl(30, 2.6e9)      =", mp.nstr(fspl(30, 2.6e9), 12))
print("fspl(1, 2.6e9)       =", mp.nstr(fspl(1, 2.6e9), 12))
print("fspl(60, 2.6e9)-30m  =", mp.nstr(fspl(60, 2.6e9) - fspl(30, 2.6e9), 12))
print("noise(1.4e6)         =", mp.nstr(noise(1.4e6), 12))
print("snr(0dBm,30m)        =", mp.nstr(0 - fspl(30, 2.6e9) - noise(1.4e6), 12))
print("snr(-80dBm,30m)      =", mp.nstr(-80 - fspl(30, 2.6e9) - noise(1.4e6), 12))
print("area(30)             =", mp.nstr(pi * 30**2, 12))

table = [(1, 30.12), (5, 33.49), (10, 45.87), (20, 60.19), (30, 84.63)]
n = len(table)
sx = sum(mpf(x) for x, _ in table)
sy = sum(mpf(y) for _, y in table)
sxx = sum(mpf(x) ** 2 for x, _ in table)
sxy = sum(mpf(x) * mpf(y) for x, y in table)
b = (n * sxy - sx * sy) / (n * sxx - sx**2)
a = (sy - b * sx) / n
print("ols a =", mp.nstr(a, 12), " b =", mp.nstr(b, 12))
for x, y in table:
    fit = a + b * x
    print(f"  n={x:2d} fit={mp.nstr(fit, 10)} resid%={mp.nstr(abs(fit - y) / y * 100, 6)}")
print("linear(10) =", mp.nstr(a + b * 10, 10))
print("linear(21) =", mp.nstr(a + b * 21, 10))
print("ceil(58241/area) =", ceil(mpf(58241) / (pi * 900)))
for x, y in table:
    area = pi * 900 * x
    printed = 2826 * x
    print(f"  n={x} ceil(printed/area)={ceil(mpf(printed) / (pi * 900))} dev%={mp.nstr(abs(area - printed) / printed * 100, 6)}")

# Table-mode interpolation/extrapolation
def table_t(k):
    if k == 0:
        return mpf(0)
    for (x0, y0), (x1, y1) in zip(table, table[1:]):
        if x0 <= k <= x1:
            return mpf(y0) + (mpf(y1) - mpf(y0)) * (k - x0) / (x1 - x0)
    (x0, y0), (x1, y1) = table[-2], table[-1]
    return mpf(y1) + (mpf(y1) - mpf(y0)) * (k - x1) / (x1 - x0)

print("table(2) =", mp.nstr(table_t(2), 10), " table(40) =", mp.nstr(table_t(40), 10), " table(15) =", mp.nstr(table_t(15), 10))
