"""Independent high-precision reference formulas (mpmath, 50 digits).

Written from the model definitions alone; nothing here imports the package,
so agreement is a real cross-check rather than a tautology.
"""

import mpmath as mp

mp.mp.dps = 50

N0_DBM_HZ = -158
BANDWIDTH = 20_000_000
MODEL_BITS = 2_510_000 * 8
ALPHA = 1_800_348
CAPACITANCE = mp.mpf("1e-28")


def dbm_to_w(dbm):
    return mp.power(10, (mp.mpf(dbm) - 30) / 10)


N0 = dbm_to_w(N0_DBM_HZ)


def gain(d_m, intercept=127, slope=30):
    pl = intercept + slope * mp.log10(mp.mpf(d_m) / 1000)
    return mp.power(10, -pl / 10)


def rate(p, g, b=BANDWIDTH, n0=N0):
    p, g, b = mp.mpf(p), mp.mpf(g), mp.mpf(b)
    return b * mp.log(1 + g * p / (b * n0), 2)


def tx_time(m, r):
    return mp.mpf(m) / mp.mpf(r)


def tx_energy(p, m, g, b=BANDWIDTH, n0=N0):
    return mp.mpf(m) * mp.mpf(p) / rate(p, g, b, n0)


def comp_time(f, it, alpha, samples, c):
    return mp.mpf(it) * alpha * samples / (mp.mpf(c) * mp.mpf(f))


def comp_energy(f, it, alpha, samples, c, cap):
    return mp.mpf(cap) * it * alpha * samples * mp.mpf(f) ** 2 / c


def rel_err(value, ref):
    ref = mp.mpf(ref)
    return abs(mp.mpf(value) - ref) / abs(ref)
