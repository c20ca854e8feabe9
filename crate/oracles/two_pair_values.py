"""Independent mpmath values for the two-pair basis at kappa = 5.

Integrates the single screening variable along the segment with the endpoint
singularities removed by the substitution u = x_a + s^(1/(1+beta)), in 30-digit
arithmetic. The printed numbers are frozen in the evaluate tests.
"""
import mpmath as mp

mp.mp.dps = 30


def two_pair(kappa, x, a, b, conjugate=3):
    k = mp.mpf(kappa)
    x = [mp.mpf(v) for v in x]
    powers = [12 / k - 2 if l == conjugate else -4 / k for l in range(4)]

    def spectators(u):
        v = mp.mpf(1)
        for l in range(4):
            if l not in (a, b):
                v *= abs(u - x[l]) ** powers[l]
        return v

    qa, qb = 1 / (1 + powers[a]), 1 / (1 + powers[b])
    mid = (x[a] + x[b]) / 2
    left = lambda s: qa * s ** (qa - 1) * (s**qa) ** powers[a] * (x[b] - x[a] - s**qa) ** powers[b] * spectators(x[a] + s**qa)
    right = lambda s: qb * s ** (qb - 1) * (s**qb) ** powers[b] * (x[b] - x[a] - s**qb) ** powers[a] * spectators(x[b] - s**qb)
    integral = mp.quad(left, [0, (mid - x[a]) ** (1 / qa)]) + mp.quad(right, [0, (x[b] - mid) ** (1 / qb)])

    n = -2 * mp.cos(4 * mp.pi / k)
    line = n * mp.gamma(2 - 8 / k) / mp.gamma(1 - 4 / k) ** 2
    external = 1
    for i in range(4):
        for j in range(i + 1, 4):
            external *= abs(x[j] - x[i]) ** (1 - 6 / k if conjugate in (i, j) else 2 / k)
    return n * line * external * integral


if __name__ == "__main__":
    x = ["0", "0.3", "0.7", "1"]
    print(two_pair(5, x, 0, 1), two_pair(5, x, 1, 2))
