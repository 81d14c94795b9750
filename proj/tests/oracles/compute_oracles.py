"""High-precision reference values frozen into the C++ unit tests.

Every value here is computed independently of the C++ code paths it checks:
closed forms and direct definitions evaluated at 50 digits with mpmath.
Run: python3 tests/oracles/compute_oracles.py
"""
import mpmath as mp

mp.mp.dps = 50


def law_of_cosines(ra, rb, theta):
    return mp.acosh(mp.cosh(ra) * mp.cosh(rb) - mp.sinh(ra) * mp.sinh(rb) * mp.cos(theta))


def phi(r1, r2, theta, t):
    # Angle (as a fraction of theta) of the spatial vector
    # (1-t) sinh(r1) u1 + t sinh(r2) u2, measured from u1. Computed with
    # explicit 2D coordinates in the plane of u1, u2.
    x = (1 - t) * mp.sinh(r1) + t * mp.sinh(r2) * mp.cos(theta)
    y = t * mp.sinh(r2) * mp.sin(theta)
    return mp.acos(x / mp.sqrt(x * x + y * y)) / theta


def ball_volume(r, d):
    return mp.quad(lambda s: mp.sinh(s) ** d, [0, r])


def cap_measure(theta, d):
    num = mp.quad(lambda s: mp.sin(s) ** (d - 1), [0, theta])
    den = mp.quad(lambda s: mp.sin(s) ** (d - 1), [0, mp.pi])
    return num / den


deg = mp.pi / 180

print("distance (2;0deg)-(2;90deg):", mp.nstr(law_of_cosines(2, 2, mp.pi / 2), 20))
print("ball_volume(1, d=1):", mp.nstr(ball_volume(1, 1), 20))
print("ball_volume(3, d=1):", mp.nstr(ball_volume(3, 1), 20))
print("ball_volume(2, d=2):", mp.nstr(ball_volume(2, 2), 20))
print("ball_volume(2, d=3):", mp.nstr(ball_volume(2, 3), 20))
print("ball_volume(1.5, d=4):", mp.nstr(ball_volume(mp.mpf('1.5'), 4), 20))
print("annulus(2,3) d=1:", mp.nstr(ball_volume(3, 1) - ball_volume(2, 1), 20))
print("cap_measure(0.3, d=2):", mp.nstr(cap_measure(mp.mpf('0.3'), 2), 20))
print("cap_measure(0.7, d=3):", mp.nstr(cap_measure(mp.mpf('0.7'), 3), 20))
print("tanh(1):", mp.nstr(mp.tanh(1), 20))

# arc (3;0deg) -> (2;20deg), t = 1/2
th = 20 * deg
p = phi(3, 2, th, mp.mpf('0.5'))
print("phi(0.5) for (3;0)->(2;20deg):", mp.nstr(p, 20), " direction deg:", mp.nstr(20 * p, 20))

# CFD on the chain a=(1;0deg) <- b=(2;5deg) <- c=(3;12deg), base 1.5, top 2.5
p_cb = phi(3, 2, 7 * deg, mp.mpf('0.5'))
p_ba = phi(2, 1, 5 * deg, mp.mpf('0.5'))
top = 12 * deg - 7 * deg * p_cb
base = 5 * deg - 5 * deg * p_ba
cfd = (top - 5 * deg) + (5 * deg - base)
print("chain distances: d(b,a)=", mp.nstr(law_of_cosines(2, 1, 5 * deg), 12),
      " d(c,b)=", mp.nstr(law_of_cosines(3, 2, 7 * deg), 12),
      " d(c,a)=", mp.nstr(law_of_cosines(3, 1, 12 * deg), 12))
print("cfd chain:", mp.nstr(cfd, 20), " top crossing deg:", mp.nstr(top / deg, 20),
      " base crossing deg:", mp.nstr(base / deg, 20))

# MBD with one extra vertex: a=(1;0deg) <- b=(2;3deg) <- c=(3;-4deg); base level 1.5, top 2.5
p_ba = phi(2, 1, 3 * deg, mp.mpf('0.5'))
base = 3 * deg * (1 - p_ba)             # crossing at 1.5 measured from a's direction
cfd_b = 3 * deg - base                  # vertex b
p_cb = phi(3, 2, 7 * deg, mp.mpf('0.5'))
top = 3 * deg - 7 * deg * (1 - p_cb)    # crossing at 2.5 on c->b
cfd_top = cfd_b + (3 * deg - top)
cfd_c = cfd_b + 7 * deg
print("mbd example: cfd(b)=", mp.nstr(cfd_b, 20), " cfd(top 2.5)=", mp.nstr(cfd_top, 20),
      " cfd(c)=", mp.nstr(cfd_c, 20))
