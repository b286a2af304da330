"""Independent oracles for the test suite.

Everything here is written directly from the system's defining update
rules, deliberately bypassing the configurable engine (no expression
parsing, no code generation): plain Python transcriptions of the two
preset systems, a brute-force logistic orbit, and the closed-form
Lyapunov exponents of the fully chaotic logistic and tent maps.
"""

import math

LN2 = math.log(2.0)


def mod1(v):
    f = v - math.floor(v)
    return 0.0 if f >= 1.0 else f


def cot(v):
    return math.cos(v) / math.sin(v)


def tent(r, x):
    return 2.0 * r * x if x < 0.5 else 2.0 * r * (1.0 - x)


def sinm(r, x):
    return r * math.sin(math.pi * x)


def logisticm(r, x):
    return 4.0 * r * x * (1.0 - x)


def case_i_step(r, x, y, z, w):
    """One update of the first preset (current-value coupling)."""
    sin, cos, tan, tanh, cosh, exp, log, pi = (
        math.sin, math.cos, math.tan, math.tanh, math.cosh, math.exp, math.log, math.pi,
    )
    if z < 0.5:
        x1 = mod1(1 * cosh(tent(r, x))
                  + (15 * tanh(r * x + z) + sin(w) + 12 * cos(r * x))
                  + sin(2 * ((6 - r) * z / 2.0)))
    else:
        x1 = mod1(16 * cot(sinm(r, x))
                  + (-7 * r * y + exp(1 + 2 * w) + z + 7 * log(pi * r * x))
                  + 4 * ((2 - r) * (1 - z) / 2.0))
    if x < 0.5:
        y1 = mod1(10 * sinm(r, y)
                  + (2 * tan(r * x + y + 2 * z + w))
                  + cot((50 - r) * x / 2.0))
    else:
        y1 = mod1(20 * sin(pi * sinm(r, y))
                  + (z + w + 14 * exp(20 * r * x))
                  + exp(2 * ((30 - r) * (1 - x) / 2.0)))
    if y < 0.5:
        z1 = mod1(10 * tent(r, z)
                  + (2 * tan(r * x + y) + w + z)
                  + exp(2 * ((50 - r) * y / 2.0)))
    else:
        z1 = mod1(20 * sin(pi * tent(r, z))
                  + (14 * exp(20 * r * x + w) + sin(z))
                  + cot(4 * ((30 - r) * (1 - y) / 2.0)))
    if z < 0.5:
        w1 = mod1(10 * logisticm(r, w)
                  + (2 * tan(r * x + y + z) + w)
                  + exp(2 * ((50 - r) * z / 2.0)))
    else:
        w1 = mod1(20 * exp(pi * logisticm(r, w))
                  + (14 * exp(20 * r * x + w) + z)
                  + cot(4 * ((30 - r) * (1 - z) / 2.0)))
    return x1, y1, z1, w1


def case_ii_step(r, x, y, z, w):
    """One update of the second preset (next-value coupling)."""
    sin, cos, exp, log = math.sin, math.cos, math.exp, math.log
    if z < 0.5:
        x1 = mod1(7 * cos(tent(r, x))
                  + (sin(w + z) + r * x * y)
                  + cos(20 * ((1 - r) * z / 2.0)))
    else:
        x1 = mod1(2 * sinm(r, x)
                  + (sin(r * y + x) + log(7 + w + z))
                  + 5 * ((2 - r) * (1 - z) / 2.0))
    if x1 < 0.5:
        y1 = mod1(4 * sinm(r, y)
                  + (r * x + y + exp(r * x1) + cos(z + w))
                  + log(4 * ((3 - r) * x1 / 2.0)))
    else:
        y1 = mod1(4 * sinm(r, y)
                  + (z - w + log(20 * r * x1 + x))
                  + cos(6 * ((3 - r) * (1 - x1) / 2.0)))
    if y1 < 0.5:
        z1 = mod1(3 * exp(tent(r, z))
                  + (cot(r * x1 + y1) + sin(x + w * z))
                  + exp(4 * ((1 - r) * y1 / 2.0)))
    else:
        z1 = mod1(5 * logisticm(r, z)
                  + (exp(x + w + z) + sin(x1 + y1))
                  + cos((2 - r) * (1 - y1) / 2.0))
    if z1 < 0.5:
        w1 = mod1(5 * logisticm(r, w)
                  + (2 * cot(r * x1 + y1 + z1) + log(x + w))
                  + exp(4 * ((2 - r) * z1 / 2.0)))
    else:
        w1 = mod1(5 * cos(logisticm(r, w))
                  + (exp(r * y1 + x1 + 2 * w) + y + z)
                  + cos((2 - r) * (1 - z1) / 2.0))
    return x1, y1, z1, w1


def logistic_orbit(r, x0, burn, count):
    """Brute-force orbit of x -> mod1(4*r*x*(1-x))."""
    x = x0
    for _ in range(burn):
        x = mod1(logisticm(r, x))
    out = []
    for _ in range(count):
        x = mod1(logisticm(r, x))
        out.append(x)
    return out
