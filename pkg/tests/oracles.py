"""Independent reference computations used by the tests.

None of these import the package; each recomputes a quantity from first
principles (matrix products, symbolic expansion, brute-force enumeration,
numerical integration) so that agreement means two derivations meet.
"""

import itertools
import math

import numpy as np
import sympy as sp
from scipy import integrate


def splitter(r):
    t = 1.0 - r
    return np.array([[math.sqrt(t), 1j * math.sqrt(r)], [1j * math.sqrt(r), math.sqrt(t)]])


def splitter_out(inputs, r):
    return splitter(r) @ np.asarray(inputs, dtype=complex)


def mach_zehnder(phi):
    """Detector intensities (D1, D2) from a product of 2x2 matrices."""
    arms = np.diag([np.exp(1j * phi), 1.0])  # lower arm carries the shifter
    out = splitter(0.5) @ arms @ splitter(0.5) @ np.array([1.0, 0.0])
    return abs(out[0]) ** 2, abs(out[1]) ** 2


def induced_coherence_symbolic(t_value):
    """P(D1), P(D2) for two crystals whose signals overlap with weight ``t``.

    The state after BS2 is expanded symbolically as a mixture of the
    coherent and incoherent parts of the signal pair and then evaluated.
    """
    t, a1, a2 = sp.symbols("t a1 a2")
    r = sp.Rational(1, 2)
    s = sp.sqrt(r)
    # pump amplitude at NL1 (reflected at BS1) and NL2 (transmitted)
    nl1, nl2 = sp.I * s, s
    # BS2: in0 <- NL2 signal, in1 <- NL1 signal
    d1 = s * a2 + sp.I * s * a1
    d2 = sp.I * s * a2 + s * a1
    def intensity(expr):
        full = sp.expand(expr * sp.conjugate(expr))
        coherent = full.subs({a1: nl1, a2: nl2})
        incoherent = (sp.Abs(expr.coeff(a1) * nl1) ** 2 + sp.Abs(expr.coeff(a2) * nl2) ** 2)
        return sp.simplify(t * coherent + (1 - t) * incoherent)
    return tuple(float(intensity(d).subs(t, t_value)) for d in (d1, d2))


def split_rule_enumeration(r):
    """Probability that the acron reflects, enumerating both branches by hand."""
    amps = splitter_out([1.0, 0.0], r)
    weights = [abs(a) ** 2 for a in amps]
    total = sum(weights)
    return {port: w / total for port, w in zip(("transmit", "reflect"), weights)}


def chi2_sf_integrated(x, dof):
    k = dof / 2.0
    pdf = lambda y: y ** (k - 1) * math.exp(-y / 2) / (2 ** k * math.gamma(k))
    val, _ = integrate.quad(pdf, x, math.inf)
    return val


def wilson_direct(count, n, z):
    """Solve |p_hat - p| = z sqrt(p(1-p)/n) for p as a quadratic."""
    p_hat = count / n
    a = 1 + z * z / n
    b = -(2 * p_hat + z * z / n)
    c = p_hat * p_hat
    disc = math.sqrt(b * b - 4 * a * c)
    return (-b - disc) / (2 * a), (-b + disc) / (2 * a)


def bomb_tester_branches():
    """Total probability of each outcome by explicit branch enumeration."""
    probs = {"Explosion": 0.0, "D1": 0.0, "D2": 0.0}
    lower = 0.5  # transmitted at BS1 toward the bomb
    probs["Explosion"] += lower
    for port, p in zip(("D1", "D2"), (0.5, 0.5)):
        probs[port] += (1 - lower) * p
    return probs


def all_choice_sequences(arities):
    return list(itertools.product(*[range(a) for a in arities]))
