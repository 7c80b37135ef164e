"""Arbitrary-precision special-function kernel.

Provides the archimedean building blocks everything else is assembled from:

  gamma_r     Gamma_R(s) = pi^(-s/2) Gamma(s/2)
  trigamma    psi'(s), recurrence + Bernoulli asymptotic series (own code)
  bessel_k    K_nu(y) for complex order, cosh-integral with a certified
              trapezoid rule (the integrand decays doubly exponentially, so
              the equal-step rule converges like exp(-c/h))
  hyp2f1      Gauss 2F1 on the closed negative real axis, series + Pfaff +
              1/(1-z) connection with Cauchy-circle averaging at degenerate
              parameter differences
  gen_binom   generalized binomial coefficients, exact on rational input
  quad_mellin certified Mellin quadrature for exponentially decaying kernels

Every function takes an explicit PrecisionContext and does its arithmetic
inside ctx.workprec(); no global mpmath state is touched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .errors import ConvergenceError, DegenerateError, PoleError
from .precision import (ComplexParam, PrecisionContext, default_context,
                        to_mpc, to_real)

__all__ = [
    "gamma_r", "trigamma", "bessel_k", "hyp2f1", "gen_binom",
    "quad_mellin", "QuadResult",
]


def _nearest_nonpos_int(z) -> int | None:
    """The non-positive integer nearest to z, or None if Re(z) > 1/2."""
    n = int(mp.nint(mp.re(z)))
    if n > 0:
        return None
    return n


# ---------------------------------------------------------------------------
# Gamma_R
# ---------------------------------------------------------------------------

def gamma_r(s, ctx: PrecisionContext | None = None):
    """Gamma_R(s) = pi^(-s/2) * Gamma(s/2).

    Poles at s in {0, -2, -4, ...}; raises PoleError within ctx.tol of one.
    """
    ctx = ctx or default_context()
    with ctx.workprec():
        s = to_mpc(s, ctx)
        half = s / 2
        n = _nearest_nonpos_int(half)
        if n is not None and abs(s - 2 * n) < ctx.tol:
            raise PoleError(f"Gamma_R pole at s={2*n}; got s={s}")
        return mp.power(mp.pi, -half) * mp.gamma(half)


# ---------------------------------------------------------------------------
# trigamma
# ---------------------------------------------------------------------------

def trigamma(s, ctx: PrecisionContext | None = None):
    """psi'(s) = d^2/ds^2 log Gamma(s).

    Algorithm: push the argument right with psi'(s) = psi'(s+1) + 1/s^2 until
    Re(s) is comfortably large, then the Bernoulli asymptotic series
        psi'(w) = 1/w + 1/(2 w^2) + sum_j B_{2j} / w^{2j+1}.
    The shift threshold is chosen so the optimally truncated series bottoms
    out below the working epsilon (min term ~ e^{-2 pi |w|}).
    """
    ctx = ctx or default_context()
    with ctx.workprec():
        s = to_mpc(s, ctx)
        n = _nearest_nonpos_int(s)
        if n is not None and abs(s - n) < ctx.tol:
            raise PoleError(f"trigamma pole at s={n}; got s={s}")

        bits = ctx.work_bits + 24
        shift_to = int(bits * math.log(2) / (2 * math.pi)) + 4
        acc = mp.mpc(0)
        w = s
        while mp.re(w) < shift_to and abs(w) < 2 * shift_to:
            acc += 1 / (w * w)
            w += 1

        inv = 1 / w
        inv2 = inv * inv
        total = inv + inv2 / 2
        power = inv * inv2  # w^{-(2j+1)} at j=1
        eps = mp.mpf(2) ** (-bits)
        prev = mp.inf
        for j in range(1, 4 * shift_to + 8):
            term = mp.bernoulli(2 * j) * power
            if abs(term) >= prev:
                break  # past the optimal truncation point
            total += term
            prev = abs(term)
            if prev <= eps * abs(total):
                break
            power *= inv2
        if mp.im(s) == 0:
            return acc.real + total.real if mp.im(total) == 0 else acc + total
        return acc + total


# ---------------------------------------------------------------------------
# K-Bessel
# ---------------------------------------------------------------------------

def _k_trapezoid(nu, y, ctx: PrecisionContext):
    """K_nu(y) = int_0^inf exp(-y cosh t) cosh(nu t) dt by the trapezoid rule.

    The integrand is even and entire in t with double-exponential decay, so
    the equal-step trapezoid rule converges geometrically in 1/h; aliasing is
    controlled by the e^{-pi |xi| /2} decay of the integrand's Fourier
    transform, which is what the initial step-size heuristic encodes.  The
    returned value is certified by step halving.
    """
    bits = ctx.work_bits + 24
    L = bits * math.log(2) + 8
    abs_im = abs(float(mp.im(nu)))
    abs_re = abs(float(mp.re(nu)))
    yf = float(y)

    # truncation point: y cosh(T) - |Re nu| T >= y + L
    T = math.acosh(1 + L / yf)
    for _ in range(3):
        T = math.acosh(1 + (L + abs_re * T) / yf)
    T = mp.mpf(T) * mp.mpf("1.05")

    h = mp.mpf(math.pi**2 / (L + math.pi * abs_im / 2 + 6))

    real_case = mp.im(nu) == 0 or mp.re(nu) == 0
    if mp.re(nu) == 0:
        r = mp.im(nu)
        f = lambda t: mp.exp(-y * mp.cosh(t)) * mp.cos(r * t)
    elif mp.im(nu) == 0:
        nr = mp.re(nu)
        f = lambda t: mp.exp(-y * mp.cosh(t)) * mp.cosh(nr * t)
    else:
        f = lambda t: mp.exp(-y * mp.cosh(t)) * mp.cosh(nu * t)

    def trap(step):
        m = int(mp.ceil(T / step))
        total = f(mp.mpf(0)) / 2
        for j in range(1, m + 1):
            total += f(j * step)
        return total * step

    def refine(prev_sum, step):
        # prev_sum computed at 2*step; add the midpoints
        m = int(mp.ceil(T / step))
        total = mp.mpf(0)
        for j in range(1, m + 1, 2):
            total += f(j * step)
        return prev_sum / 2 + total * step

    val = trap(h)
    target = mp.mpf(2) ** (-(ctx.work_bits + 8))
    for _ in range(ctx.max_quad_depth):
        h = h / 2
        new = refine(val, h)
        delta = abs(new - val)
        val = new
        if delta <= target * max(abs(val), mp.mpf(1e-30)) or delta <= target:
            return val if not real_case else (val.real if mp.im(val) != 0 else val)
    raise ConvergenceError(
        f"bessel_k quadrature stalled at step {h}", achieved=float(delta))


def _k_asymptotic(nu, y, ctx: PrecisionContext):
    """Large-argument series sqrt(pi/2y) e^{-y} sum_m a_m(nu)/y^m, or None.

    Returns None when the series cannot reach the working tolerance before
    its terms turn around (happens for |nu|^2 comparable to y).
    """
    with mp.workprec(ctx.work_bits + 24):
        z = 4 * nu * nu
        term = mp.mpf(1)
        acc = mp.mpc(1) if mp.im(nu) != 0 and mp.re(nu) != 0 else mp.mpf(1)
        eps = mp.mpf(2) ** (-(ctx.work_bits + 8))
        m = 1
        while m < 8 * ctx.work_bits:
            nxt = term * (z - (2 * m - 1) ** 2) / (8 * m * y)
            if abs(nxt) >= abs(term):
                return None
            term = nxt
            acc += term
            if abs(term) <= eps * abs(acc):
                return mp.sqrt(mp.pi / (2 * y)) * mp.exp(-y) * acc
            m += 1
        return None


def bessel_k(nu, y, ctx: PrecisionContext | None = None):
    """Modified Bessel K_nu(y) for complex order, real y > 0.

    Evenness in nu is exact by construction (the order is canonicalized to
    the Re >= 0 / Im >= 0 half-plane before evaluation).
    """
    ctx = ctx or default_context()
    with ctx.workprec():
        nu = to_mpc(nu, ctx)
        y = to_real(y, ctx)
        if y <= 0:
            raise ValueError("bessel_k needs y > 0")
        if mp.re(nu) < 0 or (mp.re(nu) == 0 and mp.im(nu) < 0):
            nu = -nu
        if mp.im(nu) == 0:
            nu = nu.real
        if float(y) > ctx.work_bits * math.log(2) / 2:
            val = _k_asymptotic(nu, y, ctx)
            if val is not None:
                return val
        return _k_trapezoid(nu, y, ctx)


# ---------------------------------------------------------------------------
# Gauss hypergeometric on z <= 0
# ---------------------------------------------------------------------------

def _gauss_series(a, b, c, w, bits, cap=200000):
    """sum_j (a)_j (b)_j / ((c)_j j!) w^j for |w| < 1 (or terminating)."""
    term = mp.mpc(1)
    acc = mp.mpc(1)
    eps = mp.mpf(2) ** (-(bits + 4))
    j = 0
    while j < cap:
        term = term * (a + j) * (b + j) / ((c + j) * (1 + j)) * w
        acc += term
        if abs(term) <= eps * (abs(acc) + 1):
            return acc
        j += 1
    raise ConvergenceError(f"2F1 series did not converge at w={w}")


def _exact_nonpos_int(x) -> int | None:
    n = int(mp.nint(mp.re(x)))
    if n > 0:
        return None
    if x == n:
        return n
    return None


def _hyp2f1_drive(a, b, c, z, bits, deg_tol):
    """Dispatch on z <= 0 assuming non-degenerate parameters."""
    if z == 0:
        return mp.mpc(1)
    # terminating cases are valid for every z
    na, nb = _exact_nonpos_int(a), _exact_nonpos_int(b)
    if na is not None or nb is not None:
        return _gauss_series(a, b, c, mp.mpc(z), bits)
    if z > -0.5:
        return _gauss_series(a, b, c, mp.mpc(z), bits)
    if z > -1:
        # Pfaff: F(a,b;c;z) = (1-z)^(-a) F(a, c-b; c; z/(z-1))
        w = z / (z - 1)
        return mp.power(1 - z, -a) * _gauss_series(a, c - b, c, mp.mpc(w), bits)
    # connection in w = 1/(1-z) in (0, 1/2]
    w = 1 / (1 - z)
    d = b - a
    if abs(d - mp.nint(mp.re(d))) < deg_tol:
        raise DegenerateError(f"2F1 connection degenerate: b-a={d}")
    gc = mp.gamma(c)
    t1 = (gc * mp.gamma(d) * mp.rgamma(b) * mp.rgamma(c - a)
          * mp.power(1 - z, -a) * _gauss_series(a, c - b, 1 - d, mp.mpc(w), bits))
    t2 = (gc * mp.gamma(-d) * mp.rgamma(a) * mp.rgamma(c - b)
          * mp.power(1 - z, -b) * _gauss_series(b, c - a, 1 + d, mp.mpc(w), bits))
    return t1 + t2


def hyp2f1(a, b, c, z, ctx: PrecisionContext | None = None):
    """Gauss 2F1(a, b; c; z) for real z <= 0.

    |z| < 1 by series (Pfaff-mapped to z/(z-1) past -1/2); z <= -1 by the
    1/(1-z) connection formula.  When b-a sits within 10*ctx.tol of an
    integer the connection prefactors blow up pairwise; the value is then
    recovered as the mean of the function over a small circle in the
    parameter difference (Cauchy mean-value), which is well-conditioned.
    """
    ctx = ctx or default_context()
    with ctx.workprec():
        a = to_mpc(a, ctx)
        b = to_mpc(b, ctx)
        c = to_mpc(c, ctx)
        z = to_real(z, ctx)
        if z > 0:
            raise ValueError("hyp2f1 implemented for z <= 0 only")
        n = _nearest_nonpos_int(c)
        if n is not None and abs(c - n) < ctx.tol:
            raise PoleError(f"2F1 parameter c={c} at a pole")

        bits = ctx.work_bits + 24
        deg_tol = mp.mpf(10) * ctx.tol
        try:
            return _hyp2f1_drive(a, b, c, z, bits, deg_tol)
        except DegenerateError:
            # Cauchy-circle average over a perturbation e of the parameter
            # pair (a+e, b-e); the target is analytic in e, each sample is
            # safely away from the degeneracy, and the M-point mean equals
            # the center value up to O(rho^M).
            rho = mp.mpf("0.015625")  # 2^-6
            m_pts = 16
            if 2 * rho <= deg_tol:
                raise
            acc = mp.mpc(0)
            for j in range(m_pts):
                e = rho * mp.expjpi(mp.mpf(2 * j) / m_pts)
                acc += _hyp2f1_drive(a + e, b - e, c, z, bits, deg_tol / 4)
            return acc / m_pts


# ---------------------------------------------------------------------------
# generalized binomial
# ---------------------------------------------------------------------------

def gen_binom(s, l: int, exact: bool = False, ctx: PrecisionContext | None = None):
    """binom(s, l) = prod_{r=0}^{l-1} (s - r) / l!  for integer l >= 0.

    With exact=True and rational/ComplexParam input the result is exact
    (Fraction, or ComplexParam for complex rational input).
    """
    if l < 0 or l != int(l):
        raise ValueError("l must be a non-negative integer")
    if exact:
        if isinstance(s, ComplexParam):
            num = ComplexParam(Fraction(1))
            for r in range(l):
                num = num * (s - r)
            return num / Fraction(math.factorial(l))
        s = Fraction(s)
        num = Fraction(1)
        for r in range(l):
            num *= s - r
        return num / math.factorial(l)
    ctx = ctx or default_context()
    with ctx.workprec():
        s = to_mpc(s, ctx)
        num = mp.mpc(1)
        for r in range(l):
            num *= s - r
        return num / mp.factorial(l)


# ---------------------------------------------------------------------------
# certified Mellin quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadResult:
    value: mp.mpc
    error: float

    def __complex__(self):
        return complex(self.value)


def quad_mellin(kernel, s, ctx: PrecisionContext | None = None, *,
                lower=0, upper=None, points=(1,)) -> QuadResult:
    """Certified int_lower^upper kernel(y) y^(s-1/2) dy/y.

    The kernel must decay exponentially at infinity and be O(y^sigma) at 0
    with sigma + Re(s) - 1/2 > 0.  The value is computed twice at different
    tanh-sinh depths; the reported error is the depth-to-depth difference
    plus mpmath's own estimate, and a ConvergenceError carries the achieved
    bound when the budget is missed.
    """
    ctx = ctx or default_context()
    with ctx.workprec():
        s = to_mpc(s, ctx)
        expo = s - mp.mpf(3) / 2

        def f(y):
            return kernel(y) * mp.power(y, expo)

        interval = [lower, *points, mp.inf if upper is None else upper]
        deg = max(4, min(ctx.max_quad_depth, 8))
        v1 = mp.quad(f, interval, maxdegree=deg - 1)
        v2, est = mp.quad(f, interval, maxdegree=deg, error=True)
        err = float(abs(v1 - v2) + abs(est))
        if err > ctx.tol:
            raise ConvergenceError(
                f"quad_mellin error bound {err:.3e} exceeds tol {ctx.tol}",
                achieved=err)
        return QuadResult(v2, err)
