"""Entire continuation of the completed L-function and everything built on it.

The completed function is evaluated through the split integral

    Lambda_f(s) = J_f(s) + eta eps^(1-k) N^(1/2-s) J_fdual(1-s),

where J_f(s) is the Mellin integral, from the involution's fixed height
1/sqrt(N) upward, of the form's restriction to the imaginary axis (or, for
odd weight-0 forms -- which vanish there -- of the normalized x-derivative
of that restriction, shifting the Mellin exponent by one).  Both integrals
converge like exp(-2 pi y), so the split representation is entire in s and
derivatives come from differentiating under the integral sign.

On top of that sit: residuals of the differentiated functional equation, a
critical-strip zero scanner whose multiplicity certificates are
argument-principle winding numbers, the contour residue check at a certified
simple zero, and the end-to-end dual-side Taylor residual, which compares
the reflected D-series Fourier expansion against Mellin-Barnes integrals of
the polynomial gamma-ratio factors times twisted D-series.

Numerical policy: certified quantities are computed with mpmath at the
context's working precision.  The only float64 shortcut is the bulk
evaluation of truncated twisted D-series inside `taylor_residual` (absolute
accuracy ~1e-15, far below that check's coefficient-truncation floor).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp

from .analytic import GammaFactorSpec, _shifts, _v_params, gamma_factor
from .errors import (ConvergenceError, InconclusiveError, IsolationError,
                     NearZeroError, TailError)
from .forms import MaassForm, dual_form, hecke_coeff
from .precision import (ComplexParam, PrecisionContext, default_context,
                        dyadic_fraction, to_mpc, to_real)
from .series import c_coeffs
from .specfun import trigamma

__all__ = [
    "ZeroRecord", "ScanReport", "lambda_complete", "lambda_derivs",
    "feofd_residual", "scan_zeros", "delta_residue_check", "taylor_residual",
    "report_jsonl", "report_csv",
]


def _param_from_mpc(z) -> ComplexParam:
    z = mp.mpc(z)
    return ComplexParam(dyadic_fraction(z.real), dyadic_fraction(z.imag))


# ---------------------------------------------------------------------------
# Gauss-Legendre panels at working precision
# ---------------------------------------------------------------------------

_GL_CACHE: dict = {}


def _gl_rule(n: int):
    """Nodes/weights on [-1, 1] at the current mpmath precision: float64
    seeds polished by Newton iteration on the Legendre recurrence."""
    key = (n, mp.prec)
    if key in _GL_CACHE:
        return _GL_CACHE[key]
    seeds, _ = np.polynomial.legendre.leggauss(n)

    def legendre_pair(x):
        p0, p1 = mp.mpf(1), x
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = n * (x * p1 - p0) / (x * x - 1)
        return p1, dp

    nodes, weights = [], []
    for seed in seeds:
        x = mp.mpf(float(seed))
        for _ in range(4):
            p, dp = legendre_pair(x)
            x -= p / dp
        _, dp = legendre_pair(x)
        nodes.append(x)
        weights.append(2 / ((1 - x * x) * dp * dp))
    _GL_CACHE[key] = (nodes, weights)
    return nodes, weights


# ---------------------------------------------------------------------------
# cached split-integral kernels
# ---------------------------------------------------------------------------

def _uses_derivative_kernel(f: MaassForm) -> bool:
    """Odd weight-0 forms vanish on the imaginary axis; integrate the
    normalized x-derivative instead (Mellin exponent shifted by +1)."""
    return f.weight == 0 and f.eps == -1


def _is_self_dual(f: MaassForm) -> bool:
    """True when conjugating all coefficient data fixes the form's values,
    so the dual shares the original's kernel cache."""
    return (f.eta.is_real
            and (f.nu.re == 0 or f.nu.im == 0)
            and (f.xi.is_trivial or all(v.is_real for v in f.xi.table))
            and all(lam.is_real for _, lam in f.prime_coeffs))


def _efolds() -> mp.mpf:
    """Decay budget: tails below 2^-prec / 1e13 are dropped."""
    return mp.prec * mp.ln(2) + 30


_KERNEL_CACHE: dict = {}
_GL_DEGREE = 48


class _SplitKernel:
    """Fixed quadrature nodes on [1/sqrt(N), y_top] with cached kernel values.

    Every Lambda evaluation is then a weighted power sum over these nodes;
    the expensive K-Bessel sums are paid once per (form, precision).
    """

    def __init__(self, f: MaassForm, ctx: PrecisionContext):
        self.delta = 1 if _uses_derivative_kernel(f) else 0
        a = 1 / mp.sqrt(f.level)
        budget = _efolds()
        y_top = max(2 * a, budget / (2 * mp.pi))
        edges = [a]
        while edges[-1] < y_top:
            edges.append(min(2 * edges[-1], y_top))
        gl_x, gl_w = _gl_rule(_GL_DEGREE)
        nu = f.nu.mpc(ctx)
        lam_cache: dict = {}

        def lam(n):
            if n not in lam_cache:
                lam_cache[n] = hecke_coeff(f, n).mpc(ctx)
            return lam_cache[n]

        def kernel_value(y):
            n_cut = int(budget / (2 * mp.pi * y)) + 1
            if n_cut > f.coeff_bound:
                raise TailError(
                    f"coefficient table to {f.coeff_bound} cannot reach the "
                    f"working tail target at height y={mp.nstr(y, 6)}")
            total = mp.mpc(0)
            for n in range(1, n_cut + 1):
                if self.delta:
                    total += lam(n) * mp.sqrt(n) * _v_params(
                        f.weight, f.eps, nu, -1, n * y, ctx)
                else:
                    total += lam(n) / mp.sqrt(n) * _v_params(
                        f.weight, f.eps, nu, 1, n * y, ctx)
            return total

        nodes = []
        for lo, hi in zip(edges, edges[1:]):
            mid, half = (lo + hi) / 2, (hi - lo) / 2
            for x, w in zip(gl_x, gl_w):
                y = mid + half * x
                nodes.append((w * half, kernel_value(y), mp.log(y)))
        self.nodes = nodes

    def mellin(self, s, order: int):
        """d^order/ds^order of  int h(y) y^(s - 1/2 + delta) dy/y."""
        w = s - mp.mpf(1) / 2 + self.delta - 1
        total = mp.mpc(0)
        for weight, h, logy in self.nodes:
            term = weight * h * mp.exp(w * logy)
            if order:
                term *= logy ** order
            total += term
        return total


def _get_kernel(f: MaassForm, ctx: PrecisionContext) -> _SplitKernel:
    key = (f, mp.prec)
    if key not in _KERNEL_CACHE:
        _KERNEL_CACHE[key] = _SplitKernel(f, ctx)
    return _KERNEL_CACHE[key]


def _make_evaluator(f: MaassForm, ctx: PrecisionContext):
    """Closure ev(s, order) -> d^order/ds^order Lambda_f(s) as mpc.

    Hoists the kernel-cache lookups (hashing a form is not free) and the
    constant part of the root-number phase out of the evaluation path.
    """
    kf = _get_kernel(f, ctx)
    kd = kf if _is_self_dual(f) else _get_kernel(dual_form(f), ctx)
    log_n = mp.log(f.level)
    front = f.eta.mpc(ctx) * (f.eps if f.weight == 0 else 1)
    half = mp.mpf(1) / 2

    def ev(s, order=0):
        phase = front * mp.power(f.level, half - s)
        total = kf.mellin(s, order)
        for i in range(order + 1):
            total += (mp.binomial(order, i) * (-log_n) ** i * phase
                      * (-1) ** (order - i) * kd.mellin(1 - s, order - i))
        return total

    return ev


# ---------------------------------------------------------------------------
# Lambda and its derivatives
# ---------------------------------------------------------------------------

def lambda_complete(f: MaassForm, s,
                    ctx: PrecisionContext | None = None) -> ComplexParam:
    """The completed L-function Lambda_f(s), entire in s."""
    ctx = ctx or default_context()
    with ctx.workprec():
        return _param_from_mpc(_make_evaluator(f, ctx)(to_mpc(s, ctx), 0))


def lambda_derivs(f: MaassForm, s, order: int,
                  ctx: PrecisionContext | None = None) -> ComplexParam:
    """d^order/ds^order Lambda_f(s) for order <= 2, by differentiating the
    split integrals under the integral sign (log-power kernels), never by
    finite differences."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1, or 2")
    ctx = ctx or default_context()
    with ctx.workprec():
        return _param_from_mpc(
            _make_evaluator(f, ctx)(to_mpc(s, ctx), order))


# ---------------------------------------------------------------------------
# differentiated functional equation
# ---------------------------------------------------------------------------

def _psi_prime(k: int, eps: int, nu, s):
    """(d/ds)^2 log of the plus gamma factor."""
    sp, sm = _shifts(k, eps, 1)
    return (trigamma((s + sp + nu) / 2) + trigamma((s + sm - nu) / 2)) / 4


def feofd_residual(f: MaassForm, s,
                   ctx: PrecisionContext | None = None) -> float:
    """Absolute residual of the differentiated functional equation

        Delta_f(s) + (psi_f'(s) - psi_fdual'(1-s)) Lambda_f(s)
            = eta eps^(1-k) N^(1/2-s) Delta_fdual(1-s),

    where Delta_f = Lambda_f (log Lambda_f)'' - psi_f' Lambda_f and psi_f is
    the log-derivative of the plus gamma factor.  Every Lambda term comes
    from the entire split representation; the divergent coefficient series
    is never touched.
    """
    ctx = ctx or default_context()
    with ctx.workprec():
        s = to_mpc(s, ctx)
        dual = dual_form(f)
        floor = 10 * ctx.tol

        def delta_parts(form, point):
            ev = _make_evaluator(form, ctx)
            v = ev(point, 0)
            if abs(v) <= floor:
                raise NearZeroError(
                    f"|Lambda({mp.nstr(point, 8)})| = {mp.nstr(abs(v), 3)} "
                    f"is within 10x tolerance of a zero; resample s")
            d1, d2 = ev(point, 1), ev(point, 2)
            log_dd = d2 / v - (d1 / v) ** 2
            psi = _psi_prime(form.weight, form.eps, form.nu.mpc(ctx), point)
            return v, v * log_dd - psi * v, psi

        lam_f, delta_f, psi_f = delta_parts(f, s)
        _, delta_d, psi_d = delta_parts(dual, 1 - s)
        lhs = delta_f + (psi_f - psi_d) * lam_f
        omega = (f.eta.mpc(ctx) * (f.eps if f.weight == 0 else 1)
                 * mp.power(f.level, mp.mpf(1) / 2 - s))
        return float(abs(lhs - omega * delta_d))


# ---------------------------------------------------------------------------
# zero scanning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroRecord:
    """One certified zero: location, winding certificate, |Lambda'|, and the
    (scaled) tolerance the certificates were checked against."""

    rho: ComplexParam
    winding: int
    lambda_prime_abs: float
    box: tuple  # (center: ComplexParam, (radius_re, radius_im))
    tol_used: float

    def __post_init__(self):
        if self.winding < 1:
            raise ValueError("winding must be >= 1")

    @property
    def is_simple(self) -> bool:
        return self.winding == 1 and self.lambda_prime_abs > 10 * self.tol_used


@dataclass(frozen=True)
class ScanReport:
    window: tuple
    zeros: tuple
    total_count_by_argument: int


def report_jsonl(report: ScanReport) -> str:
    """One JSON object per zero, fields (t, re_offset, winding,
    lambda_prime_abs, tol)."""
    lines = []
    for z in report.zeros:
        lines.append(json.dumps({
            "t": float(z.rho.im),
            "re_offset": float(z.rho.re - Fraction(1, 2)),
            "winding": z.winding,
            "lambda_prime_abs": z.lambda_prime_abs,
            "tol": z.tol_used,
        }))
    return "".join(line + "\n" for line in lines)


def report_csv(report: ScanReport) -> str:
    """CSV with the same columns as the JSON-lines serialization."""
    lines = ["t,re_offset,winding,lambda_prime_abs,tol"]
    for z in report.zeros:
        lines.append(",".join([
            repr(float(z.rho.im)),
            repr(float(z.rho.re - Fraction(1, 2))),
            str(z.winding),
            repr(z.lambda_prime_abs),
            repr(z.tol_used),
        ]))
    return "".join(line + "\n" for line in lines)


def _winding_number(ev, x0, x1, t_lo, t_hi):
    """Argument-principle count of zeros of Lambda inside a rectangle, by
    Gauss-Legendre quadrature of Lambda'/Lambda along the boundary.

    Returns (count, quality) with quality the distance of the raw contour
    integral from the nearest integer, or (None, None) when no rung of the
    retry ladder produced a near-integer (e.g. a zero sits on the contour).
    """
    two_pi_i = 2 * mp.pi * mp.mpc(0, 1)
    corners = [mp.mpc(x0, t_lo), mp.mpc(x1, t_lo),
               mp.mpc(x1, t_hi), mp.mpc(x0, t_hi), mp.mpc(x0, t_lo)]
    for degree, max_len in ((24, mp.mpf("0.5")), (32, mp.mpf("0.25")),
                            (40, mp.mpf("0.125"))):
        gl_x, gl_w = _gl_rule(degree)
        total = mp.mpc(0)
        degenerate = False
        for a, b in zip(corners, corners[1:]):
            n_panels = max(1, int(mp.ceil(abs(b - a) / max_len)))
            for i in range(n_panels):
                lo = a + (b - a) * mp.mpf(i) / n_panels
                hi = a + (b - a) * mp.mpf(i + 1) / n_panels
                mid, half = (lo + hi) / 2, (hi - lo) / 2
                for x, w in zip(gl_x, gl_w):
                    s = mid + half * x
                    v = ev(s, 0)
                    if v == 0:
                        degenerate = True
                        break
                    total += w * half * ev(s, 1) / v
                if degenerate:
                    break
            if degenerate:
                break
        if degenerate:
            continue
        val = total / two_pi_i
        count = int(mp.nint(val.real))
        quality = abs(val - count)
        if quality < mp.mpf("0.15"):
            return count, float(quality)
    return None, None


def scan_zeros(f: MaassForm, t0, t1, step,
               ctx: PrecisionContext | None = None,
               re_halfwidth: float = 0.1, max_depth: int = 9) -> ScanReport:
    """Scan Im(s) in [t0, t1] near the critical line for zeros of Lambda_f.

    Sampling uses S(t) = Lambda(1/2 + it) / |gamma^+(1/2 + it)|, which
    removes the exponential decay of the completed function along the line;
    the per-zero tolerance tol_used is ctx.tol scaled back by |gamma^+| at
    the zero, so certificates track the natural local size of Lambda.

    Candidates (argument wraps, dips, and -- when the form is self-dual --
    sign changes of the rotated sample) are merged into boxes of half-width
    `re_halfwidth` around the critical line; each box's winding number is
    computed by quadrature of Lambda'/Lambda, winding-1 boxes get a
    Newton-located zero re-verified against |Lambda| <= tol_used, and
    simplicity additionally requires |Lambda'| > 10 tol_used.  Unresolvable
    boxes raise InconclusiveError (with .boxes and .partial_report attached)
    rather than being dropped.  When t0 == 0 the count box extends half a
    step below the real axis so a central zero is counted exactly once.
    """
    ctx = ctx or default_context()
    t0, t1, step = float(t0), float(t1), float(step)
    if not (t1 > t0 >= 0):
        raise ValueError("need t1 > t0 >= 0")
    if not 0 < step <= (t1 - t0):
        raise ValueError("need 0 < step <= t1 - t0")
    if not 0 < re_halfwidth <= 0.4:
        raise ValueError("re_halfwidth must lie in (0, 0.4]")

    with ctx.workprec():
        ev = _make_evaluator(f, ctx)
        gspec = GammaFactorSpec.from_form(f, 1)
        half = mp.mpf(1) / 2

        def gamma_mag(t):
            return abs(gamma_factor(gspec, mp.mpc(half, t), ctx))

        def sample(t):
            return ev(mp.mpc(half, t), 0) / gamma_mag(t)

        n_steps = max(1, int(math.ceil((t1 - t0) / step)))
        grid = [mp.mpf(t0) + (mp.mpf(t1) - mp.mpf(t0)) * i / n_steps
                for i in range(n_steps + 1)]
        pts = [(t, sample(t)) for t in grid]

        # adaptive refinement: argument increment below pi/2 per interval
        min_gap = (t1 - t0) / n_steps / 2 ** max_depth
        exhausted = []
        i = 0
        while i + 1 < len(pts):
            (ta, va), (tb, vb) = pts[i], pts[i + 1]
            if va != 0 and vb != 0 and abs(mp.arg(vb / va)) <= mp.pi / 2:
                i += 1
                continue
            if tb - ta <= min_gap:
                exhausted.append(float(ta))
                i += 1
                continue
            tm = (ta + tb) / 2
            pts.insert(i + 1, (tm, sample(tm)))

        scale_ref = max(abs(v) for _, v in pts)

        # self-dual forms admit a unimodular rotation making S(t) real;
        # detect it from the largest sample and use real sign changes
        rotation = None
        if _is_self_dual(f):
            _, v_ref = max(pts, key=lambda p: abs(p[1]))
            u = mp.conj(v_ref) / abs(v_ref)
            if all(abs(mp.im(u * v)) <= 1e-6 * scale_ref for _, v in pts):
                rotation = u

        flagged = set()
        for (ta, va), (tb, vb) in zip(pts, pts[1:]):
            if rotation is not None and \
                    mp.re(rotation * va) * mp.re(rotation * vb) < 0:
                flagged.add(float(ta))
            if min(abs(va), abs(vb)) < 1e-5 * scale_ref:
                flagged.add(float(ta))
        flagged.update(exhausted)

        uppers = {float(ta): float(tb)
                  for (ta, _), (tb, _) in zip(pts, pts[1:])}
        flagged = sorted(flagged & set(uppers))

        pad = step / 2
        bottom = t0 if t0 > 0 else -pad
        spans = []
        for ta in flagged:
            lo, hi = max(ta - pad, bottom), min(uppers[ta] + pad, t1)
            if spans and lo <= spans[-1][1]:
                spans[-1] = (spans[-1][0], hi)
            else:
                spans.append((lo, hi))

        x0, x1 = half - mp.mpf(re_halfwidth), half + mp.mpf(re_halfwidth)
        abs_at = {float(t): abs(v) for t, v in pts}
        records = []
        trouble = []

        def certify_single(lo, hi):
            center = mp.mpc(half, (mp.mpf(lo) + mp.mpf(hi)) / 2)
            tol_used = float(ctx.tol * gamma_mag(mp.im(center)))
            s = center
            for _ in range(80):
                v = ev(s, 0)
                if abs(v) <= tol_used * 1e-6:
                    break
                d = ev(s, 1)
                if d == 0:
                    break
                s_next = s - v / d
                if abs(s_next - center) > 2 * (hi - lo) + 1:
                    break
                s = s_next
            final = abs(ev(s, 0))
            lpa = float(abs(ev(s, 1)))
            if final > tol_used or lpa <= 10 * tol_used:
                trouble.append(("certificate failed", lo, hi))
                return
            records.append(ZeroRecord(
                rho=_param_from_mpc(s), winding=1, lambda_prime_abs=lpa,
                box=(_param_from_mpc(center),
                     (float(re_halfwidth), (hi - lo) / 2)),
                tol_used=tol_used))

        def resolve(lo, hi, depth=0):
            count, _ = _winding_number(ev, x0, x1, mp.mpf(lo), mp.mpf(hi))
            if count is None:
                count, _ = _winding_number(ev, x0, x1,
                                           mp.mpf(lo) - step / 7,
                                           mp.mpf(hi) + step / 7)
            if count is None:
                trouble.append(("winding quadrature failed", lo, hi))
            elif count == 0:
                pass
            elif count == 1:
                certify_single(lo, hi)
            elif depth >= 6:
                trouble.append((f"cannot isolate {count} zeros", lo, hi))
            else:
                inside = [t for t in abs_at if lo < t < hi]
                seam = max(inside, key=abs_at.__getitem__) if inside \
                    else (lo + hi) / 2
                if not lo < seam < hi:
                    seam = (lo + hi) / 2
                resolve(lo, seam, depth + 1)
                resolve(seam, hi, depth + 1)

        for lo, hi in spans:
            resolve(lo, hi)

        total, _ = _winding_number(ev, x0, x1, mp.mpf(bottom), mp.mpf(t1))
        records.sort(key=lambda z: z.rho.im)
        report = ScanReport((t0, t1), tuple(records),
                            -1 if total is None else total)

        certified = sum(z.winding for z in records)
        if trouble or total is None or certified != total:
            exc = InconclusiveError(
                f"scan of [{t0}, {t1}] not fully certified: boxes account "
                f"for {certified} zeros, argument-principle count is "
                f"{'unresolved' if total is None else total}; "
                f"unresolved boxes: {trouble}")
            exc.boxes = tuple(trouble)
            exc.partial_report = report
            raise exc
        return report


# ---------------------------------------------------------------------------
# residue of the completed D-avatar at a simple zero
# ---------------------------------------------------------------------------

def _delta_contour(ev, rho, r, points):
    """(1/2 pi i) of the contour integral of Lambda (log Lambda)'' around
    |s - rho| = r, by the periodic trapezoid rule.  `ev(s, order)` supplies
    the function and its first two derivatives."""
    total = mp.mpc(0)
    for j in range(points):
        w = mp.exp(mp.mpc(0, 2) * mp.pi * j / points)
        s = rho + r * w
        v = ev(s, 0)
        total += (ev(s, 2) - ev(s, 1) ** 2 / v) * w
    return total * r / points


def delta_residue_check(f: MaassForm, rho: ZeroRecord,
                        ctx: PrecisionContext | None = None,
                        points: int = 64) -> float:
    """| contour residue of Lambda (log Lambda)'' at rho  +  Lambda'(rho) |.

    At a simple zero the integrand has a simple pole with residue
    -Lambda'(rho), so the return value vanishes up to quadrature error.  The
    contour radius is half the record's smaller box radius; IsolationError
    is raised when the doubled radius is not free of other zeros.
    """
    ctx = ctx or default_context()
    if points < 8:
        raise ValueError("need at least 8 contour points")
    with ctx.workprec():
        ev = _make_evaluator(f, ctx)
        center = rho.rho.mpc(ctx)
        r = mp.mpf(min(rho.box[1])) / 2
        if r <= 0:
            raise ValueError("degenerate isolation box")
        nearby, _ = _winding_number(
            ev, center.real - 2 * r, center.real + 2 * r,
            center.imag - 2 * r, center.imag + 2 * r)
        if nearby != 1:
            raise IsolationError(
                "contour not isolating: "
                + ("quadrature unresolved" if nearby is None
                   else f"{nearby} zeros")
                + f" within radius {float(2 * r):.4g} of the zero")
        residue = _delta_contour(ev, center, r, points)
        return float(abs(residue + ev(center, 1)))


# ---------------------------------------------------------------------------
# dual-side Taylor residual
# ---------------------------------------------------------------------------

_TAYLOR_CACHE: dict = {}
_CONTOUR_SIGMA = 3        # vertical line, shifted right of the classical
_CONTOUR_STEP = 0.125     # Re=2 (exact by Cauchy) to shrink the series
_CONTOUR_REACH = 40       # truncation floor by ~four orders of magnitude


def _c_table(f: MaassForm, ctx: PrecisionContext):
    key = (f, "c", mp.prec)
    if key not in _TAYLOR_CACHE:
        _TAYLOR_CACHE[key] = c_coeffs(f, f.coeff_bound, ctx)
    return _TAYLOR_CACHE[key]


def _c_dual_floats(f: MaassForm, ctx: PrecisionContext) -> np.ndarray:
    """Dual-form D-series coefficients (conjugates of the form's own) as a
    1-indexed complex128 array."""
    key = (f, "c-dual-64")
    if key not in _TAYLOR_CACHE:
        table = _c_table(f, ctx)
        out = np.zeros(table.bound + 1, dtype=np.complex128)
        for n, v in table.values.items():
            out[n] = complex(v).conjugate()
        _TAYLOR_CACHE[key] = out
    return _TAYLOR_CACHE[key]


def _big_f(f: MaassForm, z, ctx: PrecisionContext):
    """F(z): the Fourier series with the form's Whittaker profiles but the
    D-series coefficients c(n) in place of lambda(n)."""
    table = _c_table(f, ctx)
    x, y = mp.re(z), mp.im(z)
    n_cut = int(_efolds() / (2 * mp.pi * y)) + 1
    if n_cut > table.bound:
        raise ConvergenceError(
            f"reflected series needs {n_cut} terms at height "
            f"{mp.nstr(y, 6)}; the table stops at {table.bound}")
    nu = f.nu.mpc(ctx)
    total = mp.mpc(0)
    for n in range(1, n_cut + 1):
        c_n = table.values[n]
        if c_n == 0:
            continue
        vp = _v_params(f.weight, f.eps, nu, 1, n * y, ctx)
        vm = _v_params(f.weight, f.eps, nu, -1, n * y, ctx)
        ang = 2 * mp.pi * n * x
        total += c_n / mp.sqrt(n) * (vp * mp.cos(ang)
                                     + mp.mpc(0, 1) * vm * mp.sin(ang))
    return total


def _p_ratio(f: MaassForm, s, a: int, m: int, nu):
    """P(s; a, m): the signed gamma-factor ratio
    gamma^sgn(1-s) / gamma^sgn(1-s-2*floor(m/2)), sgn = (-1)^a, reduced to
    its polynomial form, with the weight-dependent case factors."""
    sign = -1 if a % 2 else 1
    if f.weight == 0 and sign == -f.eps:
        return mp.mpc(0)
    sp, sm = _shifts(f.weight, f.eps, sign)
    half_m = m // 2
    xp = 1 - s + sp + nu
    xm = 1 - s + sm - nu
    value = mp.mpc(1)
    for i in range(1, half_m + 1):
        value *= (xp - 2 * i) * (xm - 2 * i) / (2 * mp.pi) ** 2
    if f.weight == 1 and m % 2 == 1:
        value *= (s + 2 * half_m - sign * f.eps * nu) / (2 * mp.pi)
    return value


def _taylor_contour(f: MaassForm, a: int, t: int, beta: Fraction, x_ratio,
                    ctx: PrecisionContext):
    """(1/2 pi i) int P_f(s; a+t, t) gamma_dual^((-1)^a)(s+t)
    D_dual(s+t, beta, cos^(a)) x_ratio^(1/2-s) ds over a vertical line in
    the absolute-convergence region (trapezoid; exponentially accurate in
    the step, truncated where the gamma decay is ~1e-27)."""
    key = (f, a, t, beta, mp.nstr(x_ratio, 30), mp.prec)
    if key in _TAYLOR_CACHE:
        return _TAYLOR_CACHE[key]

    c_dual = _c_dual_floats(f, ctx)
    n_arr = np.arange(1, c_dual.size)
    angles = (2 * np.pi / beta.denominator) * \
        ((n_arr * beta.numerator) % beta.denominator)
    trig = np.cos(angles) if a == 0 else -np.sin(angles)
    u = c_dual[1:] * trig * n_arr.astype(np.float64) ** float(
        -(_CONTOUR_SIGMA + t))
    log_n = np.log(n_arr)

    nu = f.nu.mpc(ctx)
    dual_spec = GammaFactorSpec.from_form(dual_form(f), -1 if a % 2 else 1)
    h = mp.mpf(_CONTOUR_STEP)
    n_nodes = int(_CONTOUR_REACH / _CONTOUR_STEP)
    log_x = mp.log(x_ratio)

    total = mp.mpc(0)
    for j in range(-n_nodes, n_nodes + 1):
        tau = j * h
        s = mp.mpc(_CONTOUR_SIGMA, tau)
        p_val = _p_ratio(f, s, (a + t) % 2, t, nu)
        if p_val == 0:
            continue
        g_val = gamma_factor(dual_spec, s + t, ctx)
        d_val = complex(np.dot(u, np.exp(-1j * float(tau) * log_n)))
        total += p_val * g_val * mp.mpc(d_val) \
            * mp.exp((mp.mpf(1) / 2 - s) * log_x)
    value = total * h / (2 * mp.pi)
    _TAYLOR_CACHE[key] = value
    return value


def taylor_residual(f: MaassForm, alpha, y, T: int,
                    ctx: PrecisionContext | None = None) -> float:
    """Residual of the T-term dual-side expansion at z = alpha + iy.

    Compares (i|z|/z)^k Fdual(-1/(Nz)) -- where F is the c-weighted Fourier
    series and Fdual(w) = conj(F(-conj(w))) -- against

        (i sgn a)^k sum_{t<T} ((2 pi i N a)^t / t!) sum_{b in {0,1}}
            (i^-b / 2 pi i) int P_f(s; b+t, t)
            Delta_dual(s+t, -1/(N a), cos^(b)) (y / (N a^2))^(1/2-s) ds.

    The residual contains the expansion's own truncation error (order
    y^(T-1) in the height) plus the D-series truncation floor left by the
    finite coefficient table; tables shorter than 2000 are rejected.
    """
    alpha = Fraction(alpha)
    if alpha == 0:
        raise ValueError("alpha must be a non-zero rational")
    if not isinstance(T, int) or T < 1:
        raise ValueError("T must be a positive integer")
    if f.coeff_bound < 2000:
        raise ConvergenceError(
            f"coefficient table to {f.coeff_bound} leaves too large a "
            f"twisted-series truncation floor")
    ctx = ctx or default_context()
    with ctx.workprec():
        y = to_real(y, ctx)
        alpha_mp = mp.mpf(alpha.numerator) / alpha.denominator
        if not 0 < y <= abs(alpha_mp) / 2:
            raise ValueError("need 0 < y <= |alpha|/2")

        z = mp.mpc(alpha_mp, y)
        w = -1 / (f.level * z)
        phase = (mp.mpc(0, 1) * abs(z) / z) ** f.weight
        lhs = phase * mp.conj(_big_f(f, -mp.conj(w), ctx))

        beta = Fraction(-1, f.level) / alpha
        x_ratio = y / (f.level * alpha_mp ** 2)
        rhs = mp.mpc(0)
        for t in range(T):
            pref = (mp.mpc(0, 2 * mp.pi) * f.level * alpha_mp) ** t \
                / mp.factorial(t)
            inner = mp.mpc(0)
            for a in (0, 1):
                i_pow = mp.mpc(1) if a == 0 else mp.mpc(0, -1)
                inner += i_pow * _taylor_contour(f, a, t, beta, x_ratio, ctx)
            rhs += pref * inner
        rhs *= (mp.mpc(0, 1) * (1 if alpha > 0 else -1)) ** f.weight
        return float(abs(lhs - rhs))
