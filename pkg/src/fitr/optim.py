"""In-house minimizers.

Two solvers cover every training objective in this package:

* ``bfgs_minimize`` — quasi-Newton with a strong-Wolfe line search, for the
  smooth convex weighted-logistic objectives.
* ``powell_minimize`` — derivative-free direction-set iteration with Brent
  line minimization, for the nonsmooth ramp-penalized objective.

Both are deterministic: identical inputs produce bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_GOLDEN = 1.618033988749895
_TINY = 1e-300


class OptimizationError(RuntimeError):
    """Raised when an objective or gradient turns non-finite.

    Carries the offending iterate in ``iterate``.
    """

    def __init__(self, message: str, iterate: np.ndarray | None = None):
        super().__init__(message)
        self.iterate = iterate


@dataclass(frozen=True)
class OptimizerSettings:
    """Solver tolerances shared by BFGS and Powell.

    grad_tol: sup-norm gradient threshold stopping BFGS.
    f_tol: relative objective-decrease threshold stopping Powell sweeps.
    max_iters: iteration (BFGS) / sweep (Powell) cap.
    max_line_evals: cap on objective evaluations inside one line search.
    wolfe_c1, wolfe_c2: strong-Wolfe constants; shrink wolfe_c2 toward zero
        to force near-exact line minimization.
    line_tol: Brent interval tolerance for Powell's line minimizations.
    extra_starts: additional perturbed restarts for nonconvex objectives.
    initial_point: warm-start vector; None means start from zeros.
    """

    grad_tol: float = 1e-6
    f_tol: float = 1e-8
    max_iters: int = 500
    max_line_evals: int = 60
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    line_tol: float = 1e-6
    extra_starts: int = 0
    initial_point: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if min(self.grad_tol, self.f_tol, self.line_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1 or self.max_line_evals < 1:
            raise ValueError("iteration caps must be >= 1")
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise ValueError("need 0 < wolfe_c1 < wolfe_c2 < 1")
        if self.extra_starts < 0:
            raise ValueError("extra_starts must be >= 0")


@dataclass
class OptimResult:
    x: np.ndarray
    fval: float
    status: str  # "converged" | "max_iters" | "stalled"
    iterations: int
    sweep_values: list[float] = field(default_factory=list)


def _check_finite(value: float, where: str, x: np.ndarray) -> None:
    if not np.isfinite(value):
        raise OptimizationError(f"non-finite {where} encountered", iterate=x)


# ---------------------------------------------------------------------------
# BFGS with strong Wolfe line search
# ---------------------------------------------------------------------------


def _cubic_min(a, fa, dfa, b, fb, dfb):
    """Minimizer of the cubic through (a, fa, dfa), (b, fb, dfb); nan if ill."""
    d1 = dfa + dfb - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - dfa * dfb
    if disc < 0:
        return np.nan
    d2 = np.sqrt(disc)
    if b < a:
        d2 = -d2
    denom = dfb - dfa + 2.0 * d2
    if abs(denom) < _TINY:
        return np.nan
    return b - (b - a) * (dfb + d2 - d1) / denom


def _zoom(phi, lo, f_lo, d_lo, hi, f_hi, d_hi, f0, d0, c1, c2, max_evals):
    """Strong-Wolfe zoom on the bracket [lo, hi] (order-free)."""
    for _ in range(max_evals):
        if abs(hi - lo) < 1e-16 * max(1.0, abs(lo)):
            return lo, f_lo
        t = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
        left, right = (lo, hi) if lo < hi else (hi, lo)
        width = right - left
        if not np.isfinite(t) or t <= left + 0.01 * width or t >= right - 0.01 * width:
            t = 0.5 * (lo + hi)
        f_t, d_t = phi(t)
        if f_t > f0 + c1 * t * d0 or f_t >= f_lo:
            hi, f_hi, d_hi = t, f_t, d_t
        else:
            if abs(d_t) <= -c2 * d0:
                return t, f_t
            if d_t * (hi - lo) >= 0:
                hi, f_hi, d_hi = lo, f_lo, d_lo
            lo, f_lo, d_lo = t, f_t, d_t
    return lo, f_lo


def _strong_wolfe(phi, f0, d0, c1, c2, max_evals):
    """Find a step satisfying the strong Wolfe conditions along phi.

    phi(t) must return (value, directional derivative). Returns (t, f_t) or
    None when no acceptable step was found within the evaluation budget.
    """
    t_prev, f_prev, d_prev = 0.0, f0, d0
    t = 1.0
    for i in range(max_evals):
        f_t, d_t = phi(t)
        if f_t > f0 + c1 * t * d0 or (i > 0 and f_t >= f_prev):
            return _zoom(
                phi, t_prev, f_prev, d_prev, t, f_t, d_t, f0, d0, c1, c2, max_evals
            )
        if abs(d_t) <= -c2 * d0:
            return t, f_t
        if d_t >= 0:
            return _zoom(
                phi, t, f_t, d_t, t_prev, f_prev, d_prev, f0, d0, c1, c2, max_evals
            )
        t_prev, f_prev, d_prev = t, f_t, d_t
        t = min(2.0 * t, 1e10)
    return None


def bfgs_minimize(fun_grad, x0, settings: OptimizerSettings = OptimizerSettings()):
    """Minimize a smooth function given ``fun_grad(x) -> (value, gradient)``."""
    x = np.asarray(x0, dtype=float).copy()
    m = x.size
    f, g = fun_grad(x)
    g = np.asarray(g, dtype=float)
    _check_finite(f, "objective", x)
    if not np.isfinite(g).all():
        raise OptimizationError("non-finite gradient encountered", iterate=x)

    H = np.eye(m)
    first_update = True
    status = "max_iters"
    iters = 0
    for iters in range(1, settings.max_iters + 1):
        if np.max(np.abs(g)) <= settings.grad_tol:
            status = "converged"
            iters -= 1
            break
        p = -H @ g
        d0 = float(g @ p)
        if d0 >= 0:  # numerical loss of descent; reset metric
            H = np.eye(m)
            first_update = True
            p = -g
            d0 = float(g @ p)

        cache: dict[float, tuple[float, np.ndarray]] = {}

        def phi(t):
            xt = x + t * p
            ft, gt = fun_grad(xt)
            gt = np.asarray(gt, dtype=float)
            _check_finite(ft, "objective", xt)
            if not np.isfinite(gt).all():
                raise OptimizationError("non-finite gradient encountered", iterate=xt)
            cache[t] = (ft, gt)
            return ft, float(gt @ p)

        hit = _strong_wolfe(
            phi, f, d0, settings.wolfe_c1, settings.wolfe_c2, settings.max_line_evals
        )
        if hit is None or hit[0] == 0.0:
            status = "stalled"
            break
        t, f_new = hit
        f_new, g_new = cache[t]
        s = t * p
        y = g_new - g
        x = x + s
        f, g = f_new, g_new

        sy = float(s @ y)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            if first_update:
                H = (sy / float(y @ y)) * np.eye(m)
                first_update = False
            Hy = H @ y
            rho = 1.0 / sy
            # inverse-Hessian BFGS update
            H -= rho * (np.outer(s, Hy) + np.outer(Hy, s))
            H += rho * (1.0 + rho * float(y @ Hy)) * np.outer(s, s)
    else:
        iters = settings.max_iters

    if status != "stalled" and np.max(np.abs(g)) <= settings.grad_tol:
        status = "converged"
    return OptimResult(x=x, fval=float(f), status=status, iterations=iters)


# ---------------------------------------------------------------------------
# Brent line minimization and Powell's direction-set method
# ---------------------------------------------------------------------------


def brent_line_min(g, bracket, tol: float = 1e-8, max_iters: int = 200):
    """Scalar minimization inside a bracket (a, b, c) with a < b < c.

    Requires g(b) < g(a) and g(b) < g(c). Parabolic interpolation with
    golden-section fallback; returns (t_star, g_star) with the final
    uncertainty interval of width <= tol.
    """
    a, b, c = (float(v) for v in bracket)
    if not a < b < c:
        raise ValueError("bracket must satisfy a < b < c")
    ga, gb, gc = g(a), g(b), g(c)
    if not (gb < ga and gb < gc):
        raise ValueError("bracket must satisfy g(b) < g(a) and g(b) < g(c)")
    return _brent(g, a, b, gb, c, tol, max_iters)


def _brent(g, a, x, gx, b, tol, max_iters):
    """Brent's method on [a, b] with initial best point x, g(x) = gx."""
    cgold = 0.3819660112501051
    w = v = x
    fw = fv = fx = gx
    d = e = 0.0
    # interval-width criterion below ensures |x - true| <= 2*tol1
    tol = max(tol, 1e-15)
    for _ in range(max_iters):
        xm = 0.5 * (a + b)
        tol1 = 0.25 * tol + 1e-12 * abs(x)
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (b - a):
            return x, fx
        use_golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev = e
            e = d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if xm >= x else -tol1
                use_golden = False
        if use_golden:
            e = (b if x < xm else a) - x
            d = cgold * e
        u = x + d if abs(d) >= tol1 else x + (tol1 if d >= 0 else -tol1)
        fu = g(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def _bracket_minimum(g, f0, step=1.0, grow=_GOLDEN, max_expand=50):
    """Expand from t=0 to bracket a minimum of g along the line.

    Returns ("bracket", (a, b, c)) with a < b < c and g(b) below both ends,
    or ("ray", (t_best, f_best)) when g keeps decreasing within the cap.
    """
    a, fa = 0.0, f0
    b, fb = step, g(step)
    if fb > fa:
        a, b, fa, fb = b, a, fb, fa
    c = b + grow * (b - a)
    fc = g(c)
    for _ in range(max_expand):
        if fc > fb:
            lo, hi = (a, c) if a < c else (c, a)
            if lo < b < hi:
                return "bracket", (lo, b, fb, hi)
            break
        a, fa = b, fb
        b, fb = c, fc
        c = b + grow * (b - a)
        fc = g(c)
    # monotone (or flat) direction within the expansion cap
    t_best, f_best = (b, fb) if fb <= fc else (c, fc)
    if f0 <= f_best:
        return "ray", (0.0, f0)
    return "ray", (t_best, f_best)


def _line_minimize(fun, x, u, fx, settings):
    """Minimize t -> fun(x + t*u); returns (x_new, f_new)."""

    def g(t):
        val = fun(x + t * u)
        _check_finite(val, "objective", x + t * u)
        return val

    kind, payload = _bracket_minimum(g, fx)
    if kind == "ray":
        t, ft = payload
    else:
        a, b, fb, c = payload
        t, ft = _brent(g, a, b, fb, c, settings.line_tol, settings.max_line_evals)
    if ft >= fx:
        return x, fx
    return x + t * u, ft


def powell_minimize(fun, x0, settings: OptimizerSettings = OptimizerSettings()):
    """Minimize a value-only objective by Powell's direction-set method.

    One sweep line-minimizes along each direction in turn, then applies
    Powell's replacement rule to the sweep displacement. Sweep objective
    values are recorded in ``sweep_values`` and are non-increasing.
    """
    x = np.asarray(x0, dtype=float).copy()
    m = x.size
    f = float(fun(x))
    _check_finite(f, "objective", x)
    dirs = np.eye(m)
    history = [f]
    status = "max_iters"
    sweeps = 0
    for sweeps in range(1, settings.max_iters + 1):
        f_start = f
        x_start = x.copy()
        biggest_drop = 0.0
        drop_idx = 0
        for i in range(m):
            f_before = f
            x, f = _line_minimize(fun, x, dirs[i], f, settings)
            if f_before - f > biggest_drop:
                biggest_drop = f_before - f
                drop_idx = i
        history.append(f)
        if 2.0 * (f_start - f) <= settings.f_tol * (abs(f_start) + abs(f)) + 1e-300:
            status = "converged"
            break
        displacement = x - x_start
        if not np.any(displacement):
            status = "converged"
            break
        f_ext = float(fun(2.0 * x - x_start))
        _check_finite(f_ext, "objective", 2.0 * x - x_start)
        if f_ext < f_start:
            t = (
                2.0
                * (f_start - 2.0 * f + f_ext)
                * (f_start - f - biggest_drop) ** 2
                - biggest_drop * (f_start - f_ext) ** 2
            )
            if t < 0.0:
                x, f = _line_minimize(fun, x, displacement, f, settings)
                dirs[drop_idx] = dirs[m - 1]
                dirs[m - 1] = displacement
    return OptimResult(
        x=x, fval=f, status=status, iterations=sweeps, sweep_values=history
    )
