"""Independent reference implementations used only by the tests."""
import numpy as np
from scipy.optimize import minimize_scalar


def gauss_jordan_inverse(a):
    """Explicit inverse by Gauss-Jordan elimination with partial pivoting."""
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    aug = np.hstack([a, np.eye(n)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        aug[[col, piv]] = aug[[piv, col]]
        aug[col] /= aug[col, col]
        for r in range(n):
            if r != col:
                aug[r] -= aug[r, col] * aug[col]
    return aug[:, n:]


def normal_equations(x, y):
    return gauss_jordan_inverse(x.T @ x) @ (x.T @ y)


def _project(v, sign, C):
    """Euclidean projection onto {0 <= z <= C, sum(sign * z) = 0}; returns (z, nu)."""
    def g(nu):
        return float(np.sum(sign * np.clip(v - nu * sign, 0.0, C)))

    lo, hi = -1.0, 1.0
    while g(lo) < 0:
        lo *= 2
    while g(hi) > 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            break
    nu = 0.5 * (lo + hi)
    return np.clip(v - nu * sign, 0.0, C), nu


def svr_dual_pg(y, x, C, eps, tol=1e-10, max_iter=500_000):
    """Accelerated projected gradient on the 2N-variable dual.

    Variables ``z = [alpha, alpha*]``; objective
    ``|sum (alpha - alpha*) y|^2 / 2 - x . (alpha - alpha*) + eps sum (alpha + alpha*)``.
    Returns (beta, objective, bias) with the bias read off the equality multiplier.
    """
    y = np.asarray(y, float).reshape(len(x), -1)
    x = np.asarray(x, float)
    n = x.size
    sign = np.concatenate([np.ones(n), -np.ones(n)])
    big = np.vstack([y, -y])
    lip = 2.0 * np.linalg.eigvalsh(y @ y.T)[-1] + 1e-12
    step = 1.0 / lip
    lin = np.concatenate([-x + eps, x + eps])

    def grad(z):
        return big @ (big.T @ z) + lin

    def obj(z):
        w = big.T @ z
        return 0.5 * w @ w + lin @ z

    z = np.zeros(2 * n)
    v = z.copy()
    t = 1.0
    nu = 0.0
    f_old = obj(z)
    for _ in range(max_iter):
        z_new, nu = _project(v - step * grad(v), sign, C)
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        f_new = obj(z_new)
        if f_new > f_old:  # restart momentum
            t_new = 1.0
            v = z_new
        else:
            v = z_new + (t - 1) / t_new * (z_new - z)
        z, t, f_old = z_new, t_new, f_new
        if np.max(np.abs(_project(z - step * grad(z), sign, C)[0] - z)) < tol:
            break
    # fixed point z = P(z - step g): a free alpha_i satisfies g_i = -nu / step,
    # and g_i = -(x_i - w y_i - eps) = -(b) on the upper tube edge
    z_fin, nu = _project(z - step * grad(z), sign, C)
    beta = z_fin[:n] - z_fin[n:]
    return beta, float(obj(z_fin)), nu / step


def _best_b(r, eps):
    n = r.size
    cand = np.sort(np.concatenate([r - eps, r + eps]))
    return 0.5 * (cand[n - 1] + cand[n])


def svr_primal_1d(y, x, C, eps):
    """Exact primal optimum for d = 1 by profiling out the bias.

    ``p(w) = w^2/2 + C min_b sum max(0, |x - w y - b| - eps)`` is convex; it is
    minimised by bounded Brent to machine precision. Returns (w, objective).
    """
    y = np.asarray(y, float).ravel()
    x = np.asarray(x, float)

    def p(w):
        r = x - w * y
        b = _best_b(r, eps)
        return 0.5 * w * w + C * np.maximum(np.abs(r - b) - eps, 0.0).sum()

    span = C * np.abs(y).sum() + 1.0
    res = minimize_scalar(p, bounds=(-span, span), method="bounded", options={"xatol": 1e-12, "maxiter": 2000})
    return float(res.x), float(p(res.x))
