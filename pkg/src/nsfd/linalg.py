"""
Small dense real-matrix utilities: Jacobians of model right-hand sides and
eigenvalues of the resulting matrices.

Eigenvalues use closed forms for orders 1 and 2.  Larger matrices are
reduced to upper Hessenberg form by Householder reflections and then
deflated with the Francis double-shift QR iteration, so complex pairs come
out as exact conjugates.  There is no balancing pass; the matrices met here
are small and well scaled.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ConvergenceError, NumericalDomainError, UsageError
from .model import DynamicalModel, as_state, eval_rhs

__all__ = [
    "jacobian",
    "finite_difference_jacobian",
    "hessenberg",
    "eigenvalues",
    "spectral_abscissa",
    "spectral_radius",
]

_SQRT_EPS = math.sqrt(np.finfo(float).eps)


def _check_square(A) -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise UsageError(f"expected a nonempty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise UsageError(f"matrix has non-finite entries:\n{A}")
    return A


def finite_difference_jacobian(model: DynamicalModel, y) -> np.ndarray:
    """Central differences, column j perturbed by sqrt(eps) * max(1, |y_j|)."""
    y = as_state(y, model.dim)
    n = model.dim
    J = np.empty((n, n))
    for j in range(n):
        h = _SQRT_EPS * max(1.0, abs(y[j]))
        yp = y.copy()
        ym = y.copy()
        yp[j] += h
        ym[j] -= h
        # The realised step differs from h by roundoff.
        J[:, j] = (eval_rhs(model, yp) - eval_rhs(model, ym)) / (yp[j] - ym[j])
    return J


def jacobian(model: DynamicalModel, y) -> np.ndarray:
    """df/dy at ``y``: the model's analytic Jacobian if it has one."""
    y = as_state(y, model.dim)
    if model.analytic_jacobian is None:
        J = finite_difference_jacobian(model, y)
    else:
        J = np.array(model.analytic_jacobian(y), dtype=float).reshape(model.dim, model.dim)
    if not np.all(np.isfinite(J)):
        raise NumericalDomainError(f"{model.name}: non-finite Jacobian at y={y.tolist()}")
    return J


def hessenberg(A) -> np.ndarray:
    """Upper Hessenberg matrix similar to ``A`` (Householder reduction)."""
    H = _check_square(A)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        H[k + 1:, k:] -= 2.0 * np.outer(v, v @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v)
        H[k + 2:, k] = 0.0
    return H


def _eig2(a, b, c, d) -> list[complex]:
    half_tr = 0.5 * (a + d)
    det = a * d - b * c
    p = 0.5 * (a - d)
    disc = p * p + b * c
    if disc >= 0.0:
        root = math.sqrt(disc)
        lam1 = half_tr + math.copysign(root, half_tr) if half_tr != 0.0 else root
        # Second root from the product avoids cancellation.
        lam2 = det / lam1 if lam1 != 0.0 else half_tr - root
        return [complex(lam1), complex(lam2)]
    im = math.sqrt(-disc)
    return [complex(half_tr, im), complex(half_tr, -im)]


def _hqr(H: np.ndarray) -> list[complex]:
    n = H.shape[0]
    # 1-based working copy keeps the classical index arithmetic readable.
    a = np.zeros((n + 1, n + 1))
    a[1:, 1:] = H
    wr = np.zeros(n + 1)
    wi = np.zeros(n + 1)
    anorm = sum(abs(a[i, j]) for i in range(1, n + 1) for j in range(max(i - 1, 1), n + 1))
    # Absolute floor: a subdiagonal below eps * |H| is a backward-stable zero.
    negligible = np.finfo(float).eps * anorm
    budget = 100 * n
    sweeps = 0
    nn = n
    t = 0.0
    while nn >= 1:
        its = 0
        while True:
            l = 1
            for ll in range(nn, 1, -1):
                s = abs(a[ll - 1, ll - 1]) + abs(a[ll, ll])
                if s == 0.0:
                    s = anorm
                if abs(a[ll, ll - 1]) + s == s or abs(a[ll, ll - 1]) <= negligible:
                    a[ll, ll - 1] = 0.0
                    l = ll
                    break
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if sweeps >= budget:
                raise ConvergenceError(f"QR iteration did not converge within {budget} sweeps for matrix:\n{H}")
            if its in (10, 20):
                # Exceptional shift breaks cycles.
                t += x
                for i in range(1, nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            sweeps += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k, j] + q * a[k + 1, j]
                    if k != nn - 1:
                        p += r * a[k + 2, j]
                        a[k + 2, j] -= p * z
                    a[k + 1, j] -= p * y
                    a[k, j] -= p * x
                for i in range(l, min(nn, k + 3) + 1):
                    p = x * a[i, k] + y * a[i, k + 1]
                    if k != nn - 1:
                        p += z * a[i, k + 2]
                        a[i, k + 2] -= p * r
                    a[i, k + 1] -= p * q
                    a[i, k] -= p
    return [complex(wr[i], wi[i]) for i in range(1, n + 1)]


def eigenvalues(A) -> list[complex]:
    """All eigenvalues of a real square matrix, with multiplicity."""
    A = _check_square(A)
    n = A.shape[0]
    if n == 1:
        return [complex(A[0, 0])]
    # Eigenvalues are homogeneous; unit scale keeps squares inside the
    # double range for very small or very large entries.
    scale = float(np.max(np.abs(A)))
    if scale == 0.0:
        return [0j] * n
    A = A / scale
    if n == 2:
        eigs = _eig2(A[0, 0], A[0, 1], A[1, 0], A[1, 1])
    else:
        eigs = _hqr(hessenberg(A))
    return [e * scale for e in eigs]


def spectral_abscissa(eigs) -> float:
    eigs = list(eigs)
    if not eigs:
        raise UsageError("spectral abscissa of an empty eigenvalue list")
    return max(complex(e).real for e in eigs)


def spectral_radius(eigs) -> float:
    eigs = list(eigs)
    if not eigs:
        raise UsageError("spectral radius of an empty eigenvalue list")
    return max(abs(complex(e)) for e in eigs)
