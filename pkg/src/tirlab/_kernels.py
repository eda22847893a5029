"""Hot inner loops, each in an ``@njit`` loop form and a vectorised numpy form.

All batch kernels take a stack of matrices with the batch on axis 0 and work on
a private float64 copy. Sweep counts of ``-1`` mark matrices that did not
converge within ``max_sweeps``.
"""

import numpy as np

from tirlab._accel import njit


# ---------------------------------------------------------------------------
# two-sided cyclic Jacobi on symmetric matrices


def _sym_jacobi_py(g, tol, max_sweeps):
    batch, n, _ = g.shape
    a = g.copy()
    eig = np.empty((batch, n))
    sweeps = np.empty(batch, dtype=np.int64)
    for b in range(batch):
        scale = 1.0
        for i in range(n):
            for k in range(n):
                if abs(a[b, i, k]) > scale:
                    scale = abs(a[b, i, k])
        thresh = tol * scale
        used = -1
        for sweep in range(max_sweeps + 1):
            off = 0.0
            for i in range(n - 1):
                for k in range(i + 1, n):
                    if abs(a[b, i, k]) > off:
                        off = abs(a[b, i, k])
            if off < thresh:
                used = sweep
                break
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[b, p, q]
                    if apq == 0.0:
                        continue
                    tau = (a[b, q, q] - a[b, p, p]) / (2.0 * apq)
                    if tau >= 0.0:
                        t = 1.0 / (tau + np.hypot(1.0, tau))
                    else:
                        t = -1.0 / (-tau + np.hypot(1.0, tau))
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    for k in range(n):
                        akp = a[b, k, p]
                        akq = a[b, k, q]
                        a[b, k, p] = c * akp - s * akq
                        a[b, k, q] = s * akp + c * akq
                    for k in range(n):
                        apk = a[b, p, k]
                        aqk = a[b, q, k]
                        a[b, p, k] = c * apk - s * aqk
                        a[b, q, k] = s * apk + c * aqk
                    a[b, p, q] = 0.0
                    a[b, q, p] = 0.0
        sweeps[b] = used
        for i in range(n):
            eig[b, i] = a[b, i, i]
    return eig, sweeps


sym_jacobi_numba = njit(_sym_jacobi_py)


def sym_jacobi_numpy(g, tol, max_sweeps):
    a = np.array(g, dtype=np.float64, copy=True)
    batch, n, _ = a.shape
    iu = np.triu_indices(n, 1)
    thresh = tol * np.maximum(1.0, np.abs(a).reshape(batch, -1).max(axis=1, initial=0.0))
    sweeps = np.full(batch, -1, dtype=np.int64)
    rows = np.arange(batch)
    for sweep in range(max_sweeps + 1):
        off = np.abs(a[:, iu[0], iu[1]]).max(axis=1, initial=0.0)
        newly = (off < thresh) & (sweeps < 0)
        sweeps[newly] = sweep
        active = np.flatnonzero(sweeps < 0)
        if active.size == 0 or sweep == max_sweeps:
            break
        sub = a[active]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = sub[:, p, q]
                nz = apq != 0.0
                safe = np.where(nz, apq, 1.0)
                tau = (sub[:, q, q] - sub[:, p, p]) / (2.0 * safe)
                t = np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau))
                t = np.where(tau == 0.0, 1.0, t)
                t = np.where(nz, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp = sub[:, :, p].copy()
                colq = sub[:, :, q]
                sub[:, :, p] = c[:, None] * colp - s[:, None] * colq
                sub[:, :, q] = s[:, None] * colp + c[:, None] * colq
                rowp = sub[:, p, :].copy()
                rowq = sub[:, q, :]
                sub[:, p, :] = c[:, None] * rowp - s[:, None] * rowq
                sub[:, q, :] = s[:, None] * rowp + c[:, None] * rowq
                sub[:, p, q] = 0.0
                sub[:, q, p] = 0.0
        a[active] = sub
    eig = a[rows[:, None], np.arange(n)[None, :], np.arange(n)[None, :]]
    return eig, sweeps


# ---------------------------------------------------------------------------
# one-sided (Hestenes) Jacobi: rotates columns of A until they are mutually
# orthogonal, i.e. cyclic Jacobi applied implicitly to the Gram matrix A^T A


def _onesided_jacobi_py(x, tol, max_sweeps):
    batch, m, n = x.shape
    a = x.copy()
    sigma = np.empty((batch, n))
    sweeps = np.empty(batch, dtype=np.int64)
    for b in range(batch):
        used = -1
        for sweep in range(max_sweeps):
            rotated = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    alpha = 0.0
                    beta = 0.0
                    gamma = 0.0
                    for i in range(m):
                        alpha += a[b, i, p] * a[b, i, p]
                        beta += a[b, i, q] * a[b, i, q]
                        gamma += a[b, i, p] * a[b, i, q]
                    if alpha == 0.0 or beta == 0.0:
                        continue
                    if abs(gamma) <= tol * np.sqrt(alpha) * np.sqrt(beta):
                        continue
                    rotated = True
                    zeta = (beta - alpha) / (2.0 * gamma)
                    if zeta >= 0.0:
                        t = 1.0 / (zeta + np.hypot(1.0, zeta))
                    else:
                        t = -1.0 / (-zeta + np.hypot(1.0, zeta))
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = c * t
                    for i in range(m):
                        aip = a[b, i, p]
                        aiq = a[b, i, q]
                        a[b, i, p] = c * aip - s * aiq
                        a[b, i, q] = s * aip + c * aiq
            if not rotated:
                used = sweep
                break
        sweeps[b] = used
        for k in range(n):
            acc = 0.0
            for i in range(m):
                acc += a[b, i, k] * a[b, i, k]
            sigma[b, k] = np.sqrt(acc)
    return sigma, sweeps


onesided_jacobi_numba = njit(_onesided_jacobi_py)


def onesided_jacobi_numpy(x, tol, max_sweeps):
    a = np.array(x, dtype=np.float64, copy=True)
    batch, m, n = a.shape
    sweeps = np.full(batch, -1, dtype=np.int64)
    active = np.arange(batch)
    for sweep in range(max_sweeps):
        if active.size == 0:
            break
        sub = a[active]
        rotated = np.zeros(active.size, dtype=bool)
        for p in range(n - 1):
            for q in range(p + 1, n):
                colp = sub[:, :, p].copy()
                colq = sub[:, :, q]
                alpha = np.einsum("bi,bi->b", colp, colp)
                beta = np.einsum("bi,bi->b", colq, colq)
                gamma = np.einsum("bi,bi->b", colp, colq)
                rot = (alpha != 0.0) & (beta != 0.0)
                rot &= np.abs(gamma) > tol * np.sqrt(alpha) * np.sqrt(beta)
                if not rot.any():
                    continue
                rotated |= rot
                safe = np.where(rot, gamma, 1.0)
                zeta = (beta - alpha) / (2.0 * safe)
                t = np.sign(zeta) / (np.abs(zeta) + np.hypot(1.0, zeta))
                t = np.where(zeta == 0.0, 1.0, t)
                t = np.where(rot, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                sub[:, :, p] = c[:, None] * colp - s[:, None] * colq
                sub[:, :, q] = s[:, None] * colp + c[:, None] * colq
        a[active] = sub
        done = ~rotated
        sweeps[active[done]] = sweep
        active = active[rotated]
    sigma = np.sqrt(np.einsum("bik,bik->bk", a, a))
    return sigma, sweeps


# ---------------------------------------------------------------------------
# sequential one-step Q-learning backups; order matters, so the fallback is a
# plain loop rather than a vectorised form


def _td_tabular_py(q, states, actions, rewards, next_states, dones, lr, gamma):
    for i in range(states.shape[0]):
        s = states[i]
        a = actions[i]
        bootstrap = 0.0
        if not dones[i]:
            bootstrap = q[next_states[i], 0]
            for b in range(1, q.shape[1]):
                if q[next_states[i], b] > bootstrap:
                    bootstrap = q[next_states[i], b]
        q[s, a] += lr * (rewards[i] + gamma * bootstrap - q[s, a])


def _td_linear_py(w, feats, actions, rewards, next_feats, dones, lr, gamma):
    n_actions, dim = w.shape
    for i in range(feats.shape[0]):
        a = actions[i]
        bootstrap = 0.0
        if not dones[i]:
            for b in range(n_actions):
                v = 0.0
                for d in range(dim):
                    v += w[b, d] * next_feats[i, d]
                if b == 0 or v > bootstrap:
                    bootstrap = v
        current = 0.0
        for d in range(dim):
            current += w[a, d] * feats[i, d]
        delta = rewards[i] + gamma * bootstrap - current
        for d in range(dim):
            w[a, d] += lr * delta * feats[i, d]


td_tabular_numba = njit(_td_tabular_py)
td_tabular_python = _td_tabular_py
td_linear_numba = njit(_td_linear_py)
td_linear_python = _td_linear_py
