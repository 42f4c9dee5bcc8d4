import numpy as np
import pytest
from scipy import integrate, linalg

from opennet.network import NetworkSpec, ShiftPolicy, build_system


def random_network(rng, n, density=0.4, inputs=None, outputs=None, dag=False):
    """Random non-negative weighted network (optionally acyclic)."""
    edges = []
    for s in range(n):
        for t in range(n):
            if s == t or (dag and t <= s):
                continue
            if rng.random() < density:
                edges.append((s, t, float(rng.uniform(0.1, 2.0))))
    if inputs is None:
        inputs = rng.choice(n, size=rng.integers(1, n + 1), replace=False)
    if outputs is None:
        outputs = rng.choice(n, size=rng.integers(1, n + 1), replace=False)
    labels = tuple(f"v{k}" for k in range(n))
    return NetworkSpec(labels, tuple(edges), tuple(sorted(inputs)), tuple(sorted(outputs)))


def random_system(rng, n, margin=None, **kw):
    spec = random_network(rng, n, **kw)
    margin = float(rng.uniform(0.3, 2.0)) if margin is None else margin
    return spec, build_system(spec, ShiftPolicy(margin))


def vectorized_lyapunov(a, q):
    """Oracle: solve (I kron A + A kron I) vec(W) = -vec(Q) directly (N <= 12)."""
    n = a.shape[0]
    assert n <= 12
    eye = np.eye(n)
    op = np.kron(eye, a) + np.kron(a, eye)
    w = np.linalg.solve(op, -q.reshape(-1, order="F")).reshape(n, n, order="F")
    return 0.5 * (w + w.T)


def quadrature_lyapunov(a, q, tail=1e-10):
    """Oracle: integral of e^{At} Q e^{A^T t} over [0, T], T doubled until the tail is negligible."""
    horizon = 1.0
    qn = max(np.linalg.norm(q, 2), 1.0)
    while np.linalg.norm(linalg.expm(a * horizon), 2) ** 2 * qn / 1e-3 >= tail:
        horizon *= 2.0

    def f(t):
        e = linalg.expm(a * t)
        return e @ q @ e.T

    w, _ = integrate.quad_vec(f, 0.0, horizon, epsabs=1e-12, epsrel=1e-10, limit=2000)
    return 0.5 * (w + w.T)


def chain_spec(n, weights=None):
    weights = [1.0] * (n - 1) if weights is None else list(weights)
    labels = tuple(str(k) for k in range(1, n + 1))
    edges = tuple((k, k + 1, float(w)) for k, w in enumerate(weights))
    return NetworkSpec(labels, edges, (0,), (n - 1,))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
