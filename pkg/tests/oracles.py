"""Dense-matrix reference implementations, independent of the simulator kernels."""
import numpy as np

I2 = np.eye(2, dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
Z = np.diag([1.0, -1.0]).astype(complex)


def ry(t):
    return np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]], dtype=complex)


def on_qubit(n, q, m):
    """Full 2^n x 2^n operator; qubit 0 is the rightmost Kronecker factor."""
    out = np.eye(1, dtype=complex)
    for k in reversed(range(n)):
        out = np.kron(out, m if k == q else I2)
    return out


def cnot(n, c, t):
    dim = 1 << n
    U = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        bits = [(i >> k) & 1 for k in range(n)]
        if bits[c]:
            bits[t] ^= 1
        j = sum(b << k for k, b in enumerate(bits))
        U[j, i] = 1.0
    return U


def z_diag(n, q):
    return np.array([1.0 - 2.0 * ((i >> q) & 1) for i in range(1 << n)])


def zero(n):
    v = np.zeros(1 << n, dtype=complex)
    v[0] = 1.0
    return v


def p_zero(psi, n, q):
    proj = (np.eye(1 << n) + on_qubit(n, q, Z)) / 2
    return float(np.real(psi.conj() @ proj @ psi))


def zz_state(x, pairs, reps=1):
    """(exp(-i[sum x_i Z_i + sum_pairs x_i x_j Z_i Z_j]) H^n)^reps |0>."""
    n = len(x)
    gen = sum(x[i] * z_diag(n, i) for i in range(n))
    gen = gen + sum(x[i] * x[j] * z_diag(n, i) * z_diag(n, j) for i, j in pairs)
    Hn = np.eye(1, dtype=complex)
    for _ in range(n):
        Hn = np.kron(Hn, H)
    psi = zero(n)
    for _ in range(reps):
        psi = np.exp(-1j * gen) * (Hn @ psi)
    return psi


def angle_state(x):
    psi = np.ones(1, dtype=complex)
    for xi in reversed(x):
        psi = np.kron(psi, np.array([np.cos(xi / 2), np.sin(xi / 2)]))
    return psi


def ansatz_unitary(n, layers, pairs, theta):
    U = np.eye(1 << n, dtype=complex)
    k = 0
    for _ in range(layers):
        for q in range(n):
            U = on_qubit(n, q, ry(theta[k])) @ U
            k += 1
        for c, t in pairs:
            U = cnot(n, c, t) @ U
    for q in range(n):
        U = on_qubit(n, q, ry(theta[k])) @ U
        k += 1
    return U


def fidelity(a, b):
    return abs(np.vdot(a, b)) ** 2


def random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def central_diff(f, theta, h=1e-5):
    theta = np.asarray(theta, dtype=float)
    out = []
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        out.append((f(theta + e) - f(theta - e)) / (2 * h))
    return np.array(out)
