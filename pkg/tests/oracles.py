"""Reference values computed independently of the library's optimizers."""
import numpy as np
from scipy.optimize import brentq, minimize_scalar

TSIRELSON = 1.4142136  # frozen from tsirelson_oracle()
KCBS_MAX = 1.3147573  # frozen from kcbs_scan_oracle()

_Z = np.diag([1.0, -1.0])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_I = np.eye(2)


def tsirelson_matrices():
    return [np.kron(_Z, _I), np.kron(_X, _I),
            np.kron(_I, (_Z + _X) / np.sqrt(2)), np.kron(_I, (_Z - _X) / np.sqrt(2))]


def tsirelson_oracle():
    """Top eigenvalue of the two-qubit CHSH operator, built term by term."""
    a1, a2, b1, b2 = tsirelson_matrices()
    t = 0.5 * (a1 @ b1 + a1 @ b2 + a2 @ b1 - a2 @ b2)
    return float(np.linalg.eigvalsh(t)[-1])


def kcbs_scan_oracle():
    """Scan pure states over the symmetric pentagram configuration.

    The cone angle is fixed by requiring cyclically neighbouring vectors to be
    orthogonal (so neighbouring rank-1 reflections commute); the state angle
    is scanned on a grid and refined.
    """
    step = 4 * np.pi / 5
    theta = brentq(lambda th: np.cos(th) ** 2 + np.sin(th) ** 2 * np.cos(step), 0.05, 1.55)
    vs = [np.array([np.cos(theta), np.sin(theta) * np.cos(step * j), np.sin(theta) * np.sin(step * j)])
          for j in range(5)]
    a = [np.eye(3) - 2 * np.outer(v, v) for v in vs]
    t = -sum(a[j] @ a[(j + 1) % 5] for j in range(5)) / 3

    def value(alpha):
        psi = np.array([np.cos(alpha), np.sin(alpha), 0.0])
        return float(psi @ t @ psi)

    grid = np.linspace(0, np.pi, 2001)
    best = grid[int(np.argmax([value(x) for x in grid]))]
    res = minimize_scalar(lambda x: -value(x), bounds=(best - 0.01, best + 0.01), method="bounded",
                          options={"xatol": 1e-12})
    return max(-res.fun, value(best))
