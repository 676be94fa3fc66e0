# Copyright 2026 The qdslab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent reference values for the C++ tests (numpy/scipy/mpmath).

Nothing here imports qdslab. Run it and paste the output into
tests/unit/oracle_values.hpp when a reference changes.
"""

import mpmath as mp
import numpy as np
import scipy.linalg as sla


def lattice(R, N):
    return -R + np.arange(N) * (2.0 * R / (N - 1))


def central_diff(N, h):
    D = np.zeros((N, N))
    for i in range(N - 1):
        D[i, i + 1] = 1.0 / (2 * h)
        D[i + 1, i] = -1.0 / (2 * h)
    return D


def system(w, R, N):
    x = lattice(R, N)
    h = x[1] - x[0]
    D = central_diff(N, h).astype(complex)
    W = np.diag(w(x)).astype(complex)
    L = -(W + D)
    H = 0.5j * (W @ D + D @ W)
    G0 = -0.5 * L.conj().T @ L
    G = -1j * H + G0
    Phi = -2 * G0
    C = Phi + np.eye(N)
    return x, L, H, G0, G, Phi, C


def bulk(N, w=3):
    return np.arange(w, N - w)


def cf_k(w, R, N):
    x, L, H, G0, G, Phi, C = system(w, R, N)
    M = C @ G + G.conj().T @ C + L.conj().T @ C @ L
    M = 0.5 * (M + M.conj().T)
    b = bulk(N)
    ev = sla.eigh(M[np.ix_(b, b)], C[np.ix_(b, b)], eigvals_only=True)
    return max(0.0, ev[-1])


def rel_bound(A, B, b_off, N):
    b = bulk(N)
    Ac, Bc = A[:, b], B[:, b]
    ev = sla.eigh(Bc.conj().T @ Bc, Ac.conj().T @ Ac + b_off * np.eye(len(b)), eigvals_only=True)
    return max(0.0, ev[-1])


def out(name, value):
    print(f"inline constexpr double {name} = {float(value)!r};")


# check_c2: W = x^3 on [-10, 10], N = 201, eps = 0.5
x = lattice(10.0, 201)
out("kC2Cubic", np.max(np.maximum(3 * x**2 - 0.5 * np.abs(x) ** 3, 0.0)))
# check_c3: |W''| = 6|x| <= c1 |x|^3 + c2, c1 = 1 (continuum optimum 4 sqrt 2)
out("kC3CubicC1", np.max(np.maximum(6 * np.abs(x) - np.abs(x) ** 3, 0.0)))
out("kC3CubicContinuum", 4 * mp.sqrt(2))
# check_c4: W = -x^3 on [-5, 5]
x5 = lattice(5.0, 101)
out("kC4NegCubic", max(0.0, -np.min(-3 * x5**2)))

# Dirichlet Laplacian, N = 16, R = 1: smallest-magnitude eigenvalue
N, R = 16, 1.0
h = 2 * R / (N - 1)
out("kLapTopN16", -(4 / h**2) * np.sin(np.pi / (2 * (N + 1))) ** 2)

# Ornstein-Uhlenbeck and heat references, f0 = exp(-x^2 / (2 s0)), s0 = 0.5, t = 0.2,
# by direct Gaussian quadrature of E[f0(x e^{-2t} + zeta)].
s0, t = mp.mpf("0.5"), mp.mpf("0.2")
v = (1 - mp.e ** (-4 * t)) / 4


def ou(xv):
    f = lambda z: mp.e ** (-((xv * mp.e ** (-2 * t) + z) ** 2) / (2 * s0)) * mp.npdf(z, 0, mp.sqrt(v))
    return mp.quad(f, [-mp.inf, mp.inf])


def heat(xv):
    f = lambda z: mp.e ** (-((xv + z) ** 2) / (2 * s0)) * mp.npdf(z, 0, mp.sqrt(t))
    return mp.quad(f, [-mp.inf, mp.inf])


out("kOuAt0", ou(0))
out("kOuAt1", ou(1))
out("kHeatAt0", heat(0))
out("kHeatAt1", heat(1))

# Chebotarev-Fagnola k for W = x, R = 6, bulk width 3
out("kCfK64", cf_k(lambda s: s, 6.0, 64))
out("kCfK128", cf_k(lambda s: s, 6.0, 128))

# Relative bound of H against G0 at b = 10, W = x, R = 6
for n in (64, 128):
    _, L, H, G0, *_ = system(lambda s: s, 6.0, n)
    out(f"kRelHG0N{n}", rel_bound(G0, H, 10.0, n))
