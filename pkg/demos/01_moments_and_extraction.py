"""Moment matrices, localizing matrices and rank-one extraction.

Run with ``python demos/01_moments_and_extraction.py``.
"""
# %%
import numpy as np

from ccmpc.extraction import extract_control
from ccmpc.moments import (delta_moments, empirical_moments, localizing_matrix, moment_matrix,
                           product_moments, uniform_moments)
from ccmpc.poly import Polynomial, monomial_basis

np.set_printoptions(precision=4, suppress=True, linewidth=110)

# %% The basis is listed in graded reverse lexicographic order.
print("basis of R_2[x1, x2]:", monomial_basis(2, 2))

# %% Moments of w ~ U[-1/2, 1/2] and the moment matrix of order 2.
y_w = uniform_moments(-0.5, 0.5, 4)
print("moments of U[-1/2, 1/2]:", y_w.values)
M = moment_matrix(y_w, 2)
print("M_2 =\n", M)
print("smallest eigenvalue:", np.linalg.eigvalsh(M)[0])

# %% A localizing matrix certifies support.  For p = 1/4 - w^2 it is PSD,
# for p = w^2 - 1/4 (support outside the interval) it is not.
w = Polynomial.variable(0, 1)
for p, name in [(0.25 - w ** 2, "1/4 - w^2"), (w ** 2 - 0.25, "w^2 - 1/4")]:
    lam = np.linalg.eigvalsh(localizing_matrix(y_w, p, 1))
    print(f"M_1(y; {name}) eigenvalues {lam}")

# %% Product measure of two independent uniforms, via a Riesz evaluation.
y_uw = product_moments([uniform_moments(-1, 1, 4), y_w])
print("E[u^2 w^2] for u ~ U[-1,1], w ~ U[-1/2,1/2]:", y_uw[(2, 2)], "(exact 1/36 =", 1 / 36, ")")

# %% A point mass gives a rank-one moment matrix; the first moments are the point.
u = np.array([-0.5634, -0.4647, 0.0007])
res = extract_control(delta_moments(u, 6), 3)
print("recovered", res.u_star, "rank ratio", f"{res.rank_ratio:.1e}", "certified", res.certified)

# %% Two atoms at -1 and 1 average to 0, which is not a valid input.
res = extract_control(empirical_moments(np.array([[-1.0], [1.0]]), 4), 2)
print("mixture mean", res.u_star, "rank ratio", f"{res.rank_ratio:.2f}", "certified", res.certified)
