"""
A coupled system that leaves the nonnegative cone
=================================================

``u' + A u = 0`` with ``A = [[1, 1], [1, 1]]``. Starting from ``(1, 0)`` the
second component turns negative at once, so the cone is not invariant. Every
diagnostic in the package should agree on that.
"""

import numpy as np

from parainv import (NonnegCone, TimeGrid, check_pointwise_criterion,
                     invariance_sampling_test, matrix_form, matrix_space,
                     restart_probe, solve_linear)

space = matrix_space(np.eye(2), np.eye(2))
cone = NonnegCone(space)
form = matrix_form(space, [[1.0, 1.0], [1.0, 1.0]], (0.0, 0.1))

# %%
# The margin ``a(Pv, v - Pv)`` is negative for ``v = (1, -1)``.
report = check_pointwise_criterion(form, None, cone, n_random=0)
worst, _, sample = report.worst
print(f"worst margin {worst:g} at v = {sample}")

# %%
# The flow itself: the exact second component is ``(exp(-2t) - 1) / 2``.
traj = solve_linear(form, None, np.array([1.0, 0.0]), TimeGrid(0.0, 0.1, 1000))
print(f"u2(0.1) = {traj.final[1]:.5f}  (exact {0.5 * (np.exp(-0.2) - 1):.5f})")

# %%
# Restarting from points of the cone and probing the integral inequality.
sampling = invariance_sampling_test(form, None, cone, 4, traj.grid,
                                    starts=[(0, np.array([1.0, 0.0]))])
probe = restart_probe(form, None, cone, traj, 4)
print(f"sampling: worst distance {sampling.worst_violation:.4f}, passed={sampling.passed}")
print(f"probe: largest integral {probe.max_integral:.2e} vs tolerance {probe.tol_int:.2e}")
