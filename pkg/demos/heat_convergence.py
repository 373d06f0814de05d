"""
Heat equation on the unit interval
==================================

The first sine mode decays like ``exp(-pi^2 t)``. We solve with P1 elements
and the theta-scheme, then watch the error shrink under refinement.
"""

import numpy as np

from parainv import TimeGrid, build_interval_space, diffusion_form, solve_linear

# %%
# One accurate solve: 200 cells, backward Euler with tau = 1e-4.
space = build_interval_space(200)
form = diffusion_form(space, 1.0, (0.0, 0.1))
u0 = space.interpolate(lambda x: np.sin(np.pi * x))
traj = solve_linear(form, None, u0, TimeGrid(0.0, 0.1, 1000))
exact = np.exp(-np.pi ** 2 * 0.1) * np.sin(np.pi * space.x)
print(f"max nodal error at t=0.1: {np.abs(traj.final - exact).max():.3e}")

# %%
# Temporal order by self-convergence. Differences of successive solutions on
# one mesh see only the time error.
for theta, levels in ((1.0, (100, 200, 400)), (0.5, (20, 40, 80))):
    finals = [solve_linear(form, None, u0, TimeGrid(0.0, 0.1, s), theta).final
              for s in levels]
    d1 = np.abs(finals[0] - finals[1]).max()
    d2 = np.abs(finals[1] - finals[2]).max()
    print(f"theta={theta}: observed order {np.log2(d1 / d2):.3f}")

# %%
# Spatial order, with a Crank-Nicolson step small enough to hide the time error.
errors = []
for n in (10, 20, 40, 80):
    sp = build_interval_space(n)
    fm = diffusion_form(sp, 1.0, (0.0, 0.1))
    fin = solve_linear(fm, None, sp.interpolate(lambda x: np.sin(np.pi * x)),
                       TimeGrid(0.0, 0.1, 2000), 0.5).final
    errors.append(np.abs(fin - np.exp(-np.pi ** 2 * 0.1) * np.sin(np.pi * sp.x)).max())
print("spatial orders:", np.round(np.log2(np.array(errors[:-1]) / errors[1:]), 3))
