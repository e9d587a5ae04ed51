import time

import numpy as np

from shrinkmorph.analysis import fit_midline_curvature, timoshenko_curvature
from shrinkmorph.fem import SolveConfig, build_free_constraints, solve_static
from shrinkmorph.geometry import StripSpec, build_strip
from shrinkmorph.materials import MaterialModel, ThermalLoad
from shrinkmorph.meshing import LayerStackEntry, extrude, triangulate

t0 = time.perf_counter()
layout = build_strip(StripSpec(60.0, 10.0), kirigami_margin=0.0)
mesh2d = triangulate(layout, h_target=1.25)
print(f"mesh2d: {len(mesh2d.triangles)} tris, {len(mesh2d.nodes)} nodes, warnings={mesh2d.warnings}")
stack = [
    LayerStackEntry("substrate", 0.1, "sub"),
    LayerStackEntry("kirigami", 1.8, "kir"),
]
mesh = extrude(mesh2d, stack)
print(f"mesh3d: {len(mesh.elements)} wedges, {len(mesh.nodes)} nodes")

eps_star = 1e-3
mats = {
    "sub": MaterialModel(E=404.2082, nu=0.49, alpha=-eps_star, name="sub"),
    "kir": MaterialModel(E=761.6368, nu=0.49, alpha=0.0, name="kir"),
}
load = ThermalLoad(delta_T=1.0, n_steps=5)
cfg = SolveConfig(imperfection_amplitude=1e-5, imperfection_seed=0)
cons = build_free_constraints(mesh)
t1 = time.perf_counter()
print(f"setup {t1-t0:.2f}s")
res = solve_static(mesh, mats, load, cfg, constraints=cons)
t2 = time.perf_counter()
print(f"solve {t2-t1:.2f}s, lam={res.lam}, iters={[r.iterations for r in res.history]}")

kappa_fem = fit_midline_curvature(res, "x")
kappa_oracle = timoshenko_curvature(404.2082, 0.1, 761.6368, 1.8, eps_star)
print(f"kappa fem    = {kappa_fem:.6e}")
print(f"kappa oracle = {kappa_oracle:.6e}")
print(f"rel diff     = {abs(abs(kappa_fem) - kappa_oracle) / kappa_oracle:.4%}")
