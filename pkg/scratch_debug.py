import numpy as np

from shrinkmorph.analysis import fit_midline_curvature, timoshenko_curvature
from shrinkmorph.fem import SolveConfig, build_free_constraints, solve_static
from shrinkmorph.geometry import StripSpec, build_strip
from shrinkmorph.materials import MaterialModel, ThermalLoad
from shrinkmorph.meshing import LayerStackEntry, extrude, triangulate

eps_star = 1e-3

# --- sanity: single free layer with in-plane eigenstrain contracts uniformly
layout = build_strip(StripSpec(20.0, 5.0), kirigami_margin=0.0)
mesh2d = triangulate(layout, h_target=1.5)
mesh = extrude(mesh2d, [LayerStackEntry("substrate", 0.5, "sub")])
mats = {"sub": MaterialModel(E=100.0, nu=0.49, alpha=-eps_star, name="sub")}
res = solve_static(
    mesh, mats, ThermalLoad(1.0, n_steps=2), SolveConfig(imperfection_amplitude=1e-9),
    constraints=build_free_constraints(mesh),
)
x = res.reference
d = res.deformed
stretch = np.sqrt(1.0 - 2.0 * eps_star)
span_x = d[:, 0].max() - d[:, 0].min()
print(f"single layer: span_x={span_x:.6f} expected {20.0*stretch:.6f}")
print(f"  z-range deformed: {d[:,2].min():.2e}..{d[:,2].max():.2e} (t=0.5)")

# --- bilayer at two resolutions, nu in {0.49, 0.3}
for nu in (0.49, 0.3):
    for h in (2.0, 1.0):
        layout = build_strip(StripSpec(60.0, 10.0), kirigami_margin=0.0)
        mesh2d = triangulate(layout, h_target=h)
        stack = [
            LayerStackEntry("substrate", 0.1, "sub"),
            LayerStackEntry("kirigami", 1.8, "kir"),
        ]
        mesh = extrude(mesh2d, stack)
        mats = {
            "sub": MaterialModel(E=404.2082, nu=nu, alpha=-eps_star, name="sub"),
            "kir": MaterialModel(E=761.6368, nu=nu, alpha=0.0, name="kir"),
        }
        res = solve_static(
            mesh, mats, ThermalLoad(1.0, n_steps=2),
            SolveConfig(imperfection_amplitude=1e-9),
            constraints=build_free_constraints(mesh),
        )
        kappa = fit_midline_curvature(res, "x")
        uz = res.displacement.reshape(-1, 3)[:, 2]
        # polyfit cross-check on substrate bottom midline
        ids = res.substrate_bottom_nodes
        ref = res.reference[ids]
        sel = np.abs(ref[:, 1]) < 1.0
        xs = res.deformed[ids][sel, 0]
        zs = res.deformed[ids][sel, 2]
        c = np.polyfit(xs, zs, 2)
        print(
            f"nu={nu} h={h}: kappa_fit={kappa:.3e} polyfit_kappa={2*c[0]:.3e} "
            f"uz range [{uz.min():.4f}, {uz.max():.4f}]"
        )
print(f"oracle {timoshenko_curvature(404.2082, 0.1, 761.6368, 1.8, eps_star):.3e}")
