import numpy as np

from shrinkmorph.analysis import fit_midline_curvature, timoshenko_curvature
from shrinkmorph.fem import SolveConfig, build_free_constraints, solve_static
from shrinkmorph.geometry import StripSpec, build_strip
from shrinkmorph.materials import MaterialModel, ThermalLoad
from shrinkmorph.meshing import LayerStackEntry, extrude, triangulate

eps = 1e-3


def run(nu, h, t1=1.0, t2=1.0, E1=100.0, E2=100.0, subs=(1, 1), L=60.0, W=10.0):
    layout = build_strip(StripSpec(L, W), kirigami_margin=0.0)
    mesh2d = triangulate(layout, h_target=h)
    stack = [
        LayerStackEntry("substrate", t1, "sub", subdivisions=subs[0]),
        LayerStackEntry("kirigami", t2, "kir", subdivisions=subs[1]),
    ]
    mesh = extrude(mesh2d, stack)
    mats = {
        "sub": MaterialModel(E=E1, nu=nu, alpha=-eps, name="sub"),
        "kir": MaterialModel(E=E2, nu=nu, alpha=0.0, name="kir"),
    }
    res = solve_static(
        mesh, mats, ThermalLoad(1.0, n_steps=2),
        SolveConfig(imperfection_amplitude=1e-9),
        constraints=build_free_constraints(mesh),
    )
    k = fit_midline_curvature(res, "x")
    oracle = timoshenko_curvature(E1, t1, E2, t2, eps)
    return k, oracle, len(mesh.elements)


for nu in (0.0, 0.3, 0.49):
    for h in (2.0, 1.0):
        k, oracle, ne = run(nu, h)
        print(f"equal layers nu={nu} h={h}: kappa={k:.4e} oracle={oracle:.4e} "
              f"ratio={abs(k)/oracle:.3f} ({ne} elems)")

print()
for subs in ((1, 1), (2, 2), (1, 4)):
    k, oracle, ne = run(0.49, 1.5, t1=0.1, t2=1.8, E1=404.2082, E2=761.6368, subs=subs)
    print(f"paper bilayer nu=0.49 subs={subs}: ratio={abs(k)/oracle:.3f} ({ne} elems)")
