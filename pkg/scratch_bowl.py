import time

import numpy as np

from shrinkmorph.analysis import measure_height
from shrinkmorph.errors import ContinuationStallError
from shrinkmorph.fem import SolveConfig, solve_static
from shrinkmorph.geometry import LotusSpec, build_lotus
from shrinkmorph.materials import get_preset, ThermalLoad
from shrinkmorph.meshing import LayerStackEntry, extrude, triangulate

sub = get_preset("shrink_film_sim")
kir = get_preset("kirigami_abs")

for gamma in (0.2, 0.5, 0.8):
    t0 = time.perf_counter()
    layout = build_lotus(LotusSpec(R=30.0, gamma=gamma, n_petals=8))
    mesh2d = triangulate(layout, h_target=1.25)
    mesh = extrude(mesh2d, [
        LayerStackEntry("substrate", 0.1, sub.name),
        LayerStackEntry("kirigami", 1.8, kir.name),
    ])
    mats = {sub.name: sub, kir.name: kir}
    cfg = SolveConfig(imperfection_seed=0)
    try:
        res = solve_static(mesh, mats, ThermalLoad(110.0, n_steps=20), cfg)
        stall = ""
    except ContinuationStallError as e:
        res = e.result
        stall = " (stalled)"
    dt = time.perf_counter() - t0
    h, h2r = measure_height(res, 30.0)
    iters = [r.iterations for r in res.history]
    curve = {f"{rec.lam:.3f}": round(rec.height, 3) for rec in res.history}
    print(f"gamma={gamma}: {len(mesh.elements)} elems, lam={res.lam:.4f}{stall}, "
          f"H={h:.3f} H/2R={h2r:.4f}, {dt:.0f}s, iters={iters}")
    print(f"  H(lam): {curve}")
