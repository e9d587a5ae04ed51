import sys
import time

from shrinkmorph.analysis import measure_height
from shrinkmorph.errors import ContinuationStallError
from shrinkmorph.fem import SolveConfig, solve_static
from shrinkmorph.geometry import LotusSpec, build_lotus
from shrinkmorph.materials import get_preset, ThermalLoad
from shrinkmorph.meshing import LayerStackEntry, extrude, triangulate

gamma = float(sys.argv[1])
amp = float(sys.argv[2])
cap = float(sys.argv[3]) if len(sys.argv) > 3 else 0.5

sub = get_preset("shrink_film_sim")
kir = get_preset("kirigami_abs")
layout = build_lotus(LotusSpec(R=30.0, gamma=gamma, n_petals=8))
mesh2d = triangulate(layout, h_target=1.25)
mesh = extrude(mesh2d, [
    LayerStackEntry("substrate", 0.1, sub.name),
    LayerStackEntry("kirigami", 1.8, kir.name),
])
mats = {sub.name: sub, kir.name: kir}
cfg = SolveConfig(imperfection_seed=0, imperfection_amplitude=amp, lambda_max=cap)
t0 = time.perf_counter()
try:
    res = solve_static(mesh, mats, ThermalLoad(110.0, n_steps=20), cfg)
    tag = "ok"
except ContinuationStallError as e:
    res = e.result
    tag = "STALL"
dt = time.perf_counter() - t0
h, h2r = measure_height(res, 30.0)
iters = sum(r.iterations for r in res.history)
print(f"gamma={gamma} amp={amp}: lam={res.lam:.4f} [{tag}] H={h:.3f} "
      f"H/2R={h2r:.4f} {dt:.0f}s {iters} newton iters", flush=True)
for rec in res.history:
    print(f"  lam={rec.lam:.4f} it={rec.iterations} H={rec.height:.3f}", flush=True)
