import sys
import time

import numpy as np

from shrinkmorph.fem import build_constraints
from shrinkmorph.fem.assembly import FEModel
from shrinkmorph.fem.solve import linear_solve, seeded_imperfection
from shrinkmorph.geometry import LotusSpec, build_lotus
from shrinkmorph.materials import get_preset, ThermalLoad
from shrinkmorph.meshing import LayerStackEntry, extrude, triangulate

gamma = float(sys.argv[1]) if len(sys.argv) > 1 else 0.2
amp = float(sys.argv[2]) if len(sys.argv) > 2 else 1e-4
n_steps = int(sys.argv[3]) if len(sys.argv) > 3 else 20

sub = get_preset("shrink_film_sim")
kir = get_preset("kirigami_abs")
layout = build_lotus(LotusSpec(R=30.0, gamma=gamma, n_petals=8))
mesh2d = triangulate(layout, h_target=1.25)
mesh = extrude(mesh2d, [
    LayerStackEntry("substrate", 0.1, sub.name),
    LayerStackEntry("kirigami", 1.8, kir.name),
])
mats = {sub.name: sub, kir.name: kir}
print(f"gamma={gamma} amp={amp} n={n_steps}: {len(mesh.elements)} elems", flush=True)
ref = seeded_imperfection(mesh, amp, 0, "+z")
model = FEModel(mesh, mats, ThermalLoad(110.0), reference=ref)
cons = build_constraints(mesh)
fixed = cons.fixed_indices()
free = np.setdiff1d(np.arange(model.n_dof), fixed)
bottom = np.nonzero(mesh.node_level == 0)[0]

u = np.zeros(model.n_dof)
lam_done = 0.0
pending = [(k + 1) / n_steps for k in range(n_steps)]
min_step = (1.0 / n_steps) / 64
t_start = time.perf_counter()

while pending and time.perf_counter() - t_start < 560:
    lam_t = pending[0]
    uu = u.copy()
    r0 = np.linalg.norm(model.residual(uu, lam_t)[free])
    ok = False
    t0 = time.perf_counter()
    for it in range(30):
        r, k = model.residual_and_tangent(uu, lam_t)
        try:
            du = linear_solve(k, -r, fixed)
        except Exception as e:
            print(f"  lam={lam_t:.4f} it{it}: solver fail {e}", flush=True)
            break
        uu += du
        rn = np.linalg.norm(model.residual(uu, lam_t)[free])
        if not np.isfinite(rn) or rn > 1e4 * r0:
            break
        if rn <= 1e-8 * r0:
            ok = True
            break
    dt = time.perf_counter() - t0
    if ok:
        u = uu
        lam_done = lam_t
        pending.pop(0)
        h = (ref[bottom, 2] + u.reshape(-1, 3)[bottom, 2]).max()
        print(f"ACC lam={lam_t:.4f} iters={it+1} H={h:.3f} ({dt:.0f}s)", flush=True)
    else:
        delta = lam_t - lam_done
        if delta / 2 < min_step:
            print(f"STALL at lam={lam_done:.4f}", flush=True)
            break
        pending.insert(0, lam_done + delta / 2)
        print(f"FAIL lam={lam_t:.4f} after {it+1} iters ({dt:.0f}s) -> try {pending[0]:.4f}", flush=True)
print(f"done lam={lam_done} total {time.perf_counter()-t_start:.0f}s", flush=True)
