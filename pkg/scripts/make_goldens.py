"""Regenerate the golden regression fixtures under fixtures/.

Run: python scripts/make_goldens.py --write
Without --write it recomputes and diffs against the stored values.
"""

import argparse
import json
import os

import numpy as np

from hilbertlab import fixtures as fx
from hilbertlab.blaschke import blaschke_from_embedding
from hilbertlab.chords import (alpha_profile, estimate_comparison_constant,
                               reliable_t_window)
from hilbertlab.entropy import BallVolumes, make_volume_form, uniformity_constant
from hilbertlab.monge_ampere import solve_monge_ampere

ROOT = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def compute():
    out = {}
    sq = fx.unit_square()
    sol = solve_monge_ampere(sq, 1 / 32)
    fld = blaschke_from_embedding(sol)
    g = sol.grid
    out["square_u_h32"] = {
        "i": np.argwhere(g.inside)[:, 0].tolist(),
        "j": np.argwhere(g.inside)[:, 1].tolist(),
        "u": sol.u[g.inside].tolist(),
    }
    sol64, fld64 = (solve_monge_ampere(sq, 1 / 64), None)
    fld64 = blaschke_from_embedding(sol64)
    tri = fx.standard_triangle()
    sol_t = solve_monge_ampere(tri, 1 / 64)
    fld_t = blaschke_from_embedding(sol_t)
    consts = {
        "square_C_est_h64": estimate_comparison_constant(sq, sol64, fld64),
        "triangle_C_est_h64": estimate_comparison_constant(tri, sol_t, fld_t),
    }
    form = make_volume_form(sq, sol64, None, "busemann")
    bv = BallVolumes(form, (0.0, 0.0))
    consts["square_ball_ratio_R2_R1_busemann_h64"] = bv.volume(2.0) / bv.volume(1.0)
    fb = make_volume_form(sq, sol64, fld64, "blaschke")
    consts["square_uniformity_K_blaschke_h64"] = uniformity_constant(sq, fb)
    out["constants"] = consts
    # square mid-chord profile (horizontal chord through edge midpoints)
    chord = sq.chord_through((0.0, 0.0), (0.5, 0.0))
    lo, hi = reliable_t_window(sol64, fld64, chord)
    prof = alpha_profile(sol64, fld64, chord, lo, hi, 21)
    out["square_mid_chord_h64"] = {
        "t": prof.ts.tolist(),
        "alpha": prof.alpha.tolist(),
        "alpha_p": prof.alpha_p.tolist(),
        "alpha_pp": prof.alpha_pp.tolist(),
        "hb_chord": prof.hb_chord.tolist(),
    }
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--write", action="store_true")
    args = ap.parse_args()
    data = compute()
    os.makedirs(ROOT, exist_ok=True)
    targets = {
        "golden_square_u_h32.json": data["square_u_h32"],
        "golden_constants.json": data["constants"],
        "golden_square_chord_h64.json": data["square_mid_chord_h64"],
    }
    for name, payload in targets.items():
        path = os.path.join(ROOT, name)
        if args.write:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(payload, fh)
                fh.write("\n")
            print(f"wrote {path}")
        else:
            with open(path, "r", encoding="utf-8") as fh:
                stored = json.load(fh)
            if name == "golden_constants.json":
                for k, v in payload.items():
                    d = abs(v - stored[k])
                    print(f"{k}: recomputed {v:.12g} stored {stored[k]:.12g} "
                          f"(|diff| {d:.2e})")
            else:
                a = np.asarray(payload[list(payload)[-1]])
                b = np.asarray(stored[list(stored)[-1]])
                print(f"{name}: max |diff| {np.abs(a - b).max():.2e}")


if __name__ == "__main__":
    main()
