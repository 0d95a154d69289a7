#!/usr/bin/env python3
"""Smoke test of the iatrx Python extension.

Build the module first:

    cargo build --release -p iatrx-py

then run this script from the repository root (or anywhere):

    python3 python/smoke_test.py
"""

import math
import os
import shutil
import sys
import tempfile

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def locate_cdylib():
    names = {
        "linux": "libiatrx.so",
        "darwin": "libiatrx.dylib",
        "win32": "iatrx.dll",
    }
    libname = names.get(sys.platform, "libiatrx.so")
    candidates = [
        os.path.join(REPO_ROOT, "target", "release", libname),
        os.path.join(REPO_ROOT, "target", "debug", libname),
    ]
    for c in candidates:
        if os.path.exists(c):
            return c
    sys.exit(
        "built extension not found; run `cargo build --release -p iatrx-py` first\n"
        f"searched: {candidates}"
    )


def import_iatrx():
    src = locate_cdylib()
    stage = tempfile.mkdtemp(prefix="iatrx_py_")
    ext = ".pyd" if sys.platform == "win32" else ".so"
    shutil.copy(src, os.path.join(stage, "iatrx" + ext))
    sys.path.insert(0, stage)
    import iatrx  # noqa: E402

    return iatrx


def main():
    iatrx = import_iatrx()

    # Bessel evaluation against known values.
    assert iatrx.bessel_j0(0.0) == 1.0
    assert abs(iatrx.bessel_j0(1.0) - 0.7651976865579666) < 1e-10
    assert abs(iatrx.bessel_j0(2.404825557695773)) < 1e-9
    print("ok bessel_j0")

    # Doppler coefficient at walking speed is near 1.
    alpha = iatrx.doppler_alpha(5.0 / 3.6, 2.0e9, 66.7e-6)
    assert abs(alpha - 0.99999624) < 1e-6, alpha
    print(f"ok doppler_alpha = {alpha:.8f}")

    # Hermitian eigendecomposition and minor subspace.
    a = [
        [complex(5, 0), complex(0, 0), complex(0, 0)],
        [complex(0, 0), complex(2, 0), complex(0, 1)],
        [complex(0, 0), complex(0, -1), complex(2, 0)],
    ]
    vals, _vecs = iatrx.hermitian_eig(a)
    assert all(vals[i] <= vals[i + 1] for i in range(len(vals) - 1))
    assert abs(vals[0] - 1.0) < 1e-12 and abs(vals[2] - 5.0) < 1e-12
    u = iatrx.minor_subspace(a, 1)
    e_min = [[complex(0, 0)], [complex(1 / math.sqrt(2), 0)], [complex(0, 1 / math.sqrt(2))]]
    assert iatrx.subspace_distance(u, e_min) < 1e-9
    print("ok hermitian_eig / minor_subspace")

    # Manifold descent agrees with the eigendecomposition oracle.
    phi = [
        [complex(4, 0), complex(1, 0.5), complex(0, 0), complex(0.2, 0)],
        [complex(1, -0.5), complex(3, 0), complex(0.1, 0), complex(0, 0)],
        [complex(0, 0), complex(0.1, 0), complex(2, 0), complex(0, 0.3)],
        [complex(0.2, 0), complex(0, 0), complex(0, -0.3), complex(1, 0)],
    ]
    result = iatrx.cggm_minimize(phi, 2, seed=1)
    oracle = sum(iatrx.hermitian_eig(phi)[0][:2])
    assert result["converged"]
    assert abs(result["objective"] - oracle) < 1e-3 * abs(oracle), (result["objective"], oracle)
    print(f"ok cggm_minimize: J = {result['objective']:.6f} vs oracle {oracle:.6f}")

    # FDPM on a strong-gap stream localizes the noise subspace.
    import random

    rng = random.Random(7)

    def sample():
        stds = [math.sqrt(8 / 2), math.sqrt(6 / 2), math.sqrt(0.02 / 2), math.sqrt(0.02 / 2)]
        return [complex(rng.gauss(0, s), rng.gauss(0, s)) for s in stds]

    samples = [sample() for _ in range(2000)]
    u = iatrx.fdpm_track(samples, 2, alpha0=-0.2, seed=2)
    target = [
        [complex(0, 0), complex(0, 0)],
        [complex(0, 0), complex(0, 0)],
        [complex(1, 0), complex(0, 0)],
        [complex(0, 0), complex(1, 0)],
    ]
    dist = iatrx.subspace_distance(u, target)
    assert dist < 0.1, dist
    print(f"ok fdpm_track: distance to noise subspace = {dist:.4f}")

    # Small end-to-end scenario: determinism and the EE identity.
    cfg = iatrx.Config()
    for key, value in [("B", "2"), ("K", "2"), ("M", "4"), ("m_b", "2"), ("T", "2"), ("T_train", "50")]:
        cfg.set(key, value)
    rows1 = iatrx.simulate(cfg, seed=11)
    rows2 = iatrx.simulate(cfg, seed=11)
    assert rows1 == rows2, "same seed must reproduce identical records"
    assert len(rows1) == 2 * 2 * 2
    rho = float(cfg.get("rho"))
    m_ant = int(cfg.get("M"))
    p_c = float(cfg.get("P_c"))
    p_o = float(cfg.get("P_o"))
    by_cell = {}
    for row in rows1:
        by_cell.setdefault((row["t"], row["cell"]), []).append(row)
    for (_, _), rows in by_cell.items():
        radiated = sum(r["power_w"] for r in rows)
        consumed = rho * radiated + m_ant * p_c + p_o
        assert abs(rows[0]["ee_bps_hz_per_w"] - rows[0]["rate_bps_hz"] / consumed) < 1e-12
    print("ok simulate: deterministic, EE identity holds")

    csv = iatrx.simulate_csv(cfg, seed=11)
    assert csv.splitlines()[0].startswith("t,cell,rate_bps_hz")
    print("ok simulate_csv")

    rows = iatrx.sweep(cfg, "error_std", [0.0, 0.1], drops=2)
    assert len(rows) == 2 and rows[0]["drops"] == 2
    print("ok sweep")

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
