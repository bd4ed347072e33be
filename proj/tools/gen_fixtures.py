#!/usr/bin/env python3
"""Generate the FCIDUMP fixtures used by the test suites.

Outputs (relative to tests/data/):
  two_orbital.fcidump                 2 orbitals, 2 electrons, random integrals
  h2o_plus_fixture.fcidump            3 orbitals, 5 electrons, random integrals
  h2o_plus_fixture_expected.json      unique integral table + numpy sector spectrum
  synthetic_5x5/manifest.json         5x5 coarse grid, centre + 8 displaced files
  synthetic_5x5/*.fcidump

The synthetic family encodes a three-state hole model W(r, theta) through
h1 = -W and core = 2 tr(W) + offset, so that the one-hole eigenvalues of the
active-space Hamiltonian are eig(W) + offset (plus a small constant shift
coming from the two-electron part).
"""

import itertools
import json
import math
import pathlib

import numpy as np

DATA = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"

R_MIN, R_MAX = 0.9449, 3.7352
T_MIN, T_MAX = 0.5236, 3.1007
DELTA_R = 0.001
ENERGY_OFFSET = -75.4


# ---------------------------------------------------------------- integrals

def symmetrize_h2(raw):
    n = raw.shape[0]
    h2 = np.zeros_like(raw)
    for i, j, k, l in itertools.product(range(n), repeat=4):
        h2[i, j, k, l] = raw[i, j, k, l]
    out = np.zeros_like(raw)
    for i, j, k, l in itertools.product(range(n), repeat=4):
        perms = [(i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                 (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)]
        out[i, j, k, l] = sum(h2[p] for p in perms) / 8.0
    return out


def write_fcidump(path, h1, h2, core, nelec, ms2, comment=None):
    n = h1.shape[0]
    lines = []
    lines.append(f" &FCI NORB={n},NELEC={nelec},MS2={ms2},")
    lines.append("  ORBSYM=" + ",".join("1" for _ in range(n)) + ",")
    lines.append("  ISYM=1,")
    lines.append(" &END")
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    v = h2[i, j, k, l]
                    if abs(v) > 1e-14:
                        lines.append(f"{v: .16e} {i+1:4d} {j+1:4d} {k+1:4d} {l+1:4d}")
    for i in range(n):
        for j in range(i + 1):
            v = h1[i, j]
            if abs(v) > 1e-14:
                lines.append(f"{v: .16e} {i+1:4d} {j+1:4d}    0    0")
    lines.append(f"{core: .16e}    0    0    0    0")
    path.write_text("\n".join(lines) + "\n")


# ------------------------------------------- dense second-quantized algebra

def apply_ladder(det, idx, create):
    """Apply a^dagger_idx (create) or a_idx to a determinant bitmask."""
    occ = (det >> idx) & 1
    if create == bool(occ):
        return None, 0
    sign = -1 if bin(det & ((1 << idx) - 1)).count("1") % 2 else 1
    return det ^ (1 << idx), sign


def apply_string(det, ops):
    sign = 1
    for idx, create in reversed(ops):
        det, s = apply_ladder(det, idx, create)
        if det is None:
            return None, 0
        sign *= s
    return det, sign


def dense_hamiltonian(h1, h2, core):
    n = h1.shape[0]
    nso = 2 * n
    dim = 1 << nso
    H = np.zeros((dim, dim))
    for det in range(dim):
        H[det, det] += core
        for p, q in itertools.product(range(n), repeat=2):
            if h1[p, q] == 0.0:
                continue
            for s in range(2):
                out, sg = apply_string(det, [(2 * p + s, True), (2 * q + s, False)])
                if out is not None:
                    H[out, det] += h1[p, q] * sg
        for p, q, r, t in itertools.product(range(n), repeat=4):
            v = h2[p, q, r, t]
            if v == 0.0:
                continue
            for s1, s2 in itertools.product(range(2), repeat=2):
                ops = [(2 * p + s1, True), (2 * r + s2, True),
                       (2 * t + s2, False), (2 * q + s1, False)]
                out, sg = apply_string(det, ops)
                if out is not None:
                    H[out, det] += 0.5 * v * sg
    return H


def sector_spectrum(H, nso, nelec, sz2):
    idx = []
    for det in range(1 << nso):
        if bin(det).count("1") != nelec:
            continue
        up = sum((det >> (2 * p)) & 1 for p in range(nso // 2))
        dn = sum((det >> (2 * p + 1)) & 1 for p in range(nso // 2))
        if up - dn == sz2:
            idx.append(det)
    sub = H[np.ix_(idx, idx)]
    return np.linalg.eigvalsh(sub)


# -------------------------------------------------------- synthetic model

def hole_model(r, theta):
    """Hole-state matrix in orbital order (1b2, 3a1, 1b1) -> (B, A, X)."""
    dth = theta - 1.82
    q = 0.5 * 0.207 * (r - 1.81) ** 2 + 0.5 * 0.108 * dth ** 2
    v_x = 0.15 * math.tanh(q / 0.15)
    d_a = 0.25 - 0.03 * dth + 0.5 * 0.10 * (r - 1.81) ** 2
    d_b = 0.30 - 0.10 * dth + 0.5 * 0.20 * (r - 2.00) ** 2
    lam = 0.006 * (r - 1.90)
    return np.array([[d_b, lam, 0.0], [lam, d_a, 0.0], [0.0, 0.0, v_x]])


def internal_from_cartesian(y1, z1, y2, z2):
    r1 = math.hypot(y1, z1)
    r2 = math.hypot(y2, z2)
    a1 = math.atan2(-y1, -z1)
    a2 = math.atan2(y2, -z2)
    return 0.5 * (r1 + r2), a1 + a2


def cartesian_from_internal(r, theta):
    h = 0.5 * theta
    return [-r * math.sin(h), -r * math.cos(h), r * math.sin(h), -r * math.cos(h)]


def synthetic_h2(n):
    rng = np.random.default_rng(20240611)
    raw = rng.uniform(-0.002, 0.002, size=(n, n, n, n))
    return symmetrize_h2(raw)


def synthetic_integrals(cart, h2):
    r, theta = internal_from_cartesian(*cart)
    w = hole_model(r, theta)
    h1 = -w
    core = 2.0 * np.trace(w) + ENERGY_OFFSET
    return h1, core


def gen_synthetic(n_r=5, n_t=5):
    out = DATA / "synthetic_5x5"
    out.mkdir(parents=True, exist_ok=True)
    h2 = synthetic_h2(3)
    r_axis = np.linspace(R_MIN, R_MAX, n_r)
    t_axis = np.linspace(T_MIN, T_MAX, n_t)
    labels = ["Y1", "Z1", "Y2", "Z2"]
    points = []
    for i, r in enumerate(r_axis):
        for j, t in enumerate(t_axis):
            cart = cartesian_from_internal(r, t)
            stem = f"p{i}_{j}"
            h1, core = synthetic_integrals(cart, h2)
            write_fcidump(out / f"{stem}_c.fcidump", h1, h2, core, 5, 1)
            disp = {}
            for c, lab in enumerate(labels):
                for sgn, tag in ((1, "+"), (-1, "-")):
                    moved = list(cart)
                    moved[c] += sgn * DELTA_R
                    h1d, cored = synthetic_integrals(moved, h2)
                    name = f"{stem}_{lab}{'p' if sgn > 0 else 'm'}.fcidump"
                    write_fcidump(out / name, h1d, h2, cored, 5, 1)
                    disp[lab + tag] = name
            points.append({"r": float(r), "theta": float(t),
                           "center": f"{stem}_c.fcidump", "displaced": disp})
    manifest = {"format": "nadvqe-manifest", "version": 1,
                "delta_r": DELTA_R, "points": points}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")

    # Sanity check of the hole-model encoding at the central point.
    h1, core = synthetic_integrals(cartesian_from_internal(1.81, 1.82), h2)
    H = dense_hamiltonian(h1, h2, core)
    print("synthetic centre sector spectrum:", sector_spectrum(H, 6, 5, -1)[:3])
    print("hole model eigenvalues + offset:", np.linalg.eigvalsh(hole_model(1.81, 1.82)) + ENERGY_OFFSET)


def unique_table(h1, h2, core):
    n = h1.shape[0]
    rows = [[float(core), 0, 0, 0, 0]]
    for i in range(n):
        for j in range(i + 1):
            rows.append([float(h1[i, j]), i + 1, j + 1, 0, 0])
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j >= k * (k + 1) // 2 + l:
                        rows.append([float(h2[i, j, k, l]), i + 1, j + 1, k + 1, l + 1])
    return rows


def gen_random_fixture(name, n, nelec, ms2, seed, core):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-0.6, 0.6, size=(n, n))
    h1 = 0.5 * (a + a.T) - np.diag(np.linspace(1.8, 1.0, n))
    raw = rng.uniform(-0.08, 0.08, size=(n, n, n, n))
    for p, q in itertools.product(range(n), repeat=2):
        raw[p, p, q, q] += 0.55 if p == q else 0.40
    h2 = symmetrize_h2(raw)
    write_fcidump(DATA / f"{name}.fcidump", h1, h2, core, nelec, ms2)
    return h1, h2


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    gen_random_fixture("two_orbital", 2, 2, 0, 7, 0.7)
    h1, h2 = gen_random_fixture("h2o_plus_fixture", 3, 5, 1, 11, -70.25)
    H = dense_hamiltonian(h1, h2, -70.25)
    expected = {
        "norb": 3, "nelec": 5, "core_energy": -70.25,
        "integrals": unique_table(h1, h2, -70.25),
        "weight5_spectrum": [float(x) for x in np.linalg.eigvalsh(
            H[np.ix_([d for d in range(64) if bin(d).count("1") == 5],
                     [d for d in range(64) if bin(d).count("1") == 5])])],
        "weight5_sz_minus_half_spectrum": [float(x) for x in sector_spectrum(H, 6, 5, -1)],
        "full_spectrum": [float(x) for x in np.linalg.eigvalsh(H)],
    }
    (DATA / "h2o_plus_fixture_expected.json").write_text(json.dumps(expected, indent=1) + "\n")
    gen_synthetic()


if __name__ == "__main__":
    main()
