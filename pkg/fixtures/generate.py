"""Regenerate the FCIDUMP fixtures (requires PySCF; not a package dependency).

RHF/STO-3G, then CASCI over the pi orbitals picked by out-of-plane 2p weight.
Ring molecules use exactly symmetric coordinates with the tabulated C and H
ring radii so that degenerate pi pairs do not mix through round-off.

    python fixtures/generate.py
"""
import json
from pathlib import Path

import numpy as np
from pyscf import ao2mo, fci, gto, mcscf, scf
from pyscf.tools import fcidump

HERE = Path(__file__).resolve().parent

ETHYLENE = """C 0.000000000 0.000000000 0.652999000
C 0.000000000 0.000000000 -0.652999000
H 0.000000000 0.915997000 1.229260000
H 0.000000000 -0.915997000 1.229260000
H 0.000000000 0.915997000 -1.229260000
H 0.000000000 -0.915997000 -1.229260000"""


def ring(elem, radius, n, phase_deg=90.0):
    out = []
    for k in range(n):
        t = np.deg2rad(phase_deg + 360.0 * k / n)
        out.append(f"{elem} {radius * np.cos(t):.15f} {radius * np.sin(t):.15f} 0.0")
    return out


MOLECULES = {
    "c2h4": dict(atom=ETHYLENE, charge=0, axis="x", norb=2, nelec=2,
                 geometry="tabulated Cartesian coordinates, used verbatim",
                 excited={"singlet_like": "1001", "triplet_sz1": "0101"}),
    "c3h3p": dict(atom="\n".join(ring("C", 0.794870, 3) + ring("H", 1.889910, 3)),
                  charge=1, axis="z", norb=3, nelec=2,
                  geometry="D3h ring rebuilt from tabulated radii C 0.794870, H 1.889910 Angstrom",
                  excited={"singlet_like": "001001", "triplet_sz1": "000101"}),
    "c6h6": dict(atom="\n".join(ring("C", 1.386832, 6) + ring("H", 2.469288, 6)),
                 charge=0, axis="z", norb=6, nelec=6,
                 geometry="D6h ring rebuilt from tabulated radii C 1.386832, H 2.469288 Angstrom",
                 excited={"single_a": "000010011111", "single_b": "000001011111"}),
}


def main():
    for name, spec in MOLECULES.items():
        mol = gto.M(atom=spec["atom"], basis="sto-3g", charge=spec["charge"], unit="Angstrom",
                    symmetry=True, verbose=0)
        mf = scf.RHF(mol).run(conv_tol=1e-14, conv_tol_grad=1e-11)
        labels = mol.ao_labels()
        rows = [i for i, label in enumerate(labels) if label.strip().endswith("2p" + spec["axis"])]
        weight = (mf.mo_coeff[rows] ** 2).sum(0)
        pi = [i for i in range(mol.nao) if weight[i] > 0.5]
        norb, nelec = spec["norb"], spec["nelec"]
        mc = mcscf.CASCI(mf, norb, nelec)
        mo = mc.sort_mo([i + 1 for i in pi])
        mc.fcisolver = fci.direct_spin1.FCI(mol)
        mc.fcisolver.nroots = 10
        roots = mc.kernel(mo)[0]
        h1, ecore = mc.get_h1eff(mo)
        h2 = ao2mo.restore(1, mc.get_h2eff(mo), norb)
        fcidump.from_integrals(str(HERE / f"{name}.fcidump"), h1, h2, norb, nelec,
                               nuc=ecore, ms=0, tol=1e-14)
        n_so = 2 * norb
        hf_bits = "0" * (n_so - nelec) + "1" * nelec
        meta = {
            "method": "RHF then CASCI integrals (PySCF get_h1eff/get_h2eff)",
            "basis": "STO-3G",
            "charge": spec["charge"],
            "active_space": {"n_electrons": nelec, "n_orbitals": norb,
                             "selection": f"pi orbitals, 2p{spec['axis']} weight > 0.5"},
            "geometry": spec["geometry"],
            "hf_energy": float(mf.e_tot),
            "casci_roots_ms0": [float(e) for e in roots],
            "spin_orbital_order": "interleaved alpha0, beta0, alpha1, beta1, ...; qubit p = spin orbital p",
            "hf_bitstring": hf_bits,
            "other_bitstrings": spec["excited"],
        }
        (HERE / f"{name}.json").write_text(json.dumps(meta, indent=2) + "\n")
        print(name, mf.e_tot, np.round(roots[:4], 5))


if __name__ == "__main__":
    main()
