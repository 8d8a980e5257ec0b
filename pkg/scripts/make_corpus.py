"""Generate the bundled reaction mini-corpus deterministically.

Ten reaction archetypes over curated fragment pools, assembled as graphs so
atom-map correspondence between product and reactants is exact by
construction. Weighted pools skew leaving-group and residual frequencies,
which gives the template-frequency distribution a realistic long tail. A
small slice of aromatization reactions is included on purpose: their centers
shatter the ring and extraction refuses them, exercising the failure log.

Usage: python3 scripts/make_corpus.py [out.csv]
"""

from __future__ import annotations

import random
import sys
from dataclasses import replace

from retrokit.chem.molgraph import DOUBLE, SINGLE, GraphBuilder, MolGraph
from retrokit.chem.smiles import parse_smiles, write_smiles


class Assembly:
    """Splice parsed fragments into one molecule, tracking every index."""

    def __init__(self):
        self.builder = GraphBuilder()

    def frag(self, smiles: str) -> list[int]:
        g = parse_smiles(smiles)
        off = len(self.builder.atoms)
        for i in range(len(g)):
            self.builder.add_atom(g._resolved_atom(i))
        for b in g.bonds:
            self.builder.bonds.append(replace(b, a=b.a + off, b=b.b + off))
        return list(range(off, off + len(g)))

    def bond(self, i: int, j: int, order: str = SINGLE) -> None:
        take = 2 if order == DOUBLE else 1
        self.builder.shift_h(i, -take)
        self.builder.shift_h(j, -take)
        self.builder.add_bond(i, j, order)

    def to_double(self, i: int, j: int) -> None:
        self.builder.remove_bond(i, j)
        self.builder.shift_h(i, -1)
        self.builder.shift_h(j, -1)
        self.builder.add_bond(i, j, DOUBLE)

    def build(self, maps: dict[int, int]) -> MolGraph:
        for idx, m in maps.items():
            self.builder.update_atom(idx, atom_map=m)
        return self.builder.build()


# fragment pools; the first atom of each string is the attachment atom.
# aryl/alkyl pools are expanded with systematic decorations so products stay
# diverse across thousands of reactions
_SUBS = ["F", "Cl", "C", "OC", "C#N", "C(F)(F)F", "CC", "OCC"]
ARYL = (
    ["c1ccccc1", "c1ccc2ccccc2c1", "c1cccs1", "c1ccnc(C)c1", "c1cc2ccccc2s1"]
    + [f"c1ccc({s})cc1" for s in _SUBS]
    + [f"c1cccc({s})c1" for s in _SUBS]
    + [f"c1cc({a})ccc1{b}" for a in ("F", "C", "OC") for b in ("C", "F", "Cl")]
)
ALKYL = (
    ["C", "CC", "CCC", "C(C)C", "CCCC", "C(C)(C)C", "C1CCCCC1", "CC(C)C",
     "CCOC", "CCc1ccccc1", "Cc1ccccc1", "C1CCCC1", "CCCCC", "CCN(C)C",
     "CCCCCC", "CC(C)CC", "C1CCOC1", "CCOCC", "CC1CCCCC1", "CCCOC"]
    + [f"Cc1ccc({s})cc1" for s in ("F", "Cl", "C", "OC")]
    + [f"CCc1ccc({s})cc1" for s in ("F", "C")]
)
AMINE = (
    ["N", "NC", "NCC", "N(C)C", "NC(C)C", "NCCC", "N1CCCC1", "N1CCOCC1",
     "N1CCCCC1", "NCc1ccccc1", "Nc1ccccc1", "NCCO", "N(C)CC", "NC1CCCCC1",
     "N(CC)CC", "NCCCC", "N1CCC(C)CC1", "NCC(C)C"]
    + [f"Nc1ccc({s})cc1" for s in ("F", "Cl", "C", "OC")]
    + [f"NCc1ccc({s})cc1" for s in ("F", "C")]
)
ALCOHOL = (
    ["OC", "OCC", "OC(C)C", "OCCC", "OCCCC", "OC(C)(C)C", "OCc1ccccc1",
     "OCCOC", "OC1CCCCC1", "OCCN(C)C", "OCCCCC", "OCC(C)C"]
    + [f"OCc1ccc({s})cc1" for s in ("F", "Cl", "C")]
)
PHENOL = (
    ["Oc1ccccc1", "Oc1cccc(C)c1"]
    + [f"Oc1ccc({s})cc1" for s in ("C", "F", "OC", "Cl", "C#N")]
)
ACYL_R = ALKYL + ARYL[:16]
# leaving groups and activations, weighted toward the common ones so the
# mined template frequencies get a realistic long tail
LEAVING = ["Br", "Cl", "I", "OS(=O)(=O)c1ccc(C)cc1", "OS(C)(=O)=O"]
LEAVING_W = [0.42, 0.2, 0.08, 0.18, 0.12]
ACTIVATION = ["O", "Cl", "OC", "OCC", "ON1C(=O)CCC1=O"]
ACTIVATION_W = [0.62, 0.16, 0.1, 0.07, 0.05]
BORON = ["B(O)O", "B1OC(C)(C)C(C)(C)O1"]
BORON_W = [0.7, 0.3]
N_PROT = ["C(=O)OC(C)(C)C", "C(=O)OCc1ccccc1", "C(C)=O",
          "S(=O)(=O)c1ccc(C)cc1"]
N_PROT_W = [0.5, 0.25, 0.15, 0.1]
O_PROT = ["[Si](C)(C)C(C)(C)C", "[Si](C)(C)C", "Cc1ccccc1"]
O_PROT_W = [0.45, 0.25, 0.3]
HALIDES = ["Br", "Cl", "I"]
HALIDE_W = [0.6, 0.3, 0.1]


def _maps(product_atoms: int) -> dict[int, int]:
    return {i: i + 1 for i in range(product_atoms)}


def _leaving_maps(start: int, indices: list[int]) -> dict[int, int]:
    return {idx: start + k for k, idx in enumerate(indices)}


def _acid(r: Assembly, r1: str, act: str):
    """Acyl donor R1-C(=O)-LG; returns (r1 block, [C, O] core, LG block)."""
    ar1 = r.frag(r1)
    acore = r.frag("C=O")
    r.bond(ar1[0], acore[0])
    lg = r.frag(act)
    r.bond(acore[0], lg[0])
    return ar1, acore, lg


def ester(rng: random.Random):
    r1 = rng.choice(ACYL_R)
    r2 = rng.choice(ALKYL)
    act = rng.choices(ACTIVATION, weights=ACTIVATION_W)[0]
    p = Assembly()
    pr1 = p.frag(r1)
    core = p.frag("C(=O)O")
    pr2 = p.frag(r2)
    p.bond(pr1[0], core[0])
    p.bond(core[2], pr2[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    ar1, acore, lg = _acid(r, r1, act)
    ol = r.frag("O")
    ar2 = r.frag(r2)
    r.bond(ol[0], ar2[0])
    # product index -> reactant index: r1 block, acyl C, carbonyl O from the
    # acyl donor; ester O and r2 block from the alcohol
    corr = {}
    for k, idx in enumerate(pr1):
        corr[idx] = ar1[k]
    corr[core[0]] = acore[0]
    corr[core[1]] = acore[1]
    corr[core[2]] = ol[0]
    for k, idx in enumerate(pr2):
        corr[idx] = ar2[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, lg))
    reactants = r.build(maps)
    return reactants, product


def amide(rng: random.Random):
    r1 = rng.choice(ACYL_R)
    am = rng.choice(AMINE)
    act = rng.choices(ACTIVATION, weights=ACTIVATION_W)[0]
    p = Assembly()
    pr1 = p.frag(r1)
    core = p.frag("C=O")
    pam = p.frag(am)
    p.bond(pr1[0], core[0])
    p.bond(core[0], pam[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    ar1, acore, lg = _acid(r, r1, act)
    aam = r.frag(am)
    corr = {idx: ar1[k] for k, idx in enumerate(pr1)}
    corr[core[0]] = acore[0]
    corr[core[1]] = acore[1]
    for k, idx in enumerate(pam):
        corr[idx] = aam[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, lg))
    reactants = r.build(maps)
    return reactants, product


def n_alkylation(rng: random.Random):
    am = rng.choice(AMINE)
    r3 = rng.choice(ALKYL)
    hal = rng.choices(LEAVING, weights=LEAVING_W)[0]
    p = Assembly()
    pam = p.frag(am)
    link = p.frag("C")
    pr3 = p.frag(r3)
    p.bond(pam[0], link[0])
    p.bond(link[0], pr3[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    aam = r.frag(am)
    alink = r.frag("C")
    ar3 = r.frag(r3)
    r.bond(alink[0], ar3[0])
    ax = r.frag(hal)
    r.bond(alink[0], ax[0])
    corr = {idx: aam[k] for k, idx in enumerate(pam)}
    corr[link[0]] = alink[0]
    for k, idx in enumerate(pr3):
        corr[idx] = ar3[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, ax))
    reactants = r.build(maps)
    return reactants, product


def reductive_amination(rng: random.Random):
    am = rng.choice(AMINE)
    r3 = rng.choice(ALKYL)
    p = Assembly()
    pam = p.frag(am)
    link = p.frag("C")
    pr3 = p.frag(r3)
    p.bond(pam[0], link[0])
    p.bond(link[0], pr3[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    aam = r.frag(am)
    alink = r.frag("C")
    ar3 = r.frag(r3)
    r.bond(alink[0], ar3[0])
    ox = r.frag("O")
    r.bond(alink[0], ox[0], DOUBLE)
    corr = {idx: aam[k] for k, idx in enumerate(pam)}
    corr[link[0]] = alink[0]
    for k, idx in enumerate(pr3):
        corr[idx] = ar3[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, ox))
    reactants = r.build(maps)
    return reactants, product


def ether(rng: random.Random):
    al = rng.choice(ALCOHOL)
    r2 = rng.choice(ALKYL)
    hal = rng.choices(LEAVING, weights=LEAVING_W)[0]
    p = Assembly()
    pal = p.frag(al)
    link = p.frag("C")
    pr2 = p.frag(r2)
    p.bond(pal[0], link[0])
    p.bond(link[0], pr2[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    aal = r.frag(al)
    alink = r.frag("C")
    ar2 = r.frag(r2)
    r.bond(alink[0], ar2[0])
    ax = r.frag(hal)
    r.bond(alink[0], ax[0])
    corr = {idx: aal[k] for k, idx in enumerate(pal)}
    corr[link[0]] = alink[0]
    for k, idx in enumerate(pr2):
        corr[idx] = ar2[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, ax))
    reactants = r.build(maps)
    return reactants, product


def suzuki(rng: random.Random):
    ar1 = rng.choice(ARYL)
    ar2 = rng.choice(ARYL)
    hal = rng.choices(HALIDES[:2], weights=[0.7, 0.3])[0]
    bor = rng.choices(BORON, weights=BORON_W)[0]
    p = Assembly()
    pa = p.frag(ar1)
    pb = p.frag(ar2)
    p.bond(pa[0], pb[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    ra = r.frag(ar1)
    rx = r.frag(hal)
    r.bond(ra[0], rx[0])
    rb = r.frag(ar2)
    rbor = r.frag(bor)
    r.bond(rb[0], rbor[0])
    corr = {idx: ra[k] for k, idx in enumerate(pa)}
    for k, idx in enumerate(pb):
        corr[idx] = rb[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, [rx[0]] + rbor))
    reactants = r.build(maps)
    return reactants, product


def o_acylation(rng: random.Random):
    r1 = rng.choice(ACYL_R)
    ph = rng.choice(PHENOL)
    act = rng.choices(["Cl", "O"], weights=[0.7, 0.3])[0]
    p = Assembly()
    pr1 = p.frag(r1)
    core = p.frag("C=O")
    pph = p.frag(ph)
    p.bond(pr1[0], core[0])
    p.bond(core[0], pph[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    ar1, acore, lg = _acid(r, r1, act)
    aph = r.frag(ph)
    corr = {idx: ar1[k] for k, idx in enumerate(pr1)}
    corr[core[0]] = acore[0]
    corr[core[1]] = acore[1]
    for k, idx in enumerate(pph):
        corr[idx] = aph[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, lg))
    reactants = r.build(maps)
    return reactants, product


def n_deprotection(rng: random.Random):
    am = rng.choice([a for a in AMINE if a not in ("N(C)C",)])
    prot = rng.choices(N_PROT, weights=N_PROT_W)[0]
    p = Assembly()
    pam = p.frag(am)
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    aam = r.frag(am)
    pg = r.frag(prot)
    r.bond(aam[0], pg[0])
    corr = {idx: aam[k] for k, idx in enumerate(pam)}
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, pg))
    reactants = r.build(maps)
    return reactants, product


def o_deprotection(rng: random.Random):
    al = rng.choice(ALCOHOL + PHENOL)
    prot = rng.choices(O_PROT, weights=O_PROT_W)[0]
    p = Assembly()
    pal = p.frag(al)
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    aal = r.frag(al)
    pg = r.frag(prot)
    r.bond(aal[0], pg[0])
    corr = {idx: aal[k] for k, idx in enumerate(pal)}
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, pg))
    reactants = r.build(maps)
    return reactants, product


def ring_reduction(rng: random.Random):
    r1 = rng.choice(ARYL + ALKYL[:6])
    p = Assembly()
    ring = p.frag("C1CCCCC1")
    pr1 = p.frag(r1)
    p.bond(ring[0], pr1[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    aring = r.frag("C1CCCCC1")
    ar1 = r.frag(r1)
    r.bond(aring[0], ar1[0])
    r.to_double(aring[2], aring[3])
    corr = {idx: aring[k] for k, idx in enumerate(ring)}
    for k, idx in enumerate(pr1):
        corr[idx] = ar1[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    reactants = r.build(maps)
    return reactants, product


def aromatization(rng: random.Random):
    """Benzene ring from cyclohexadiene; extraction refuses these."""
    r1 = rng.choice(ALKYL)
    p = Assembly()
    ring = p.frag("c1ccccc1")
    pr1 = p.frag(r1)
    p.bond(ring[0], pr1[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    aring = r.frag("C1C=CC=CC1")
    ar1 = r.frag(r1)
    r.bond(aring[0], ar1[0])
    corr = {idx: aring[k] for k, idx in enumerate(ring)}
    for k, idx in enumerate(pr1):
        corr[idx] = ar1[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    reactants = r.build(maps)
    return reactants, product


def snar(rng: random.Random):
    am = rng.choice(AMINE)
    tail = rng.choice(["C#N", "C(F)(F)F", "C"])
    hal = rng.choices(["F", "Cl"], weights=[0.75, 0.25])[0]
    p = Assembly()
    ring = p.frag("c1ccc(cc1)")
    if len(ring) != 6:
        raise AssertionError
    ptail = p.frag(tail)
    p.bond(ring[3], ptail[0])
    pam = p.frag(am)
    p.bond(ring[0], pam[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    aring = r.frag("c1ccc(cc1)")
    atail = r.frag(tail)
    r.bond(aring[3], atail[0])
    af = r.frag(hal)
    r.bond(aring[0], af[0])
    aam = r.frag(am)
    corr = {idx: aring[k] for k, idx in enumerate(ring)}
    for k, idx in enumerate(ptail):
        corr[idx] = atail[k]
    for k, idx in enumerate(pam):
        corr[idx] = aam[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, [af[0]]))
    reactants = r.build(maps)
    return reactants, product


def sulfonamide(rng: random.Random):
    ar1 = rng.choice(ARYL)
    am = rng.choice(AMINE)
    p = Assembly()
    pa = p.frag(ar1)
    core = p.frag("S(=O)=O")
    pam = p.frag(am)
    p.bond(pa[0], core[0])
    p.bond(core[0], pam[0])
    n = len(p.builder.atoms)
    product = p.build(_maps(n))

    r = Assembly()
    ra = r.frag(ar1)
    rcore = r.frag("S(=O)=O")
    r.bond(ra[0], rcore[0])
    rcl = r.frag("Cl")
    r.bond(rcore[0], rcl[0])
    ram = r.frag(am)
    corr = {idx: ra[k] for k, idx in enumerate(pa)}
    corr[core[0]] = rcore[0]
    corr[core[1]] = rcore[1]
    corr[core[2]] = rcore[2]
    for k, idx in enumerate(pam):
        corr[idx] = ram[k]
    maps = {corr[pi]: pi + 1 for pi in range(n)}
    maps.update(_leaving_maps(n + 1, [rcl[0]]))
    reactants = r.build(maps)
    return reactants, product


ARCHETYPES = [
    (1, ester, 0.14),
    (2, amide, 0.19),
    (3, n_alkylation, 0.10),
    (3, reductive_amination, 0.05),
    (4, ether, 0.09),
    (5, suzuki, 0.10),
    (6, o_acylation, 0.07),
    (7, n_deprotection, 0.08),
    (7, o_deprotection, 0.04),
    (8, ring_reduction, 0.05),
    (8, aromatization, 0.025),
    (9, snar, 0.06),
    (10, sulfonamide, 0.055),
]


def main(out_path: str = "data/mini_uspto.csv", n_target: int = 2000,
         seed: int = 20240817) -> None:
    rng = random.Random(seed)
    classes = [a[0] for a in ARCHETYPES]
    makers = [a[1] for a in ARCHETYPES]
    weights = [a[2] for a in ARCHETYPES]

    rows = []
    seen = set()
    attempts = 0
    while len(rows) < n_target and attempts < n_target * 30:
        attempts += 1
        k = rng.choices(range(len(makers)), weights=weights)[0]
        try:
            reactants, product = makers[k](rng)
        except Exception:
            continue
        rxn = f"{write_smiles(reactants)}>>{write_smiles(product)}"
        if rxn in seen:
            continue
        seen.add(rxn)
        rows.append((classes[k], rxn))

    with open(out_path, "w") as fh:
        fh.write("id,class,rxn\n")
        for i, (cls, rxn) in enumerate(rows, start=1):
            fh.write(f"mini-{i:05d},{cls},{rxn}\n")
    print(f"wrote {len(rows)} reactions to {out_path}")

    mols = set()
    for _, rxn in rows:
        left, right = rxn.split(">>")
        g = parse_smiles(left)
        for comp in g.component_indices():
            sub, _ = g.subgraph(comp)
            mols.add(write_smiles(sub.without_maps()))
        mols.add(write_smiles(parse_smiles(right).without_maps()))
    print(f"distinct molecules: {len(mols)}")


if __name__ == "__main__":
    main(*sys.argv[1:2])
