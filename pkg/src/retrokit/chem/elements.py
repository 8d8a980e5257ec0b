"""Periodic-table data and the valence model used for implicit hydrogens.

Only elements that occur in reaction corpora of the USPTO family are listed;
anything else is rejected by the parser. Element number 0 is the wildcard
atom ``*`` used by template patterns.
"""

from __future__ import annotations

WILDCARD = 0

# symbol -> atomic number
SYMBOL_TO_NUM = {
    "*": WILDCARD,
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8,
    "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13, "Si": 14, "P": 15,
    "S": 16, "Cl": 17, "K": 19, "Ca": 20, "Ti": 22, "Cr": 24, "Mn": 25,
    "Fe": 26, "Co": 27, "Ni": 28, "Cu": 29, "Zn": 30, "Ga": 31, "Ge": 32,
    "As": 33, "Se": 34, "Br": 35, "Zr": 40, "Mo": 42, "Pd": 46, "Ag": 47,
    "Cd": 48, "In": 49, "Sn": 50, "Sb": 51, "Te": 52, "I": 53, "Cs": 55,
    "Ba": 56, "W": 74, "Os": 76, "Ir": 77, "Pt": 78, "Au": 79, "Hg": 80,
    "Tl": 81, "Pb": 82, "Bi": 83,
}
NUM_TO_SYMBOL = {v: k for k, v in SYMBOL_TO_NUM.items()}

# Bare (unbracketed) atom tokens of the SMILES organic subset.
ORGANIC_SUBSET = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}

# Elements that may be written lowercase (aromatic).
AROMATIC_OK = {SYMBOL_TO_NUM[s] for s in ("B", "C", "N", "O", "P", "S", "Se", "As", "Te")}

# Allowed valences, lowest (default) first. Elements absent from this table
# get no implicit hydrogens and are exempt from valence checks.
VALENCES = {
    SYMBOL_TO_NUM["H"]: (1,),
    SYMBOL_TO_NUM["B"]: (3,),
    SYMBOL_TO_NUM["C"]: (4,),
    SYMBOL_TO_NUM["N"]: (3, 5),
    SYMBOL_TO_NUM["O"]: (2,),
    SYMBOL_TO_NUM["F"]: (1,),
    SYMBOL_TO_NUM["Si"]: (4,),
    SYMBOL_TO_NUM["P"]: (3, 5),
    SYMBOL_TO_NUM["S"]: (2, 4, 6),
    SYMBOL_TO_NUM["Cl"]: (1,),
    SYMBOL_TO_NUM["As"]: (3, 5),
    SYMBOL_TO_NUM["Se"]: (2, 4, 6),
    SYMBOL_TO_NUM["Br"]: (1,),
    SYMBOL_TO_NUM["Te"]: (2, 4, 6),
    SYMBOL_TO_NUM["I"]: (1,),
}


# aromatic elements whose bare form reserves one in-ring double bond
# (pyridine-type); O/S/Se/Te donate a lone pair instead and reserve nothing
PI_RESERVE = frozenset({SYMBOL_TO_NUM["C"], SYMBOL_TO_NUM["N"], SYMBOL_TO_NUM["P"]})


def implicit_hydrogens(element: int, aromatic: bool, occupied: int) -> int:
    """Implicit H count for a bare atom carrying ``occupied`` bond order.

    ``occupied`` counts aromatic bonds as one each. Bare aromatic C/N/P hold
    one slot for the in-ring double bond and fill to the default valence, so
    a bare aromatic nitrogen is pyridine-like (pyrrole needs [nH]).
    Non-aromatic atoms fill to the smallest allowed valence.
    """
    valences = VALENCES.get(element)
    if not valences:
        return 0
    if aromatic:
        reserve = 1 if element in PI_RESERVE else 0
        return max(0, valences[0] - occupied - reserve)
    for v in valences:
        if v >= occupied:
            return v - occupied
    return 0


def max_valence(element: int, charge: int) -> int | None:
    """Upper valence bound for legality checks, or None when unconstrained.

    Charged atoms get one extra slot per unit of charge, which covers the
    common organic ions (N+, O-, B-, S+, ...) without a per-ion table.
    """
    valences = VALENCES.get(element)
    if not valences:
        return None
    return valences[-1] + abs(charge)
