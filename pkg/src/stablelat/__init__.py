"""Stable lattices, Kubota-Leopoldt L-values and Iwasawa power series.

The p-adic side (``padic``, ``cyclo``, ``characters``, ``lvalues``,
``iwasawa``) computes L-values and the Weierstrass data of the Iwasawa
power series; the lattice side (``tree``, ``eigenform``) counts stable
lattices through fixed points on the Bruhat-Tits tree and through
Eisenstein congruences.  The two meet in ``eigenform.lattice_count_from_Lp``.
"""

__version__ = "0.1.0"
