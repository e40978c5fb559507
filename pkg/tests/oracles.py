"""Independent checks used by several test modules."""

import itertools
from fractions import Fraction

from sagbihc.intlin import rank


def multidegrees(m, top):
    for d in itertools.product(range(top + 1), repeat=m):
        if 0 < sum(d) <= top:
            yield d


def graded_products(family, degrees):
    """All products with ``degrees[r]`` factors from block ``r``."""
    choices = [itertools.combinations_with_replacement(range(len(b)), k) for b, k in zip(family.blocks, degrees)]
    for pick in itertools.product(*choices):
        p = family.ring.const(1)
        for r, idx in enumerate(pick):
            for j in idx:
                p = p * family.blocks[r][j]
        yield pick, p


def sagbi_by_dimension(family, w, top=3):
    """Compare dimensions of graded pieces with their leading-monomial counts.

    The initial forms of a graded piece span a space of the same dimension,
    and that space contains every product of leading monomials; the two
    agree in each degree exactly when the leaders generate the initial
    algebra there.
    """
    from sagbihc.sagbi import initial_term

    leads = [[initial_term(b, w)[1] for b in block] for block in family.blocks]
    for d in multidegrees(family.m, top):
        polys, monos = [], set()
        for pick, p in graded_products(family, d):
            polys.append(p)
            e = [0] * family.n
            for r, idx in enumerate(pick):
                for j in idx:
                    e = [a + b for a, b in zip(e, leads[r][j])]
            monos.add(tuple(e))
        support = sorted({e for p in polys for e in p.exponents()})
        M = [[Fraction(p.coeff(e)) for e in support] for p in polys]
        if rank(M) != len(monos):
            return False
    return True
