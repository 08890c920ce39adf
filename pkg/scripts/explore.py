"""Scratch exploration of natural truncations {1..N}: traces next to the Folner-family limit."""
from fractions import Fraction

import pandas as pd

from multoeplitz.index_sets import exponent_box, folner_ratio, natural_segment
from multoeplitz.operators import truncate
from multoeplitz.reference import torus_integral
from multoeplitz.spectral import power_function, trace_of_f
from multoeplitz.symbol import MULTIPLICATIVE, Symbol


def trace_table(symbol, sets, power):
    """(1/#sigma) Tr T^power for every set, one row per set."""
    rows = []
    for sigma in sets:
        T = truncate(symbol, sigma)
        rows.append({"set": sigma.name, "size": len(sigma), "trace": trace_of_f(T, power_function(power)),
                     "ratio[2]": folner_ratio(sigma, 2)})
    return pd.DataFrame(rows)


phi = Symbol(MULTIPLICATIVE, {2: 1, Fraction(1, 2): 1, 3: 0.5, Fraction(1, 3): 0.5})
limit = torus_integral(phi, power_function(2)).real

naturals = trace_table(phi, [natural_segment(n) for n in (16, 64, 256, 1024)], 2)
boxes = trace_table(phi, [exponent_box(k, k) for k in (3, 7, 15, 31)], 2)

print(f"Folner-family limit: {limit}")
print(naturals)
print(boxes)

# natural segments keep 1/2 of the set under the shift by 2, so the x^2 trace sits near
# 2 * (1/2) + 2 * 0.25 * (1/3) instead of the box limit
print(naturals["trace"] - limit)
