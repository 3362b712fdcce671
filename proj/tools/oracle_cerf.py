#!/usr/bin/env python3
"""Generate frozen reference values for the complex error function tests.

Run offline; paste the emitted table into tests/test_numerics.cpp.
"""
import mpmath as mp

mp.mp.dps = 40

POINTS = [
    1.0, 1j, 2 + 3j, 0.5 + 9j, 5 + 5j, 9.9 + 0.1j, 0.1 + 9.9j,
    2.9 + 0.1j, 3.1 + 0j, 3.1j, 7 + 7.2j, 1e-8 + 5j, 4.0, 6j,
    -2 + 3j, 2 - 3j, -2 - 3j, -1.0, -4j, 0.25 + 0.75j, 30 + 31j,
]

for z in POINTS:
    z = complex(z)
    w = complex(mp.erf(mp.mpc(z)))
    print(f"    {{{{{z.real!r}, {z.imag!r}}}, {{{w.real!r}, {w.imag!r}}}}},")
