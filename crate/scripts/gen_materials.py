#!/usr/bin/env python3
"""Regenerate the dispersion tables in data/materials/.

Tables are sampled from published closed-form dispersion models on a 5 nm
grid spanning 250-2600 nm. Wavelengths in the formulas are in micrometres.

  SiO2   Malitson (1965), fused silica, three-term Sellmeier.
  Si3N4  Luke et al. (2015), two-term Sellmeier.
  Al2O3  Malitson & Dodge (1972), ordinary ray, three-term Sellmeier.
  TiO2   DeVore (1951), rutile ordinary ray, for lambda >= 430 nm; held at
         a linear continuation below that, plus an Urbach absorption tail
         (edge 3.2 eV, width 0.15 eV, capped at k = 1.5).

SiO2, Si3N4 and Al2O3 are treated as lossless (k = 0) over the band.
"""
import math
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "data", "materials")


def sellmeier(terms):
    def n(lam):
        l2 = lam * lam
        return math.sqrt(1.0 + sum(b * l2 / (l2 - c * c) for b, c in terms))
    return n


sio2 = sellmeier([(0.6961663, 0.0684043), (0.4079426, 0.1162414), (0.8974794, 9.896161)])
si3n4 = sellmeier([(3.0249, 0.1353406), (40314.0, 1239.842)])
al2o3 = sellmeier([(1.4313493, 0.0726631), (0.65054713, 0.1193242), (5.3414021, 18.028251)])


def tio2_n(lam):
    def devore(l):
        return math.sqrt(5.913 + 0.2441 / (l * l - 0.0803))
    if lam >= 0.43:
        return devore(lam)
    slope = (devore(0.44) - devore(0.43)) / 0.01
    return devore(0.43) + slope * (lam - 0.43)


def tio2_k(lam):
    energy_ev = 1.23984 / lam
    return min(1.5, 0.05 * math.exp((energy_ev - 3.2) / 0.15))


def write(name, nfun, kfun=lambda lam: 0.0):
    path = os.path.join(OUT, f"{name}.csv")
    with open(path, "w") as f:
        f.write("wavelength_nm,n,k\n")
        for wl in range(250, 2605, 5):
            lam = wl / 1000.0
            f.write(f"{wl},{nfun(lam):.6f},{kfun(lam):.6e}\n")


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    write("SiO2", sio2)
    write("Si3N4", si3n4)
    write("Al2O3", al2o3)
    write("TiO2", tio2_n, tio2_k)
