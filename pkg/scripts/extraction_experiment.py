#!/usr/bin/env python3
"""Replay seller strategies through the rewinding extraction driver.

An honest seller survives; a trapdoor-equipped seller who ever opens one
commitment both ways, or claims one thing and later reveals another,
hands over the discrete log of h base g.
"""

import random

from zkmech.analysis import (
    EquivocatorStrategy,
    HonestSellerStrategy,
    commitment_attack_driver,
)
from zkmech.group import RefString, params_from_modulus

BOUND = 8


def main():
    params = params_from_modulus(23)
    g = 2
    rho = 7
    planted = RefString(params=params, seed=b"planted", g=g, h=params.pow(g, rho))

    honest = HonestSellerStrategy(price=5, bound=BOUND, rng=random.Random(1))
    print("honest strategy:", commitment_attack_driver(honest, planted, BOUND))

    double_opener = EquivocatorStrategy(
        rho=rho, bound=BOUND, rng=random.Random(2), reveal_plan=lambda v: v
    )
    ell = commitment_attack_driver(double_opener, planted, BOUND)
    print(f"double opener: extracted {ell} (planted trapdoor {rho % params.p})")

    liar = EquivocatorStrategy(
        rho=rho,
        bound=BOUND,
        rng=random.Random(3),
        reveal_plan=lambda v: 0,
        claim_below=4,
    )
    ell = commitment_attack_driver(liar, planted, BOUND)
    print(f"claims-then-reveals: extracted {ell} via transcript rewinding")


if __name__ == "__main__":
    main()
