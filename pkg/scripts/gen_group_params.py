"""Regenerate the production group constants from their seed strings.

The library hard-codes p and q; this script re-derives them from
nothing-up-my-sleeve SHA-256 seeds and checks they match, so anyone
can audit that the parameters hide no trapdoor structure beyond the
published derivation.

  q: next prime at or above SHA-256(q seed) with the top bit forced
  r: SHA-256(r seed) with the top bit forced, rounded up to even,
     then stepped by 2 until p = q*r + 1 is prime
  g = 2^r mod p
  h: hash-to-group of the generator label (see derive_second_generator)
"""

import hashlib
import sys

import gmpy2

sys.path.insert(0, "src")

from pscsim.group import SECOND_GENERATOR_LABEL, derive_second_generator, production_group

Q_SEED = b"psc-sim group v1: subgroup order seed"
R_SEED = b"psc-sim group v1: cofactor seed"


def derive():
    q_base = int.from_bytes(hashlib.sha256(Q_SEED).digest(), "big") | (1 << 255)
    q = int(gmpy2.next_prime(q_base))

    r = int.from_bytes(hashlib.sha256(R_SEED).digest(), "big") | (1 << 255)
    if r % 2:
        r += 1
    steps = 0
    while not gmpy2.is_prime(q * r + 1):
        r += 2
        steps += 1
    p = q * r + 1
    return p, q, r, steps


def main():
    p, q, r, steps = derive()
    g = int(gmpy2.powmod(2, r, p))
    h = derive_second_generator(p, q, SECOND_GENERATOR_LABEL)

    print(f"q ({q.bit_length()} bits) = {q:#x}")
    print(f"p ({p.bit_length()} bits) = {p:#x}")
    print(f"cofactor steps: {steps}")
    print(f"g = {g:#x}")
    print(f"h = {h:#x}")

    lib = production_group()
    same = (p, q, g, h) == (lib.p, lib.q, lib.g, lib.h)
    print(f"matches library constants: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
