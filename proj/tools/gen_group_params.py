#!/usr/bin/env python3
# Copyright 2026 The rofl-lab Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the constants of the "standard" group profile.

q is the first prime >= the 256-bit integer SHA-256("rofl-lab-group-q"),
p is the first 2048-bit prime of the form k*q + 1 with even k starting at
ceil(2^2047 / q) plus a SHAKE-256 expansion of "rofl-lab-group-p", and g
is the first x^((p-1)/q) != 1 for x = 2, 3, ...  Anyone can rerun this
and compare against src/group.cc.
"""
import hashlib

import gmpy2

PBITS = 2048


def main():
    q = gmpy2.next_prime(int.from_bytes(hashlib.sha256(b"rofl-lab-group-q").digest(), "big") | (1 << 255))
    offset = int.from_bytes(hashlib.shake_256(b"rofl-lab-group-p").digest(PBITS // 8 - 64), "big")
    k = (1 << (PBITS - 1)) // q + 1 + offset
    k += k & 1
    while True:
        p = k * q + 1
        if p.bit_length() == PBITS and gmpy2.is_prime(p, 64):
            break
        k += 2
    x = 2
    while True:
        g = pow(x, (p - 1) // q, p)
        if g != 1:
            break
        x += 1
    assert gmpy2.is_prime(q, 64) and (p - 1) % q == 0 and pow(g, q, p) == 1
    print("p =", format(p, "x"))
    print("q =", format(q, "x"))
    print("g =", format(g, "x"))


if __name__ == "__main__":
    main()
