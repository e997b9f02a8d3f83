#!/usr/bin/env python3
"""Straight-from-pseudocode XTEA reference used to freeze the C++ test vectors.

Key: four 32-bit big-endian words. Block: two 32-bit big-endian words.
Usage: xtea_oracle.py <key-hex> <block-hex> [rounds]
"""
import sys

MASK = 0xFFFFFFFF
DELTA = 0x9E3779B9


def encipher(rounds, v, key):
    v0, v1 = v
    s = 0
    for _ in range(rounds):
        v0 = (v0 + ((((v1 << 4) ^ (v1 >> 5)) + v1) ^ (s + key[s & 3]))) & MASK
        s = (s + DELTA) & MASK
        v1 = (v1 + ((((v0 << 4) ^ (v0 >> 5)) + v0) ^ (s + key[(s >> 11) & 3]))) & MASK
    return v0, v1


def words(b, n):
    return [int.from_bytes(b[4 * i:4 * i + 4], "big") for i in range(n)]


def main():
    key = bytes.fromhex(sys.argv[1])
    block = bytes.fromhex(sys.argv[2])
    rounds = int(sys.argv[3]) if len(sys.argv) > 3 else 32
    assert len(key) == 16 and len(block) == 8
    v0, v1 = encipher(rounds, words(block, 2), words(key, 4))
    print((v0.to_bytes(4, "big") + v1.to_bytes(4, "big")).hex())


if __name__ == "__main__":
    main()
