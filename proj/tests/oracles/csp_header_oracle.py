#!/usr/bin/env python3
"""Bit-shift oracle for the 32-bit CSP header word.

Layout, MSB first: priority:2 source:5 destination:5 dport:6 sport:6 reserved:4 flags:4
Flags: HMAC=0x8 XTEA=0x4 RDP=0x2 CRC=0x1
"""

def pack(prio, src, dst, dport, sport, flags):
    word = 0
    word = (word << 2) | prio
    word = (word << 5) | src
    word = (word << 5) | dst
    word = (word << 6) | dport
    word = (word << 6) | sport
    word = (word << 4) | 0
    word = (word << 4) | flags
    return word


if __name__ == "__main__":
    HMAC, CRC = 0x8, 0x1
    w = pack(2, 1, 10, 18, 32, CRC | HMAC)
    print(f"0x{w:08X}", w.to_bytes(4, "big").hex())
