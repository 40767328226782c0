#!/usr/bin/env python3
"""Regenerates src/unicode_tables.inc from Python's unicodedata.

Usage: python3 tools/gen_unicode_tables.py > src/unicode_tables.inc
"""
import sys
import unicodedata


def letter_ranges():
    ranges = []
    start = None
    for cp in range(0x110000):
        is_letter = unicodedata.category(chr(cp)).startswith("L")
        if is_letter and start is None:
            start = cp
        elif not is_letter and start is not None:
            ranges.append((start, cp - 1))
            start = None
    if start is not None:
        ranges.append((start, 0x10FFFF))
    return ranges


def lowercase_pairs():
    pairs = []
    for cp in range(0x110000):
        lower = chr(cp).lower()
        if len(lower) == 1 and ord(lower) != cp:
            pairs.append((cp, ord(lower)))
    return pairs


def main():
    out = sys.stdout
    out.write("// Generated by tools/gen_unicode_tables.py (Unicode %s). Do not edit.\n\n"
              % unicodedata.unidata_version)
    out.write("constexpr CodePointRange kLetterRanges[] = {\n")
    for lo, hi in letter_ranges():
        out.write("    {0x%X, 0x%X},\n" % (lo, hi))
    out.write("};\n\n")
    out.write("constexpr CodePointPair kLowercasePairs[] = {\n")
    for upper, lower in lowercase_pairs():
        out.write("    {0x%X, 0x%X},\n" % (upper, lower))
    out.write("};\n")


if __name__ == "__main__":
    main()
