#!/usr/bin/env python3
"""Writes the toy fixture used by the pipeline tests.

Usage: python3 tools/make_toy_fixture.py fixtures/toy

Produces a 50-pair English->Dutch dictionary, a 200-token byte-level BPE
source vocabulary, a 200-token sentencepiece target vocabulary, a 16-dim
source embedding table in the exchange format, and a pipeline config.
"""
import json
import random
import struct
import sys
from pathlib import Path

PAIRS = [
    ("dog", "hond", 40), ("cat", "kat", 35), ("house", "huis", 50),
    ("tree", "boom", 20), ("water", "water", 45), ("bread", "brood", 15),
    ("book", "boek", 30), ("school", "school", 25), ("street", "straat", 18),
    ("city", "stad", 22), ("night", "nacht", 28), ("day", "dag", 60),
    ("week", "week", 33), ("year", "jaar", 55), ("child", "kind", 31),
    ("woman", "vrouw", 27), ("man", "man", 42), ("friend", "vriend", 24),
    ("world", "wereld", 38), ("light", "licht", 19), ("money", "geld", 26),
    ("work", "werk", 44), ("company", "bedrijf", 21), ("hand", "hand", 29),
    ("head", "hoofd", 17), ("heart", "hart", 16), ("window", "raam", 12),
    ("door", "deur", 23), ("table", "tafel", 14), ("chair", "stoel", 11),
    ("garden", "tuin", 13), ("river", "rivier", 10), ("bridge", "brug", 9),
    ("island", "eiland", 8), ("summer", "zomer", 18), ("winter", "winter", 17),
    ("morning", "ochtend", 20), ("evening", "avond", 19), ("kitchen", "keuken", 7),
    ("country", "land", 34), ("language", "taal", 22), ("question", "vraag", 25),
    ("answer", "antwoord", 15), ("story", "verhaal", 16), ("teacher", "leraar", 12),
    ("student", "student", 14), ("university", "universiteit", 10),
    ("doghouse", "hondenhok", 3), ("land", "land", 6), ("home", "huis", 12),
]

SPECIAL_SOURCE = ["<unk>", "<pad>", "<s>", "</s>", "<mask>"]
SPECIAL_TARGET = ["<unk>", "<pad>", "<s>", "</s>", "<mask>"]
PUNCT = [",", ".", "!", "?", ":", ";", "(", ")", "-", "'"]
NUMBERS = ["42", "2024", "1", "10", "100"]
SIZE = 200
DIM = 16


def pieces(word):
    """Splits a word into a 3-letter head and 2-letter continuation chunks."""
    head, rest = word[:3], word[3:]
    tails = [rest[i:i + 2] for i in range(0, len(rest), 2)]
    return head, tails


def fill(tokens, seen, candidates):
    for tok in candidates:
        if len(tokens) >= SIZE:
            break
        if tok not in seen:
            seen.add(tok)
            tokens.append(tok)


def source_vocab():
    tokens = list(SPECIAL_SOURCE)
    seen = set(tokens)
    fill(tokens, seen, PUNCT)
    fill(tokens, seen, ["Ġ" + n for n in NUMBERS])
    # "doghouse" and "university" stay multi-piece so the first-token
    # fallback is exercised.
    whole = [s for s, _, _ in PAIRS if s not in ("doghouse", "university")]
    fill(tokens, seen, ["Ġ" + w for w in whole])
    fill(tokens, seen, ["Ġ" + w.capitalize() for w in whole[:10]])
    extra = ["house", "s", "ing", "ed", "er", "ly", "ness", "ful", "un", "re"]
    fill(tokens, seen, extra)
    for s, _, _ in PAIRS:
        head, tails = pieces(s)
        fill(tokens, seen, ["Ġ" + head] + tails)
    fill(tokens, seen, ["Ġ" + c for c in "abcdefghijklmnopqrstuvwxyz"])
    fill(tokens, seen, list("abcdefghijklmnopqrstuvwxyz"))
    assert len(tokens) == SIZE, len(tokens)
    return tokens


def target_vocab():
    tokens = list(SPECIAL_TARGET)
    seen = set(tokens)
    fill(tokens, seen, PUNCT)
    fill(tokens, seen, ["▁" + n for n in NUMBERS])
    fill(tokens, seen, ["€", "₩"])
    whole = sorted({t for _, t, _ in PAIRS}, key=[t for _, t, _ in PAIRS].index)
    fill(tokens, seen, ["▁" + w for w in whole])
    fill(tokens, seen, ["▁" + w.capitalize() for w in whole[:8]])
    # Words outside the dictionary, reachable only through subword retrieval.
    fill(tokens, seen, ["▁honden", "▁katten", "▁huizen", "▁boeken", "▁steden",
                        "▁vrienden", "▁bedrijven", "▁scholen", "▁ramen"])
    extra = ["en", "je", "tje", "s", "heid", "lijk", "ing", "er", "ge", "be"]
    fill(tokens, seen, extra)
    for _, t, _ in PAIRS:
        head, tails = pieces(t)
        fill(tokens, seen, ["▁" + head] + tails)
    fill(tokens, seen, ["▁" + c for c in "abcdefghijklmnopqrstuvwxyz"])
    fill(tokens, seen, list("abcdefghijklmnopqrstuvwxyz"))
    assert len(tokens) == SIZE, len(tokens)
    return tokens


def write_embeddings(path, tokens, rng):
    with open(path, "wb") as out:
        out.write(b"T2TEMB01")
        out.write(struct.pack("<II", len(tokens), DIM))
        for tok in tokens:
            data = tok.encode("utf-8")
            out.write(struct.pack("<I", len(data)))
            out.write(data)
        for _ in tokens:
            out.write(struct.pack("<%df" % DIM, *(rng.gauss(0.0, 0.5) for _ in range(DIM))))


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures/toy")
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240607)
    with open(out / "dictionary.tsv", "w", encoding="utf-8", newline="\n") as f:
        f.write("# toy English-Dutch dictionary: source<TAB>target<TAB>frequency\n")
        for s, t, freq in PAIRS:
            f.write("%s\t%s\t%d\n" % (s, t, freq))
    src = source_vocab()
    tgt = target_vocab()
    (out / "source_vocab.txt").write_text("\n".join(src) + "\n", encoding="utf-8")
    (out / "target_vocab.txt").write_text("\n".join(tgt) + "\n", encoding="utf-8")
    write_embeddings(out / "source_embeddings.emb", src, rng)
    config = {
        "seed": 7,
        "threads": 1,
        "dictionary": "dictionary.tsv",
        "source": {"vocab": "source_vocab.txt", "convention": "bpe_byte",
                   "embeddings": "source_embeddings.emb"},
        "target": {"vocab": "target_vocab.txt", "convention": "sentencepiece"},
        "output_dir": "out",
        "corpus": {"augment_compounds": True, "frequency_weighted": False},
        "subword": {"dim": 64, "min_n": 4, "max_n": 7, "epochs": 5,
                    "negatives": 5, "learning_rate": 0.05, "bucket_count": 50000},
        "mapper": {"k_max": 5, "k": 3, "case_insensitive_retry": True},
        "report": {"examples_per_case": 5},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
