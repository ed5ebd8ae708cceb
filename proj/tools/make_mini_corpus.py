#!/usr/bin/env python3
"""Regenerates data/mini: a ~500-sentence template corpus, its word lists,
a 16-dimensional static vector table and a toy-provider audit config.

Axis 0 of every vector carries a gender component (male positive); the
remaining axes are random. Output is deterministic for a given --seed.
"""

import argparse
import json
import pathlib
import random

PAIRS = [
    ("woman", "man"), ("girl", "boy"), ("she", "he"), ("mother", "father"),
    ("daughter", "son"), ("her", "his"), ("female", "male"), ("sister", "brother"),
]

# word -> original bias (male positive)
PROFESSIONS = {
    "nurse": -0.9, "receptionist": -0.85, "librarian": -0.7, "nanny": -0.95,
    "hairdresser": -0.75, "secretary": -0.8, "dancer": -0.6, "housekeeper": -0.85,
    "stylist": -0.65, "teacher": -0.4, "homemaker": -0.9, "florist": -0.55,
    "architect": 0.7, "philosopher": 0.75, "surgeon": 0.6, "engineer": 0.65,
    "carpenter": 0.85, "mechanic": 0.8, "pilot": 0.55, "captain": 0.7,
    "plumber": 0.8, "banker": 0.5, "soldier": 0.75, "magician": 0.6,
    "doctor": 0.1, "lawyer": 0.05, "writer": -0.05, "chef": 0.15,
    "artist": -0.1, "accountant": 0.0, "student": -0.02, "manager": 0.2,
}

FEMALE_BIASED = [
    "bridal", "lipstick", "diet", "skirt", "jewelry", "pregnant", "makeup", "purse",
    "bikini", "gown", "perfume", "necklace", "blouse", "salon", "ballet", "knitting",
    "cupcake", "handbag", "lace", "tiara", "earrings", "sewing", "yoga", "bouquet",
]
MALE_BIASED = [
    "hero", "cigar", "teammates", "beard", "football", "wrestling", "warrior", "tractor",
    "garage", "whiskey", "hunting", "boxing", "rifle", "mustache", "poker", "barbecue",
    "tuxedo", "wrench", "quarterback", "fishing", "helmet", "brewery", "knight", "muscle",
]
FEMALE_EXTENDED = FEMALE_BIASED + [
    "manicure", "heels", "ponytail", "sorority", "bridesmaid", "cosmetics", "dress",
    "pink", "ruffle", "scarf", "cheerleader", "lingerie",
]
MALE_EXTENDED = MALE_BIASED + [
    "wrestler", "baseball", "chainsaw", "cigarette", "sword", "army", "beer", "hockey",
    "rugby", "stubble", "pickup", "commander",
]

FILLER = [
    "the", "a", "said", "that", "was", "is", "at", "in", "today", "tired", "happy",
    "works", "met", "with", "and", ".", "yesterday", "new", "old", "city", "office",
    "hospital", "school", "bought", "likes", "saw", "near", "house", "again", "busy",
    "called", "visited", "wanted", "for", "very", "talked", "about", "loved", "brought",
    "found", "store", "park", "morning", "evening", "to",
]

PLACES = ["city", "office", "hospital", "school", "house", "store", "park"]


def build_sentences(rng, n):
    def_words = [w for p in PAIRS for w in p]
    subj = [w for w in def_words if w not in ("her", "his", "female", "male")]
    biased = FEMALE_EXTENDED + MALE_EXTENDED
    profs = list(PROFESSIONS)
    templates = [
        lambda: f"the {rng.choice(profs)} said that {rng.choice(subj)} was {rng.choice(['tired', 'happy', 'busy'])} .",
        lambda: f"{rng.choice(subj)} met the {rng.choice(profs)} at the {rng.choice(PLACES)} .",
        lambda: f"the {rng.choice(profs)} works at the {rng.choice(PLACES)} today .",
        lambda: f"the {rng.choice(profs)} talked about the {rng.choice(biased)} .",
        lambda: f"{rng.choice(subj)} bought a new {rng.choice(biased)} yesterday .",
        lambda: f"{rng.choice(subj)} likes the {rng.choice(biased)} very much .",
        lambda: f"the {rng.choice(biased)} was near the {rng.choice(PLACES)} .",
        lambda: f"a {rng.choice(profs)} visited the {rng.choice(PLACES)} in the {rng.choice(['morning', 'evening'])} .",
        lambda: f"{rng.choice(subj)} called {rng.choice(['her', 'his'])} {rng.choice(subj)} again .",
        lambda: f"the {rng.choice(['female', 'male'])} {rng.choice(profs)} brought a {rng.choice(biased)} .",
        lambda: f"{rng.choice(subj)} found the {rng.choice(biased)} in the {rng.choice(PLACES)} .",
        lambda: f"the {rng.choice(profs)} loved the {rng.choice(biased)} and the {rng.choice(biased)} .",
    ]
    sentences = []
    # Every listed word appears at least three times.
    for w in profs:
        for _ in range(3):
            sentences.append(f"the {w} works at the {rng.choice(PLACES)} today .")
    for w in biased:
        for _ in range(3):
            sentences.append(f"the {w} was near the {rng.choice(PLACES)} .")
    while len(sentences) < n:
        sentences.append(rng.choice(templates)())
    rng.shuffle(sentences)
    return sentences[:n] if len(sentences) > n else sentences


def build_vectors(rng, vocab, dim):
    gender = {}
    for f, m in PAIRS:
        gender[f], gender[m] = -1.0, 1.0
    gender.update(PROFESSIONS)
    for w in FEMALE_EXTENDED:
        gender[w] = -0.8
    for w in MALE_EXTENDED:
        gender[w] = 0.8
    table = {}
    for w in sorted(vocab):
        v = [round(rng.gauss(0.0, 0.5), 6) for _ in range(dim)]
        v[0] = round(gender.get(w, 0.0) + rng.gauss(0.0, 0.1), 6)
        table[w] = v
    return table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "mini"))
    ap.add_argument("--sentences", type=int, default=500)
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    sentences = build_sentences(rng, args.sentences)
    (out / "corpus.txt").write_text("\n".join(sentences) + "\n", encoding="utf-8")

    vocab = {t for s in sentences for t in s.split()}
    table = build_vectors(rng, vocab, args.dim)
    with open(out / "vectors.txt", "w", encoding="utf-8") as f:
        f.write(f"{len(table)} {args.dim}\n")
        for w, v in table.items():
            f.write(w + " " + " ".join(repr(x) for x in v) + "\n")

    (out / "definitional.json").write_text(json.dumps([list(p) for p in PAIRS]) + "\n")
    (out / "professions.json").write_text(
        json.dumps([[w, 0.0, b] for w, b in PROFESSIONS.items()], indent=1) + "\n")
    (out / "biased.json").write_text(
        json.dumps({"female": FEMALE_BIASED, "male": MALE_BIASED}, indent=1) + "\n")
    (out / "extended_biased.json").write_text(
        json.dumps({"female": FEMALE_EXTENDED, "male": MALE_EXTENDED}, indent=1) + "\n")
    config = {
        "corpus": "corpus.txt",
        "lists": {
            "definitional": "definitional.json",
            "professions": "professions.json",
            "biased": "biased.json",
            "extended_biased": "extended_biased.json",
        },
        "embeddings": {"source": "toy", "path": "vectors.txt", "alpha": 0.5, "window": 2},
        "metrics": ["subspace", "direct-bias", "cluster", "classify", "knn"],
        "repeats": 10,
        "seed": 42,
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
