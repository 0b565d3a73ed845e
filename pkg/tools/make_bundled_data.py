"""Regenerate the bundled desk-scale review corpus and POS lexicon.

The corpus is synthetic (template-expanded restaurant-review sentences),
so it carries no license restrictions. Run from the repo root:

    python tools/make_bundled_data.py

Outputs src/suggestkit/data/reviews.txt and src/suggestkit/data/pos_lexicon.tsv.
"""

import random
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "suggestkit" / "data"

# Word lists, tagged. Short words carry more corpus mass than long ones so
# the base LM leans short and a long-word bonus has room to move sampling.
ADJ_SHORT = ["good", "great", "nice", "tasty", "fresh", "cheap", "slow", "busy",
             "warm", "cold", "fast", "fun", "salty", "spicy", "sweet", "crisp",
             "bland", "rich", "dry", "hot", "mild", "plain", "solid", "fine"]
ADJ_LONG = ["amazing", "delicious", "wonderful", "fantastic", "excellent",
            "friendly", "generous", "crowded", "authentic", "flavorful",
            "terrible", "spacious", "incredible", "charming", "attentive",
            "hearty", "vibrant", "superb", "mediocre", "delightful"]
NOUN_SHORT = ["food", "bar", "staff", "menu", "place", "price", "salsa", "tacos",
              "chips", "beans", "rice", "patio", "salad", "queso", "spot", "meal",
              "drink", "table", "line", "booth", "bowl", "plate", "corn", "steak",
              "soup", "bread", "cook", "crowd", "decor", "vibe"]
NOUN_LONG = ["service", "dessert", "kitchen", "waiter", "portions", "atmosphere",
             "enchiladas", "guacamole", "margaritas", "experience", "burritos",
             "tortillas", "quesadilla", "carnitas", "horchata", "churros",
             "fajitas", "tamales", "location", "seating", "flavors", "selection"]
ADV_SHORT = ["very", "quite", "so", "too", "still", "often", "just", "truly"]
ADV_LONG = ["really", "always", "honestly", "definitely", "certainly",
            "absolutely", "usually", "surprisingly", "seriously", "extremely"]
VERB_PRES = ["love", "like", "enjoy", "order", "visit", "want", "crave",
             "recommend", "remember", "appreciate", "get", "try", "share", "miss"]
VERB_PAST = ["loved", "liked", "enjoyed", "ordered", "visited", "tried",
             "shared", "devoured", "recommended", "savored", "got", "had",
             "found", "picked", "grabbed", "missed"]
VERB_LINK = ["was", "is", "seemed", "tasted", "felt", "looked", "stayed", "came"]
PRON = ["i", "we", "they", "it", "you", "she", "he"]
DET = ["the", "this", "that", "a", "every", "our", "their", "my", "some", "each"]
ADP = ["for", "with", "at", "in", "of", "on", "after", "during", "near", "over"]
CONJ = ["and", "but", "or", "so"]
PRT = ["to", "not", "back", "up", "out"]
NUM = ["two", "three", "five", "ten", "four", "six"]

TAGGED = [
    (ADJ_SHORT + ADJ_LONG, "ADJ"),
    (NOUN_SHORT + NOUN_LONG, "NOUN"),
    (ADV_SHORT + ADV_LONG, "ADV"),
    (VERB_PRES + VERB_PAST + VERB_LINK, "VERB"),
    (PRON, "PRON"),
    (DET, "DET"),
    (ADP, "ADP"),
    (CONJ, "CONJ"),
    (PRT, "PRT"),
    (NUM, "NUM"),
    (list(".!?,"), "PUNCT"),
]


def pick(rng, short, long_, p_long=0.15):
    return rng.choice(long_) if rng.random() < p_long else rng.choice(short)


def sentence(rng):
    adj = lambda: pick(rng, ADJ_SHORT, ADJ_LONG)
    noun = lambda: pick(rng, NOUN_SHORT, NOUN_LONG)
    adv = lambda: pick(rng, ADV_SHORT, ADV_LONG)
    vpres = lambda: rng.choice(VERB_PRES)
    vpast = lambda: rng.choice(VERB_PAST)
    link = lambda: rng.choice(VERB_LINK)
    pron = lambda: rng.choice(PRON)
    det = lambda: rng.choice(DET)
    adp = lambda: rng.choice(ADP)
    end = rng.choice([".", ".", ".", "!", "?"])
    templates = [
        lambda: f"{pron()} {vpres()} {det()} {adj()} {noun()}{end}",
        lambda: f"the {noun()} {link()} {adv()} {adj()}{end}",
        lambda: f"{pron()} {vpast()} the {noun()} and the {noun()}{end}",
        lambda: f"{pron()} would {adv()} recommend the {adj()} {noun()}{end}",
        lambda: f"the {noun()} was {adj()} but the {noun()} was {adj()}{end}",
        lambda: f"{pron()} {vpast()} {rng.choice(NUM)} {noun()} {adp()} {noun()}{end}",
        lambda: f"come back for the {adj()} {noun()}{end}",
        lambda: f"the {adj()} {noun()} {adp()} the {noun()} was {adj()}{end}",
        lambda: f"{pron()} {vpast()} it {adv()}{end}",
        lambda: f"not the {adj()} {noun()} in town, but {adv()} {adj()}{end}",
        lambda: f"{det()} {noun()} {adp()} {noun()} {link()} {adj()}{end}",
        lambda: f"{pron()} {vpast()} {det()} {noun()}, {det()} {noun()} and {det()} {noun()}{end}",
        lambda: f"{adv()} {adj()} {noun()} {adp()} {det()} {adj()} {noun()}{end}",
        lambda: f"try the {noun()} {adp()} {noun()} {rng.choice(CONJ)} the {adj()} {noun()}{end}",
        lambda: f"{pron()} {vpres()} {rng.choice(PRT)} {adp()} {det()} {noun()}{end}",
        lambda: f"the {noun()} and {noun()} {link()} {adj()}, {adv()} the {noun()}{end}",
        lambda: f"{det()} {adj()} {noun()} {link()} {adp()} the {noun()}{end}",
        lambda: f"{pron()} {vpres()} the {noun()} {rng.choice(CONJ)} {pron()} {vpast()} the {noun()}{end}",
    ]
    return rng.choice(templates)()


def main():
    rng = random.Random(20240817)
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    lines = []
    for _ in range(1600):
        n_sent = rng.randint(3, 7)
        lines.append(" ".join(sentence(rng) for _ in range(n_sent)))
    (OUT_DIR / "reviews.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    entries = {}
    for words, tag in TAGGED:
        for w in words:
            entries.setdefault(w, tag)
    body = "".join(f"{w}\t{t}\n" for w, t in sorted(entries.items()))
    (OUT_DIR / "pos_lexicon.tsv").write_text(body, encoding="utf-8")
    print(f"wrote {len(lines)} reviews, {len(entries)} lexicon entries")


if __name__ == "__main__":
    main()
