"""Regenerates tests/data/vader_reference.tsv from the vaderSentiment package.

Rows where the package's "but" handling depends on repeated valence values
are skipped; the C++ scorer applies the rule by position.
"""
import random
import sys

from vaderSentiment.vaderSentiment import SentimentIntensityAnalyzer


FIXED = [
    "This is great!",
    "This is great! :)",
    "This is not great!",
    "This is not great",
    "the of and",
    "VADER is smart, handsome, and funny.",
    "VADER is smart, handsome, and funny!",
    "VADER is very smart, handsome, and funny.",
    "VADER is VERY SMART, handsome, and FUNNY.",
    "VADER is VERY SMART, handsome, and FUNNY!!!",
    "VADER is VERY SMART, uber handsome, and FRIGGIN FUNNY!!!",
    "VADER is not smart, handsome, nor funny.",
    "The book was good.",
    "At least it isn't a horrible book.",
    "The book was only kind of good.",
    "The plot was good, but the characters are uncompelling and the dialog is not great.",
    "Today SUX!",
    "Today only kinda sux! But I'll get by, lol",
    "Make sure you :) or :D today!",
    "Catch utf-8 emoji such as such as 💘 and 💋 and 😁",
    "Not bad at all",
    "no problem",
    "no good or bad",
    "never so happy",
    "without doubt a great day",
    "the least bad option",
    "at least good",
    "that movie was the bomb",
    "yeah right, great job",
    "a kiss of death for the plan",
    "is it good??",
    "is it good????",
    "what a day!!!!!!",
    "I don't like it",
    "i aint happy",
    "",
    "   ",
]

WORDS = ["good", "great", "bad", "terrible", "love", "hate", "happy", "sad", "nice", "fine",
         "win", "lose", "hope", "fear", "kill", "hero", "evil", "free", "lol", "ugh",
         "the", "a", "is", "it", "we", "they", "this", "that", "day", "people", "vote",
         "very", "so", "really", "extremely", "slightly", "kind", "of", "sort", "barely",
         "not", "never", "no", "nor", "or", "without", "isn't", "don't", "least", "at",
         "but", "BUT", "GOOD", "BAD", "LOVE", "Great", ":)", ":(", ";)", "<3", ":D",
         "😀", "😡", "👍", "💔", "bomb", "shit", "right", "yeah", "doubt"]
PUNCT = ["", "", "", "!", "!!", "?", "??", "????", ".", ",", "!!!!!"]


def positional_but(words, sentiments):
    lower = [str(w).lower() for w in words]
    if "but" not in lower:
        return sentiments
    bi = lower.index("but")
    return [s * 0.5 if i < bi else s * 1.5 if i > bi else s for i, s in enumerate(sentiments)]


def main(out_path):
    sia = SentimentIntensityAnalyzer()
    original = sia._but_check
    rng = random.Random(20240611)
    texts = list(FIXED)
    for _ in range(400):
        n = rng.randint(1, 9)
        toks = [rng.choice(WORDS) for _ in range(n)]
        texts.append(" ".join(toks) + rng.choice(PUNCT))
    rows = []
    for t in texts:
        captured = {}

        def probe(words, sentiments):
            captured["pos"] = positional_but(words, list(sentiments))
            result = original(words, sentiments)
            captured["ref"] = list(result)
            return result

        sia._but_check = probe
        score = sia.polarity_scores(t)
        sia._but_check = original
        if captured and captured["pos"] != captured["ref"]:
            continue
        rows.append((t, score["compound"], score["pos"], score["neg"], score["neu"]))
    with open(out_path, "w", encoding="utf-8") as f:
        f.write("text\tcompound\tpos\tneg\tneu\n")
        for t, c, p, n, u in rows:
            f.write(f"{t}\t{c}\t{p}\t{n}\t{u}\n")
    print(len(rows), "rows")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/vader_reference.tsv")
