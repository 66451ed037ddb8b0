"""Independent BLEU / self-BLEU reference used to freeze test expectations.

Run: python3 bleu_oracle.py
"""
import math
import string
from collections import Counter
from fractions import Fraction

EPS = 1e-9

CORPUS = [
    "The cat sat on the mat and the dog slept by the door.",
    "The cat sat on the mat, while the dog slept by the fire.",
    "Stock prices rose sharply after the announcement.",
    "A dog slept by the door; the cat sat on the rug.",
]


def tokenize(text):
    out = []
    for tok in text.split():
        tok = tok.strip(string.punctuation).lower()
        if tok:
            out.append(tok)
    return out


def ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(cand, refs, max_n=4):
    if not cand:
        return 0.0
    logs = []
    for n in range(1, max_n + 1):
        c = ngrams(cand, n)
        total = sum(c.values())
        clipped = 0
        for g, cnt in c.items():
            clipped += min(cnt, max(ngrams(r, n)[g] for r in refs))
        p = Fraction(clipped, total) if total else Fraction(0)
        logs.append(math.log(float(p)) if p > 0 else math.log(EPS))
    ref_lens = sorted(len(r) for r in refs)
    r = min(ref_lens, key=lambda L: (abs(L - len(cand)), L))
    bp = 1.0 if len(cand) > r else math.exp(1 - r / len(cand))
    return bp * math.exp(sum(logs) / max_n)


def self_bleu(corpus, max_n=4):
    toks = [tokenize(t) for t in corpus]
    scores = [bleu(t, toks[:i] + toks[i + 1:], max_n) for i, t in enumerate(toks)]
    return sum(scores) / len(scores), scores


if __name__ == "__main__":
    mean, per = self_bleu(CORPUS)
    for s in per:
        print(repr(s))
    print("self_bleu", repr(mean))
    print("identical", repr(self_bleu(["one two three four five", "one two three four five"])[0]))
    print("disjoint", repr(self_bleu(["alpha beta gamma delta", "one two three four"])[0]))
