#!/usr/bin/env python3
"""Regenerate the language-identification training and held-out text.

Text is sampled word-by-word from the public wordfreq frequency lists
(https://pypi.org/project/wordfreq/, CC-BY-SA 4.0 data). The wheel is read
directly so the only runtime dependency is msgpack.

    python3 tools/make_langid_fixtures.py --wheel wordfreq-3.1.1-py3-none-any.whl \
        --out data/langid
"""

import argparse
import gzip
import hashlib
import io
import itertools
import json
import random
import zipfile
from pathlib import Path

import msgpack

LANGS = ["en", "cs", "de", "fr", "zh", "ru", "ro", "uk", "hi", "ja", "ko", "nl", "ar", "it"]
NO_SPACE = {"zh", "ja"}
STOP = {"zh": "。", "ja": "。", "hi": "।", "ar": "."}
VOCAB = 6000
TRAIN_CHARS = 60000
HELDOUT_SENTENCES = 200
WHEEL_URL = "https://files.pythonhosted.org/packages/py3/w/wordfreq/wordfreq-3.1.1-py3-none-any.whl"


def load_words(wheel, lang):
    with zipfile.ZipFile(wheel) as zf:
        raw = zf.read(f"wordfreq/data/small_{lang}.msgpack.gz")
    buckets = msgpack.load(gzip.GzipFile(fileobj=io.BytesIO(raw)), raw=False)[1:]
    words, weights = [], []
    for idx, bucket in enumerate(buckets):
        for w in bucket:
            if not w.isalpha():
                continue
            words.append(w)
            weights.append(10.0 ** (-idx / 100.0))
            if len(words) >= VOCAB:
                return words, weights
    return words, weights


def sentence(rng, lang, words, cum, min_chars=0):
    n = rng.randint(6, 14)
    picked = rng.choices(words, cum_weights=cum, k=n)
    sep = "" if lang in NO_SPACE else " "
    while len(sep.join(picked)) < min_chars:
        picked += rng.choices(words, cum_weights=cum, k=1)
    if lang in NO_SPACE:
        text = "".join(picked)
    else:
        picked[0] = picked[0][:1].upper() + picked[0][1:]
        text = " ".join(picked)
    return text + STOP.get(lang, ".")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    wheel_sha = hashlib.sha256(Path(args.wheel).read_bytes()).hexdigest()
    sources = {"generator": "tools/make_langid_fixtures.py", "seed": args.seed,
               "source_url": WHEEL_URL, "source_sha256": wheel_sha, "languages": {}}

    for li, lang in enumerate(LANGS):
        words, weights = load_words(args.wheel, lang)
        cum = list(itertools.accumulate(weights))
        train_rng = random.Random(args.seed * 1000 + li)
        held_rng = random.Random(args.seed * 1000 + 500 + li)

        lines, chars = [], 0
        while chars < TRAIN_CHARS:
            s = sentence(train_rng, lang, words, cum)
            lines.append(s)
            chars += len(s)
        train = "\n".join(lines) + "\n"

        held = []
        while len(held) < HELDOUT_SENTENCES:
            held.append(sentence(held_rng, lang, words, cum, min_chars=40))
        heldout = "\n".join(held) + "\n"

        (out / f"{lang}.train.txt").write_text(train, encoding="utf-8")
        (out / f"{lang}.heldout.txt").write_text(heldout, encoding="utf-8")
        sources["languages"][lang] = {
            "train_sha256": hashlib.sha256(train.encode()).hexdigest(),
            "heldout_sha256": hashlib.sha256(heldout.encode()).hexdigest(),
            "vocab": len(words),
        }

    (out / "SOURCES.json").write_text(json.dumps(sources, indent=2, ensure_ascii=False) + "\n",
                                      encoding="utf-8")


if __name__ == "__main__":
    main()
