#!/usr/bin/env python3
"""Regenerate data/langprofiles/<code>.txt from the langdetect n-gram profiles.

Each output file lists the 300 most frequent character trigrams of one
language, one per line, most frequent first. Word boundaries are spaces.
"""
import json
import os
import sys

import langdetect

LANGS = {"en": "en", "de": "de", "fr": "fr", "it": "it", "es": "es",
         "ru": "ru", "pt": "pt", "nl": "nl", "zh": "zh-cn", "tr": "tr"}
TOP = 300


def main(out_dir):
    src = os.path.join(os.path.dirname(langdetect.__file__), "profiles")
    os.makedirs(out_dir, exist_ok=True)
    for code, name in LANGS.items():
        with open(os.path.join(src, name), encoding="utf-8") as f:
            freq = json.load(f)["freq"]
        tri = sorted(((v, k) for k, v in freq.items() if len(k) == 3),
                     key=lambda t: (-t[0], t[1]))
        grams = []
        for _, gram in tri:
            gram = gram.lower()
            if gram not in grams:
                grams.append(gram)
            if len(grams) == TOP:
                break
        with open(os.path.join(out_dir, code + ".txt"), "w", encoding="utf-8") as f:
            f.writelines(g + "\n" for g in grams)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/langprofiles")
