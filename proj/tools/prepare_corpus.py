#!/usr/bin/env python3
"""Turn a directory of plain-text books into a one-sentence-per-line corpus.

Paragraphs are separated by blank lines; each paragraph is joined into a
single line and split after sentence-final punctuation. The bundled
data/shakespeare.txt.gz was produced with

    pip download --no-deps --no-binary :all: shakespeare==0.6
    tar xzf shakespeare-0.6.tar.gz
    python3 tools/prepare_corpus.py shakespeare-0.6/shksprdata/texts \
        | gzip -9n > data/shakespeare.txt.gz

The texts are the public-domain Project Gutenberg Shakespeare editions
shipped in that package.
"""
import argparse
import pathlib
import re
import sys

SPLIT = re.compile(r"(?<=[.!?;:])\s+")


def sentences(text):
    for para in re.split(r"\n\s*\n", text):
        joined = " ".join(line.strip() for line in para.splitlines()).strip()
        if not joined:
            continue
        for sent in SPLIT.split(joined):
            sent = sent.strip()
            if sent:
                yield sent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("texts", type=pathlib.Path)
    args = ap.parse_args()
    out = sys.stdout
    for path in sorted(args.texts.glob("*.txt")):
        if path.name == "metadata.txt":
            continue
        text = path.read_text(encoding="utf-8", errors="replace")
        for sent in sentences(text):
            out.write(sent + "\n")


if __name__ == "__main__":
    main()
