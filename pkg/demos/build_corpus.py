"""Regenerate the JSON fixture corpus shipped in ``corpus/``.

Usage: python3 demos/build_corpus.py [directory]
"""

import sys
from pathlib import Path

from irrepscatter.fixtures import build_corpus

target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "corpus"
for path in build_corpus(target):
    print(path)
