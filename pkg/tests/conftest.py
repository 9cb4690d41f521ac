import io
from pathlib import Path

import pytest

from treasure_crawler.ddc import load_lexicon, load_lexicon_path, seed_lexicon_path

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def seed_lexicon():
    return load_lexicon_path(seed_lexicon_path())


@pytest.fixture
def tiny_lexicon():
    # clothing example plus two disciplines and one phrase entry
    text = "\n".join([
        "155.95\tclothing",
        "391\tclothing",
        "746.92\tclothing",
        "200\treligion",
        "294.3\tbuddhism",
        "297\tislam",
        "299\tshamanism",
        "520\tastronomy",
        "746.92\tfashion design",
        "746\ttextile",
        "740\tdesign",
    ])
    return load_lexicon(io.StringIO(text))


@pytest.fixture
def porter_pairs():
    pairs = []
    for line in (DATA_DIR / "porter_pairs.tsv").read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        word, expected = line.split("\t")
        pairs.append((word, expected))
    return pairs
