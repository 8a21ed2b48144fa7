import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synth import write_corpus  # noqa: E402

from hcn.data import PreparedCorpus  # noqa: E402

# Official Dialogue bAbI Task 6 files, if the user has placed them locally.
# Expected names: dialog-babi-task6-dstc2-{trn,dev,tst}.txt
BABI_DIR = os.environ.get("HCN_BABI_DIR", str(Path(__file__).parent.parent / "data"))


def official_babi_paths():
    d = Path(BABI_DIR)
    paths = {
        "train": d / "dialog-babi-task6-dstc2-trn.txt",
        "dev": d / "dialog-babi-task6-dstc2-dev.txt",
        "test": d / "dialog-babi-task6-dstc2-tst.txt",
    }
    return paths if all(p.exists() for p in paths.values()) else None


@pytest.fixture(scope="session")
def synth_paths(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    return write_corpus(d)


@pytest.fixture(scope="session")
def corpus(synth_paths) -> PreparedCorpus:
    return PreparedCorpus.prepare(synth_paths["train"], synth_paths["dev"], synth_paths["test"])
