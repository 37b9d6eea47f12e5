from pathlib import Path

import pytest

from nlssum.synthetic import make_synthetic

ROOT = Path(__file__).resolve().parent.parent
BUNDLED = ROOT / "data" / "synthetic"

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bundle():
    return make_synthetic()


@pytest.fixture(scope="session")
def bundled_dir():
    return BUNDLED


def run_pipeline(out, data=BUNDLED):
    """labelsets -> train -> infer -> evaluate through the CLI; returns output paths."""
    from nlssum.cli import main

    out.mkdir(parents=True, exist_ok=True)
    p = {k: out / v for k, v in dict(labels="labels.jsonl", ckpt="ckpt.json", log="loss.csv",
                                     sel="selections.jsonl", report="report.json",
                                     figure="report.png").items()}
    steps = [
        ["labelsets", "--corpus", data / "train.jsonl", "--out", p["labels"], "--lang", "fr",
         "--provider", "memory", "--tm", data / "tm.en-fr.tsv", "--dict", data / "dict.en-fr.txt",
         "--rev-dict", data / "dict.fr-en.txt", "--strict", "--jobs", "1"],
        ["train", "--corpus", data / "train.jsonl", "--labels", p["labels"],
         "--dict", f"fr={data / 'dict.en-fr.txt'}", "--out", p["ckpt"], "--log", p["log"]],
        ["infer", "--checkpoint", p["ckpt"], "--corpus", data / "test.jsonl", "--out", p["sel"]],
        ["evaluate", "--selections", p["sel"], "--corpus", data / "test.jsonl",
         "--out", p["report"], "--figure", p["figure"], "--system", "nlssum"],
    ]
    for argv in steps:
        code = main([str(a) for a in argv])
        assert code == 0, f"{argv[0]} exited {code}"
    return p


@pytest.fixture(scope="session")
def pipeline_runs(tmp_path_factory):
    return [run_pipeline(tmp_path_factory.mktemp(f"run{i}")) for i in range(2)]
