from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from semkb.desk import write_desk_corpus

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
ACCEPTANCE = pytest.StashKey[dict]()
ASSETS = Path(__file__).resolve().parent / "assets"


@pytest.fixture(scope="session")
def desk_corpus_path(tmp_path_factory) -> Path:
    """The shipped desk corpus, regenerated if it is missing."""
    path = ROOT / "data" / "desk_corpus.txt"
    if path.exists():
        return path
    path = tmp_path_factory.mktemp("data") / "desk_corpus.txt"
    write_desk_corpus(path, 2600, 2024)
    return path


@pytest.fixture(scope="session")
def desk_sentences(desk_corpus_path):
    from semkb.corpus import read_sentences

    return read_sentences(desk_corpus_path)


@pytest.fixture(scope="session")
def overfit_run(desk_sentences):
    """Desk model trained on 32 sentences over a noiseless channel for 500 steps."""
    from semkb import knowledge_base as kbm
    from semkb.corpus import build_vocabulary
    from semkb.metrics import HashedEmbedder
    from semkb.neural.model import ModelConfig
    from semkb.neural.train import Dataset, TrainConfig, init_model, train

    vocab = build_vocabulary(desk_sentences, 1000)
    kb = kbm.build(desk_sentences[:2000], 0.3, None, HashedEmbedder())
    small = desk_sentences[:32]
    data = Dataset.build(small, vocab, kb)
    model = init_model(ModelConfig.desk(len(vocab)), seed=0)
    cfg = TrainConfig.desk(epochs=500, batch_size=32, eta_min_ratio=1.0, max_steps=500)
    result = train(model, data, cfg, channel_kind=None)
    return {"result": result, "vocab": vocab, "kb": kb, "sentences": small, "data": data}


@pytest.fixture
def record_criterion(request):
    """``record(number, passed, detail)``; results print in the terminal summary."""
    results = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(number, passed: bool, detail: str = ""):
        results[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        passed, detail = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
