from advgts.cli.dsl import load_model
from advgts.corpus import STATE_CAP, admissible, generate, random_paths, random_model_text


def test_generator_reproduces_the_shipped_files():
    shipped = {p.name: p.read_text(encoding="utf-8") for p in random_paths()}
    produced = {f"random_{i:02d}_seed{seed}.gts": text for i, (seed, text) in enumerate(generate())}
    assert len(shipped) == 20
    assert produced == shipped


def test_generator_is_deterministic():
    assert random_model_text(11) == random_model_text(11)


def test_every_shipped_model_is_admissible():
    for p in random_paths():
        assert admissible(load_model(p), STATE_CAP) is None, p.name
