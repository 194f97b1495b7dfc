"""Smoke test for the readlevel_py extension module.

Uses an installed module if there is one (``maturin develop``), otherwise
the library left by
``cargo build -p readlevel-py --release --features extension-module``.
"""

import importlib.util
import json
import os
import random
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load_module():
    try:
        import readlevel_py

        return readlevel_py
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = os.path.join(ROOT, "target", profile, "libreadlevel_py.so")
        if os.path.exists(lib):
            dest = os.path.join(tempfile.mkdtemp(), "readlevel_py.so")
            shutil.copy(lib, dest)
            spec = importlib.util.spec_from_file_location("readlevel_py", dest)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("readlevel_py not found; build it with "
             "`cargo build -p readlevel-py --release --features extension-module`")


WORDS = [
    ["sol", "mar", "pé", "luz", "cão", "pão", "céu", "rio"],
    ["casa", "gato", "bola", "mesa", "livro", "porta", "carro", "festa"],
    ["borboleta", "aventura", "biblioteca", "matemática", "dinossauro", "professora"],
]


def text(level, rng):
    sentences = []
    for _ in range(3):
        n = 3 + 4 * level + rng.randint(0, 3)
        sentences.append(" ".join(rng.choice(WORDS[level - 1]) for _ in range(n)).capitalize() + ".")
    return " ".join(sentences)


def main():
    rl = load_module()
    rng = random.Random(7)

    names = rl.feature_names()
    assert len(names) == 108, len(names)
    feats = rl.extract_features("O gato viu a menina. Ela correu muito!")
    assert set(feats) == set(names)
    assert feats["punct_incidence"] is not None

    tmp = tempfile.mkdtemp()
    corpus = os.path.join(tmp, "corpus.jsonl")
    with open(corpus, "w", encoding="utf-8") as f:
        for level in (1, 2, 3):
            for i in range(10):
                f.write(json.dumps({"id": f"L{level}-{i}", "text": text(level, rng), "level": level}) + "\n")
    ds, failures = rl.extract_corpus(corpus)
    assert not failures and len(ds) == 30
    assert ds.class_counts() == {1: 10, 2: 10, 3: 10}

    matrix = os.path.join(tmp, "m.csv")
    ds.write_matrix(matrix)
    again = rl.Dataset.read_matrix(matrix)
    assert again.ids == ds.ids and again.rows() == ds.rows()

    model = rl.Model.train(ds, C=1.0, seed=0)
    assert model.labels == [1, 2, 3]
    preds = model.predict(ds)
    assert sum(p == g for p, g in zip(preds, ds.levels)) >= 27

    path = os.path.join(tmp, "model.json")
    model.save(path)
    assert rl.Model.load(path).predict(ds) == preds

    report = rl.cross_validate(ds, k=5, seed=1)
    assert 0.0 <= report["mean_accuracy"] <= 1.0
    assert sum(map(sum, report["confusion"])) == 30

    ranking = rl.rfe(ds, target=5, step=20)
    assert len(ranking["survivors"]) == 5

    pool = rl.Dataset(["f0", "f1"], ["a", "b", "c"], [[0.0, 1.0], [2.0, 0.5], [1.0, 1.0]])
    toy = rl.Dataset(["f0", "f1"], [f"t{i}" for i in range(6)],
                     [[0, 0], [0, 1], [1, 0], [4, 4], [4, 5], [5, 4]], [1, 1, 1, 2, 2, 2])
    batch = rl.select_batch(rl.Model.train(toy), pool, 2)
    assert len(batch) == 2 and batch[0][1] <= batch[1][1]

    merged = toy.merge("1:1,2:1,3:2,4:2,5:2")
    assert merged.class_counts() == {1: 6}

    k = rl.cohen_kappa(["A"] * 20 + ["A"] * 5 + ["B"] * 10 + ["B"] * 15,
                       ["A"] * 20 + ["B"] * 5 + ["A"] * 10 + ["B"] * 15)
    assert abs(k["kappa"] - 0.4) < 1e-12
    assert rl.landis_koch(0.528) == "moderate"
    assert abs(rl.accuracy_from_confusion([[3, 1], [0, 4]]) - 7 / 8) < 1e-12

    try:
        rl.Dataset.read_matrix(os.path.join(tmp, "missing.csv"))
    except OSError:
        pass
    else:
        raise AssertionError("missing file accepted")
    try:
        toy.merge("1:2")
    except rl.ReadlevelError:
        pass
    else:
        raise AssertionError("bad mapping accepted")

    print(f"python smoke test passed ({len(names)} features, cv accuracy {report['mean_accuracy']:.3f})")


if __name__ == "__main__":
    main()
